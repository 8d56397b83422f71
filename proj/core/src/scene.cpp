#include "rsac/scene.hpp"

#include <algorithm>
#include <cmath>

#include "rsac/error.hpp"
#include "rsac/rng.hpp"

namespace rsac {

void Scene::validate() const {
  if (margin < 0) fail(ErrorKind::Config, "scene: margin must be >= 0");
  if (frame_rows() < 2 || frame_cols() < 2)
    fail(ErrorKind::Config, "scene: grid too small for the margin");
  for (double v : intensity.raw())
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::Config, "scene: intensities must lie in [0, 1]");
}

Grid Scene::reference_frame() const {
  Grid out(frame_rows(), frame_cols());
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c)
      out.at(r, c) = intensity.at(r + margin, c + margin);
  return out;
}

namespace {

void gaussian_blur_inplace(Grid& g, double sigma) {
  if (sigma <= 0.0) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[static_cast<size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : kernel) v /= sum;

  Grid tmp(g.rows(), g.cols());
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      double acc = 0.0, wsum = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int cc = c + i;
        if (cc < 0 || cc >= g.cols()) continue;
        const double w = kernel[static_cast<size_t>(i + radius)];
        acc += w * g.at(r, cc);
        wsum += w;
      }
      tmp.at(r, c) = acc / wsum;
    }
  }
  for (int c = 0; c < g.cols(); ++c) {
    for (int r = 0; r < g.rows(); ++r) {
      double acc = 0.0, wsum = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int rr = r + i;
        if (rr < 0 || rr >= g.rows()) continue;
        const double w = kernel[static_cast<size_t>(i + radius)];
        acc += w * tmp.at(rr, c);
        wsum += w;
      }
      g.at(r, c) = acc / wsum;
    }
  }
}

} // namespace

Scene generate_scene(const SceneSpec& spec) {
  if (spec.rows < 2 || spec.cols < 2) fail(ErrorKind::Config, "scene spec: rows/cols must be >= 2");
  if (spec.margin < 0) fail(ErrorKind::Config, "scene spec: margin must be >= 0");
  if (!(spec.low < spec.high) || spec.low < 0.0 || spec.high > 1.0)
    fail(ErrorKind::Config, "scene spec: need 0 <= low < high <= 1");
  if (spec.ramp_weight < 0.0 || spec.ramp_weight > 1.0)
    fail(ErrorKind::Config, "scene spec: ramp_weight must lie in [0, 1]");

  const int rows = spec.rows + 2 * spec.margin;
  const int cols = spec.cols + 2 * spec.margin;
  Grid g(rows, cols);
  SplitMix64 rng(mix_seed(spec.seed, 0x5ce17eULL));
  for (double& v : g.raw()) v = rng.next_double();
  gaussian_blur_inplace(g, spec.blur_px);

  // Min-max normalize the texture to [low, high]; blur compresses contrast.
  double lo = g.raw().front(), hi = g.raw().front();
  for (double v : g.raw()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  for (double& v : g.raw()) v = spec.low + (spec.high - spec.low) * (v - lo) / span;

  if (spec.ramp_weight > 0.0) {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double ramp =
            spec.low + (spec.high - spec.low) * static_cast<double>(c) / (cols - 1);
        g.at(r, c) = (1.0 - spec.ramp_weight) * g.at(r, c) + spec.ramp_weight * ramp;
      }
    }
  }

  Scene scene;
  scene.intensity = std::move(g);
  scene.margin = spec.margin;
  scene.validate();
  return scene;
}

Scene scene_from_grid(Grid grid, int margin) {
  Scene scene;
  scene.intensity = std::move(grid);
  scene.margin = margin;
  scene.validate();
  return scene;
}

} // namespace rsac
