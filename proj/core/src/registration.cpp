#include "rsac/registration.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "rsac/error.hpp"

namespace rsac {

namespace {

// Separable Gaussian with border renormalization (constants are preserved,
// so uniform fields pass through untouched).
void gaussian_smooth(Grid& g, double sigma, Grid& scratch) {
  if (sigma <= 0.0) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  static thread_local std::vector<double> kernel;
  kernel.resize(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[static_cast<size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : kernel) v /= sum;

  const int rows = g.rows(), cols = g.cols();
  if (scratch.rows() != rows || scratch.cols() != cols) scratch = Grid(rows, cols);

  for (int r = 0; r < rows; ++r) {
    const double* src = g.row(r);
    double* dst = scratch.row(r);
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0, wsum = 0.0;
      const int lo = std::max(-radius, -c);
      const int hi = std::min(radius, cols - 1 - c);
      for (int i = lo; i <= hi; ++i) {
        const double w = kernel[static_cast<size_t>(i + radius)];
        acc += w * src[c + i];
        wsum += w;
      }
      dst[c] = acc / wsum;
    }
  }
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      double acc = 0.0, wsum = 0.0;
      const int lo = std::max(-radius, -r);
      const int hi = std::min(radius, rows - 1 - r);
      for (int i = lo; i <= hi; ++i) {
        const double w = kernel[static_cast<size_t>(i + radius)];
        acc += w * scratch.at(r + i, c);
        wsum += w;
      }
      g.at(r, c) = acc / wsum;
    }
  }
}

double sample_bilinear(const Grid& g, double r, double c) {
  r = std::clamp(r, 0.0, static_cast<double>(g.rows() - 1));
  c = std::clamp(c, 0.0, static_cast<double>(g.cols() - 1));
  int r0 = std::min(static_cast<int>(r), g.rows() - 2);
  int c0 = std::min(static_cast<int>(c), g.cols() - 2);
  const double wr = r - r0, wc = c - c0;
  const double* a = g.row(r0);
  const double* b = g.row(r0 + 1);
  const double top = a[c0] + wc * (a[c0 + 1] - a[c0]);
  const double bot = b[c0] + wc * (b[c0 + 1] - b[c0]);
  return top + wr * (bot - top);
}

Grid downsample2(const Grid& g) {
  const int rows = std::max(2, g.rows() / 2);
  const int cols = std::max(2, g.cols() / 2);
  Grid out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int r0 = 2 * r, c0 = 2 * c;
      const int r1 = std::min(r0 + 1, g.rows() - 1);
      const int c1 = std::min(c0 + 1, g.cols() - 1);
      out.at(r, c) =
          0.25 * (g.at(r0, c0) + g.at(r0, c1) + g.at(r1, c0) + g.at(r1, c1));
    }
  }
  return out;
}

// Upsample a field level to a target shape, scaling the displacement values
// by the shape ratio.
Grid upsample_field(const Grid& g, int rows, int cols, double value_scale) {
  Grid out(rows, cols);
  const double rs = rows > 1 ? static_cast<double>(g.rows() - 1) / (rows - 1) : 0.0;
  const double cs = cols > 1 ? static_cast<double>(g.cols() - 1) / (cols - 1) : 0.0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out.at(r, c) = value_scale * sample_bilinear(g, r * rs, c * cs);
  return out;
}

void demons_level(const Grid& ref, const Grid& mov, Grid& ux, Grid& uy,
                  const DemonsParams& params) {
  const int rows = ref.rows(), cols = ref.cols();
  Grid gx(rows, cols), gy(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int cm = std::max(c - 1, 0), cp = std::min(c + 1, cols - 1);
      const int rm = std::max(r - 1, 0), rp = std::min(r + 1, rows - 1);
      gx.at(r, c) = (ref.at(r, cp) - ref.at(r, cm)) / static_cast<double>(cp - cm);
      gy.at(r, c) = (ref.at(rp, c) - ref.at(rm, c)) / static_cast<double>(rp - rm);
    }
  }

  Grid dux(rows, cols), duy(rows, cols), scratch(rows, cols);
  std::deque<double> history;

  for (int iter = 0; iter < params.iterations; ++iter) {
    double msd = 0.0;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double warped =
            sample_bilinear(mov, r + uy.at(r, c), c + ux.at(r, c));
        const double diff = warped - ref.at(r, c);
        msd += diff * diff;
        const double gxv = gx.at(r, c), gyv = gy.at(r, c);
        const double denom = gxv * gxv + gyv * gyv + diff * diff;
        if (denom < 1e-12) {
          dux.at(r, c) = 0.0;
          duy.at(r, c) = 0.0;
        } else {
          dux.at(r, c) = diff * gxv / denom;
          duy.at(r, c) = diff * gyv / denom;
        }
      }
    }
    msd /= static_cast<double>(rows) * cols;
    if (msd < 1e-30) break;

    history.push_back(msd);
    if (static_cast<int>(history.size()) > params.stop_window + 1) history.pop_front();
    if (static_cast<int>(history.size()) == params.stop_window + 1) {
      const double past = history.front();
      if (past <= 0.0) break;
      if ((past - msd) / past < params.stop_rel_improvement) break;
    }

    gaussian_smooth(dux, params.sigma_fluid, scratch);
    gaussian_smooth(duy, params.sigma_fluid, scratch);
    for (size_t i = 0; i < ux.raw().size(); ++i) {
      ux.raw()[i] -= dux.raw()[i];
      uy.raw()[i] -= duy.raw()[i];
    }
    gaussian_smooth(ux, params.sigma_diffusion, scratch);
    gaussian_smooth(uy, params.sigma_diffusion, scratch);
  }
}

} // namespace

DisplacementField register_demons(const Grid& reference, const Grid& moving,
                                  const DemonsParams& params) {
  if (!reference.same_shape(moving) || reference.empty())
    fail(ErrorKind::Input, "register_demons: images must share a non-empty shape");
  if (reference.variance() < params.min_reference_variance)
    fail(ErrorKind::DegenerateScene, "register_demons: reference image has no texture");

  // Build pyramids (level 0 = finest).
  std::vector<Grid> refs{reference}, movs{moving};
  for (int level = 1; level < params.pyramid_levels; ++level) {
    if (refs.back().rows() < 16 || refs.back().cols() < 16) break;
    refs.push_back(downsample2(refs.back()));
    movs.push_back(downsample2(movs.back()));
  }

  Grid ux(refs.back().rows(), refs.back().cols());
  Grid uy(refs.back().rows(), refs.back().cols());
  for (int level = static_cast<int>(refs.size()) - 1; level >= 0; --level) {
    if (level != static_cast<int>(refs.size()) - 1) {
      ux = upsample_field(ux, refs[static_cast<size_t>(level)].rows(),
                          refs[static_cast<size_t>(level)].cols(), 2.0);
      uy = upsample_field(uy, refs[static_cast<size_t>(level)].rows(),
                          refs[static_cast<size_t>(level)].cols(), 2.0);
    }
    demons_level(refs[static_cast<size_t>(level)], movs[static_cast<size_t>(level)], ux, uy,
                 params);
  }

  DisplacementField field;
  field.dx = std::move(ux);
  field.dy = std::move(uy);
  return field;
}

int default_channel_groups(int rows, int cols) {
  if (rows < 1 || cols < 1) fail(ErrorKind::Input, "default_channel_groups: bad shape");
  const int g = static_cast<int>(std::lround(2.0 * cols / rows));
  return std::clamp(g, 1, cols);
}

std::vector<std::vector<double>> channels_from_field(const Grid& field, int groups) {
  const int rows = field.rows(), cols = field.cols();
  if (groups < 1 || groups > cols)
    fail(ErrorKind::Input, "channels_from_field: groups must lie in [1, cols]");
  std::vector<int> bounds(static_cast<size_t>(groups) + 1);
  for (int i = 0; i <= groups; ++i)
    bounds[static_cast<size_t>(i)] =
        static_cast<int>(std::lround(static_cast<double>(i) * cols / groups));

  std::vector<std::vector<double>> channels(static_cast<size_t>(groups));
  for (int g = 0; g < groups; ++g) {
    const int c0 = bounds[static_cast<size_t>(g)];
    const int c1 = bounds[static_cast<size_t>(g) + 1];
    auto& ch = channels[static_cast<size_t>(g)];
    ch.resize(static_cast<size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      double acc = 0.0;
      const double* row = field.row(r);
      for (int c = c0; c < c1; ++c) acc += row[c];
      ch[static_cast<size_t>(r)] = acc / static_cast<double>(c1 - c0);
    }
  }
  return channels;
}

int ChannelSet::gap_samples() const {
  if (sample_step_s <= 0.0 || frame_rate_hz <= 0.0) return 0;
  const long per_frame = std::lround(1.0 / (frame_rate_hz * sample_step_s));
  return static_cast<int>(per_frame - frame_rows);
}

ChannelSet channels_from_video(const FrameSequence& frames, int groups,
                               const DemonsParams& params, int reference_refresh) {
  if (frames.frames.empty()) fail(ErrorKind::Input, "channels_from_video: empty clip");
  const Grid* reference = &frames.frames.front();
  const int rows = reference->rows();
  const int cols = reference->cols();

  ChannelSet set;
  set.groups = groups;
  set.sample_step_s = frames.timing.row_readout_s;
  set.frame_rate_hz = frames.timing.frame_rate_hz;
  set.frame_rows = rows;
  set.x.assign(static_cast<size_t>(groups), {});
  set.y.assign(static_cast<size_t>(groups), {});
  for (auto& ch : set.x) ch.reserve(frames.frames.size() * static_cast<size_t>(rows));
  for (auto& ch : set.y) ch.reserve(frames.frames.size() * static_cast<size_t>(rows));

  for (size_t k = 0; k < frames.frames.size(); ++k) {
    if (reference_refresh > 0 && k > 0 && k % static_cast<size_t>(reference_refresh) == 0)
      reference = &frames.frames[k];
    set.frame_starts.push_back(set.x.front().size());
    const DisplacementField field = register_demons(*reference, frames.frames[k], params);
    const auto cx = channels_from_field(field.dx, groups);
    const auto cy = channels_from_field(field.dy, groups);
    for (int g = 0; g < groups; ++g) {
      auto& dst_x = set.x[static_cast<size_t>(g)];
      auto& dst_y = set.y[static_cast<size_t>(g)];
      dst_x.insert(dst_x.end(), cx[static_cast<size_t>(g)].begin(), cx[static_cast<size_t>(g)].end());
      dst_y.insert(dst_y.end(), cy[static_cast<size_t>(g)].begin(), cy[static_cast<size_t>(g)].end());
    }
    (void)cols;
  }
  return set;
}

} // namespace rsac
