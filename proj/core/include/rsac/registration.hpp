#pragma once

#include <cstddef>
#include <vector>

#include "rsac/grid.hpp"
#include "rsac/render.hpp"

namespace rsac {

struct DemonsParams {
  double sigma_fluid = 1.0;     // smoothing of the per-iteration update, px
  double sigma_diffusion = 1.0; // smoothing of the accumulated field, px
  int iterations = 50;          // per pyramid level
  double stop_rel_improvement = 1e-4;
  int stop_window = 5;
  int pyramid_levels = 2;
  double min_reference_variance = 1e-4;
};

/// Dense per-pixel displacement mapping the moving image onto the
/// reference: moving(p + D(p)) ~= reference(p).
struct DisplacementField {
  Grid dx, dy;
};

/// Thirion-style diffusion registration: per-pixel updates
/// (mov - ref) * grad(ref) / (|grad(ref)|^2 + (mov - ref)^2), Gaussian
/// smoothing of update and field, optional coarse-to-fine pyramid.
DisplacementField register_demons(const Grid& reference, const Grid& moving,
                                  const DemonsParams& params = {});

/// Column-group count rule: nearest integer to 2N/M, clamped to [1, N].
int default_channel_groups(int rows, int cols);

/// Group-wise column means of one field component. Group boundaries are
/// round(i*N/groups); every column lands in exactly one group. Returns
/// `groups` signals of length M.
std::vector<std::vector<double>> channels_from_field(const Grid& field, int groups);

/// 1-D signals extracted from a clip: per direction, `groups` channels of
/// length frames*rows, sample spacing T_r, frame starts recorded.
struct ChannelSet {
  int groups = 0;
  std::vector<std::vector<double>> x, y;
  double sample_step_s = 0.0;
  double frame_rate_hz = 0.0;
  int frame_rows = 0;
  std::vector<size_t> frame_starts;

  size_t length() const { return x.empty() ? 0 : x.front().size(); }
  /// Dropped samples per frame boundary when restoring the true time base.
  int gap_samples() const;
};

/// Registers every frame against the reference frame (frame 0, optionally
/// refreshed every `reference_refresh` frames; 0 = never) and concatenates
/// the per-frame channels in frame order.
ChannelSet channels_from_video(const FrameSequence& frames, int groups,
                               const DemonsParams& params = {}, int reference_refresh = 0);

} // namespace rsac
