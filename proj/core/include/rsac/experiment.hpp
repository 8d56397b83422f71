#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsac/camera.hpp"
#include "rsac/config.hpp"
#include "rsac/defense.hpp"
#include "rsac/recovery.hpp"
#include "rsac/registration.hpp"
#include "rsac/render.hpp"
#include "rsac/scene.hpp"
#include "rsac/signal.hpp"

namespace rsac {

struct AudioSpec {
  enum class Kind { Tone, Chirp, Wav, Silence };
  Kind kind = Kind::Tone;
  double freq_hz = 200.0;
  double f0_hz = 50.0, f1_hz = 650.0;
  double duration_s = 1.0;
  double rate_hz = 48000.0;
  double amplitude = 1.0;
  double pad_before_s = 0.0, pad_after_s = 0.0;
  std::string wav_path;
};

struct SceneChoice {
  enum class Kind { Generate, Pgm };
  Kind kind = Kind::Generate;
  SceneSpec spec;       // rows/cols filled from the camera when zero
  std::string pgm_path; // margin taken from spec.margin
};

struct DriveSpec {
  double spl_db = 60.0;
  AxisMix mix;
  int frames = 0; // 0 = derive from the audio duration
};

struct ExtractSpec {
  DemonsParams demons;
  int groups = 0; // 0 = nearest integer to 2N/M
  int reference_refresh = 0;
};

struct RecoverSpec {
  PreprocessConfig preprocess;
  GapPolicy gap_policy = GapPolicy::Drop;
  double target_rate_hz = 16000.0;
  int mix_channel = -1;
  bool dump_stages = false;
};

struct DefenseSpec {
  enum class Kind { None, SampleRate, RandomCoded, LensLock, VcmSpring };
  Kind kind = Kind::None;
  std::vector<double> rates_khz{34.0, 65.0, 324.0, 648.0};
  std::vector<double> seeds{1, 2, 3, 4, 5};
  std::vector<double> residuals{0.0};
  double body_scale = 1.0;
  double tone_hz = 0.0; // 0 = use the drive tone
  VcmDesign vcm;
  std::vector<double> spring_targets;
};

struct MetricsSpec {
  size_t window = 4096;
  size_t hop = 1024;
};

struct ExperimentConfig {
  CameraPreset camera;
  MechanicalPath path;
  AudioSpec audio;
  SceneChoice scene;
  DriveSpec drive;
  ExtractSpec extract;
  RecoverSpec recover;
  DefenseSpec defense;
  MetricsSpec metrics;
  std::string output_dir = "out";
  std::string config_hash;

  /// Parses and fully validates a configuration file. Preset names are
  /// resolved against preset_dir (or the RSAC_PRESET_DIR environment
  /// variable, or ./presets).
  static ExperimentConfig load(const std::string& path, const std::string& preset_dir = "");
  static ExperimentConfig from_key_values(const KeyValueFile& kv,
                                          const std::string& preset_dir = "");
};

AudioSignal make_audio(const AudioSpec& spec);
Scene make_scene(const ExperimentConfig& cfg);

struct SimulationOutput {
  AudioSignal audio;
  Scene scene;
  LensMotion lens_motion;
  PixelMotion pixel_motion;
  FrameSequence frames;
};

/// audio -> lens motion -> pixel motion -> rolling-shutter frames. The
/// motion trace is zero-padded to cover the last frame's exposure.
SimulationOutput run_simulation(const ExperimentConfig& cfg);

ChannelSet run_extraction(const FrameSequence& frames, const ExtractSpec& spec);

/// Frame directory I/O: zero-padded 16-bit PGMs plus a manifest holding the
/// timing, schedule and config hash.
void save_frames(const std::string& dir, const SimulationOutput& sim,
                 const ExperimentConfig& cfg);
FrameSequence load_frames(const std::string& dir);

void save_channels_csv(const std::string& path, const ChannelSet& channels);
ChannelSet load_channels_csv(const std::string& path, const ShutterTiming& timing, int rows);

/// Average of the X channels (equals the global column mean of the field).
std::vector<double> mean_x_channel(const ChannelSet& channels);

/// Average over frames (skipping the reference frame) of a per-frame
/// sinusoid fit: robust amplitude estimate for a known drive tone.
double mean_frame_amplitude(const ChannelSet& channels, double freq_hz);

struct SweepRow {
  double value = 0.0;
  double amplitude = 0.0;
  double extra = 0.0; // axis specific (duty, peak dB, ...)
};

std::vector<SweepRow> sweep_resolution(const ExperimentConfig& cfg,
                                       const std::vector<double>& cols_values);
std::vector<SweepRow> sweep_spl(const ExperimentConfig& cfg,
                                const std::vector<double>& spl_values);
std::vector<SweepRow> sweep_distance(const ExperimentConfig& cfg,
                                     const std::vector<double>& distances_mm);
std::vector<SweepRow> sweep_sample_rate(const ExperimentConfig& cfg,
                                        const std::vector<double>& rates_khz);

} // namespace rsac
