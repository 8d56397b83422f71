#include "rsac/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "rsac/dsp.hpp"
#include "rsac/error.hpp"
#include "rsac/io.hpp"
#include "rsac/metrics.hpp"

namespace fs = std::filesystem;

namespace rsac {

namespace {

void check_keys(const ConfigSection& section, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : section.entries()) {
    (void)v;
    if (!allowed.count(k))
      fail(ErrorKind::Config,
           "config: unknown key '" + k + "' in section [" + section.name() + "]");
  }
}

std::string resolve_preset(const std::string& name, const std::string& preset_dir) {
  std::vector<std::string> dirs;
  if (!preset_dir.empty()) dirs.push_back(preset_dir);
  if (const char* env = std::getenv("RSAC_PRESET_DIR")) dirs.push_back(env);
  dirs.push_back("presets");
  for (const auto& dir : dirs) {
    const fs::path candidate = fs::path(dir) / (name + ".cfg");
    if (fs::exists(candidate)) return candidate.string();
  }
  fail(ErrorKind::Config, "config: camera preset '" + name + "' not found");
}

CameraPreset parse_camera(const ConfigSection& section, const std::string& preset_dir) {
  check_keys(section, {"preset", "preset_file", "name", "rows", "cols", "sensor_width_mm",
                       "focal_mm", "distance_mm", "exposure_us", "row_readout_ns", "fps",
                       "delta_div", "schedule_mode", "seed"});
  ConfigSection merged("camera");
  std::string preset_path;
  if (section.has("preset")) preset_path = resolve_preset(section.require_string("preset"), preset_dir);
  if (section.has("preset_file")) preset_path = section.require_string("preset_file");
  if (!preset_path.empty()) {
    const KeyValueFile kv = KeyValueFile::load(preset_path);
    for (const auto& [k, v] : kv.section("").entries()) merged.set(k, v);
  }
  for (const auto& [k, v] : section.entries())
    if (k != "preset" && k != "preset_file") merged.set(k, v);
  return camera_from_section(merged);
}

MechanicalPath parse_path(const ConfigSection& section) {
  check_keys(section, {"mode", "flat_gain_um", "spl_ref_db", "stroke_limit_um", "table"});
  MechanicalPath path;
  const std::string mode = section.get_string("mode", "flat");
  if (mode == "flat") {
    path.mode = MechanicalPath::Mode::FlatGain;
  } else if (mode == "table") {
    path.mode = MechanicalPath::Mode::ResponseTable;
  } else {
    fail(ErrorKind::Config, "config: [path] mode must be 'flat' or 'table'");
  }
  path.flat_gain_um = section.get_double("flat_gain_um", 1.0);
  path.spl_ref_db = section.get_double("spl_ref_db", 60.0);
  path.stroke_limit_um = section.get_double("stroke_limit_um", 100.0);
  if (section.has("table")) {
    // "freq:gain, freq:gain, ..."
    const std::string text = section.require_string("table");
    size_t pos = 0;
    while (pos < text.size()) {
      size_t comma = text.find(',', pos);
      if (comma == std::string::npos) comma = text.size();
      const std::string item = text.substr(pos, comma - pos);
      const size_t colon = item.find(':');
      if (colon == std::string::npos)
        fail(ErrorKind::Config, "config: [path] table entries must be freq:gain");
      try {
        path.response_table.emplace_back(std::stod(item.substr(0, colon)),
                                         std::stod(item.substr(colon + 1)));
      } catch (...) {
        fail(ErrorKind::Config, "config: [path] bad table entry '" + item + "'");
      }
      pos = comma + 1;
    }
  }
  path.validate();
  return path;
}

AudioSpec parse_audio(const ConfigSection& section) {
  check_keys(section, {"kind", "freq_hz", "f0_hz", "f1_hz", "duration_s", "rate_hz",
                       "amplitude", "pad_before_s", "pad_after_s", "wav_path"});
  AudioSpec spec;
  const std::string kind = section.get_string("kind", "tone");
  if (kind == "tone") {
    spec.kind = AudioSpec::Kind::Tone;
  } else if (kind == "chirp") {
    spec.kind = AudioSpec::Kind::Chirp;
  } else if (kind == "wav") {
    spec.kind = AudioSpec::Kind::Wav;
  } else if (kind == "silence") {
    spec.kind = AudioSpec::Kind::Silence;
  } else {
    fail(ErrorKind::Config, "config: [audio] unknown kind '" + kind + "'");
  }
  spec.freq_hz = section.get_double("freq_hz", spec.freq_hz);
  spec.f0_hz = section.get_double("f0_hz", spec.f0_hz);
  spec.f1_hz = section.get_double("f1_hz", spec.f1_hz);
  spec.duration_s = section.get_double("duration_s", spec.duration_s);
  spec.rate_hz = section.get_double("rate_hz", spec.rate_hz);
  spec.amplitude = section.get_double("amplitude", spec.amplitude);
  spec.pad_before_s = section.get_double("pad_before_s", 0.0);
  spec.pad_after_s = section.get_double("pad_after_s", 0.0);
  spec.wav_path = section.get_string("wav_path", "");

  if (spec.rate_hz <= 0.0) fail(ErrorKind::Config, "config: [audio] rate must be positive");
  if (spec.duration_s <= 0.0 && spec.kind != AudioSpec::Kind::Wav)
    fail(ErrorKind::Config, "config: [audio] duration must be positive");
  if (spec.pad_before_s < 0.0 || spec.pad_after_s < 0.0)
    fail(ErrorKind::Config, "config: [audio] padding must be >= 0");
  if (spec.kind == AudioSpec::Kind::Tone &&
      !(spec.freq_hz > 0.0 && spec.freq_hz < spec.rate_hz / 2.0))
    fail(ErrorKind::Config, "config: [audio] tone frequency must lie in (0, rate/2)");
  if (spec.kind == AudioSpec::Kind::Chirp &&
      !(0.0 < spec.f0_hz && spec.f0_hz < spec.f1_hz && spec.f1_hz < spec.rate_hz / 2.0))
    fail(ErrorKind::Config, "config: [audio] chirp needs 0 < f0 < f1 < rate/2");
  if (spec.kind == AudioSpec::Kind::Wav && !fs::exists(spec.wav_path))
    fail(ErrorKind::Config, "config: [audio] wav_path does not exist: " + spec.wav_path);
  return spec;
}

SceneChoice parse_scene(const ConfigSection& section, const CameraPreset& camera) {
  check_keys(section, {"kind", "margin_px", "seed", "blur_px", "ramp_weight", "low", "high",
                       "pgm_path"});
  SceneChoice choice;
  const std::string kind = section.get_string("kind", "generate");
  if (kind == "generate") {
    choice.kind = SceneChoice::Kind::Generate;
  } else if (kind == "pgm") {
    choice.kind = SceneChoice::Kind::Pgm;
  } else {
    fail(ErrorKind::Config, "config: [scene] unknown kind '" + kind + "'");
  }
  choice.spec.rows = camera.geometry.rows;
  choice.spec.cols = camera.geometry.cols;
  choice.spec.margin = section.get_int("margin_px", 16);
  choice.spec.seed = static_cast<uint64_t>(section.get_int("seed", 1));
  choice.spec.blur_px = section.get_double("blur_px", 2.0);
  choice.spec.ramp_weight = section.get_double("ramp_weight", 0.0);
  choice.spec.low = section.get_double("low", 0.05);
  choice.spec.high = section.get_double("high", 0.95);
  choice.pgm_path = section.get_string("pgm_path", "");
  if (choice.kind == SceneChoice::Kind::Pgm && !fs::exists(choice.pgm_path))
    fail(ErrorKind::Config, "config: [scene] pgm_path does not exist: " + choice.pgm_path);
  if (choice.spec.margin < 1) fail(ErrorKind::Config, "config: [scene] margin must be >= 1");
  return choice;
}

DriveSpec parse_drive(const ConfigSection& section) {
  check_keys(section, {"spl_db", "axis_x", "axis_y", "axis_z", "frames"});
  DriveSpec drive;
  drive.spl_db = section.get_double("spl_db", 60.0);
  drive.mix.x = section.get_double("axis_x", 1.0);
  drive.mix.y = section.get_double("axis_y", 0.0);
  drive.mix.z = section.get_double("axis_z", 0.0);
  drive.frames = section.get_int("frames", 0);
  if (drive.mix.x < 0.0 || drive.mix.y < 0.0 || drive.mix.z < 0.0 ||
      drive.mix.x + drive.mix.y + drive.mix.z > 3.0)
    fail(ErrorKind::Config, "config: [drive] axis weights must be >= 0 and sum <= 3");
  if (drive.frames < 0) fail(ErrorKind::Config, "config: [drive] frames must be >= 0");
  return drive;
}

ExtractSpec parse_extract(const ConfigSection& section) {
  check_keys(section, {"groups", "iterations", "sigma_fluid", "sigma_diffusion",
                       "pyramid_levels", "stop_rel_improvement", "stop_window",
                       "reference_refresh", "min_reference_variance"});
  ExtractSpec spec;
  spec.groups = section.get_int("groups", 0);
  spec.demons.iterations = section.get_int("iterations", spec.demons.iterations);
  spec.demons.sigma_fluid = section.get_double("sigma_fluid", spec.demons.sigma_fluid);
  spec.demons.sigma_diffusion =
      section.get_double("sigma_diffusion", spec.demons.sigma_diffusion);
  spec.demons.pyramid_levels = section.get_int("pyramid_levels", spec.demons.pyramid_levels);
  spec.demons.stop_rel_improvement =
      section.get_double("stop_rel_improvement", spec.demons.stop_rel_improvement);
  spec.demons.stop_window = section.get_int("stop_window", spec.demons.stop_window);
  spec.demons.min_reference_variance =
      section.get_double("min_reference_variance", spec.demons.min_reference_variance);
  spec.reference_refresh = section.get_int("reference_refresh", 0);
  if (spec.groups < 0) fail(ErrorKind::Config, "config: [extract] groups must be >= 0");
  if (spec.demons.iterations < 1 || spec.demons.pyramid_levels < 1)
    fail(ErrorKind::Config, "config: [extract] iterations and pyramid_levels must be >= 1");
  return spec;
}

RecoverSpec parse_recover(const ConfigSection& section) {
  check_keys(section, {"gap_policy", "target_rate_hz", "mix_channel", "dump_stages",
                       "noise_reduction", "liveness", "trim", "lowpass", "normalize",
                       "noise_seconds", "over_subtraction", "stft_window", "stft_hop",
                       "liveness_k", "liveness_window_ms", "hysteresis_ms", "lowpass_hz"});
  RecoverSpec spec;
  const std::string policy = section.get_string("gap_policy", "drop");
  if (policy == "drop") {
    spec.gap_policy = GapPolicy::Drop;
  } else if (policy == "zero-fill") {
    spec.gap_policy = GapPolicy::ZeroFill;
  } else {
    fail(ErrorKind::Config, "config: [recover] gap_policy must be 'drop' or 'zero-fill'");
  }
  spec.target_rate_hz = section.get_double("target_rate_hz", spec.target_rate_hz);
  spec.mix_channel = section.get_int("mix_channel", -1);
  spec.dump_stages = section.get_bool("dump_stages", false);
  spec.preprocess.noise_reduction = section.get_bool("noise_reduction", true);
  spec.preprocess.liveness = section.get_bool("liveness", true);
  spec.preprocess.trim = section.get_bool("trim", true);
  spec.preprocess.lowpass = section.get_bool("lowpass", true);
  spec.preprocess.normalize = section.get_bool("normalize", true);
  spec.preprocess.noise_seconds = section.get_double("noise_seconds", 0.25);
  spec.preprocess.over_subtraction = section.get_double("over_subtraction", 1.5);
  spec.preprocess.stft_window = static_cast<size_t>(section.get_int("stft_window", 1024));
  spec.preprocess.stft_hop = static_cast<size_t>(section.get_int("stft_hop", 256));
  spec.preprocess.liveness_k = section.get_double("liveness_k", 3.0);
  spec.preprocess.liveness_window_s = section.get_double("liveness_window_ms", 10.0) * 1e-3;
  spec.preprocess.hysteresis_s = section.get_double("hysteresis_ms", 50.0) * 1e-3;
  spec.preprocess.lowpass_hz = section.get_double("lowpass_hz", 4000.0);
  if (spec.target_rate_hz <= 0.0)
    fail(ErrorKind::Config, "config: [recover] target rate must be positive");
  return spec;
}

DefenseSpec parse_defense(const ConfigSection& section) {
  check_keys(section, {"kind", "rates_khz", "seeds", "residuals", "body_scale", "tone_hz",
                       "spring_targets", "vcm_resistance_ohm", "vcm_voltage_v",
                       "vcm_friction_n", "vcm_spring_n_per_m", "vcm_displacement_um",
                       "vcm_mass_g", "vcm_windings", "vcm_wire_length_mm", "vcm_flux_t",
                       "vcm_coil_area_mm2", "vcm_resistivity_ohm_m", "vcm_coil_length_m"});
  DefenseSpec spec;
  const std::string kind = section.get_string("kind", "none");
  if (kind == "none") {
    spec.kind = DefenseSpec::Kind::None;
  } else if (kind == "sample-rate") {
    spec.kind = DefenseSpec::Kind::SampleRate;
  } else if (kind == "random-coded") {
    spec.kind = DefenseSpec::Kind::RandomCoded;
  } else if (kind == "lens-lock") {
    spec.kind = DefenseSpec::Kind::LensLock;
  } else if (kind == "vcm-spring") {
    spec.kind = DefenseSpec::Kind::VcmSpring;
  } else {
    fail(ErrorKind::Config, "config: [defense] unknown kind '" + kind + "'");
  }
  if (section.has("rates_khz")) spec.rates_khz = section.get_double_list("rates_khz");
  if (section.has("seeds")) spec.seeds = section.get_double_list("seeds");
  if (section.has("residuals")) spec.residuals = section.get_double_list("residuals");
  spec.body_scale = section.get_double("body_scale", 1.0);
  spec.tone_hz = section.get_double("tone_hz", 0.0);
  if (section.has("spring_targets")) spec.spring_targets = section.get_double_list("spring_targets");

  spec.vcm.coil_resistance_ohm = section.get_double("vcm_resistance_ohm", 10.0);
  spec.vcm.drive_voltage_v = section.get_double("vcm_voltage_v", 2.0);
  spec.vcm.friction_n = section.get_double("vcm_friction_n", 0.001);
  spec.vcm.spring_n_per_m = section.get_double("vcm_spring_n_per_m", 40.0);
  spec.vcm.displacement_m = section.get_double("vcm_displacement_um", 100.0) * 1e-6;
  spec.vcm.mass_kg = section.get_double("vcm_mass_g", 1.0) * 1e-3;
  spec.vcm.windings = section.get_double("vcm_windings", 100.0);
  spec.vcm.wire_length_m = section.get_double("vcm_wire_length_mm", 20.0) * 1e-3;
  spec.vcm.flux_density_t = section.get_double("vcm_flux_t", 0.3);
  spec.vcm.coil_area_m2 = section.get_double("vcm_coil_area_mm2", 0.005) * 1e-6;
  spec.vcm.resistivity_ohm_m = section.get_double("vcm_resistivity_ohm_m", 1.68e-8);
  spec.vcm.coil_length_m = section.get_double("vcm_coil_length_m", 2.0);
  if (spec.kind == DefenseSpec::Kind::VcmSpring) spec.vcm.validate();
  return spec;
}

MetricsSpec parse_metrics(const ConfigSection& section) {
  check_keys(section, {"window", "hop"});
  MetricsSpec spec;
  spec.window = static_cast<size_t>(section.get_int("window", 4096));
  spec.hop = static_cast<size_t>(section.get_int("hop", 1024));
  if (spec.window < 16 || spec.hop < 1)
    fail(ErrorKind::Config, "config: [metrics] window must be >= 16 and hop >= 1");
  return spec;
}

} // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path, const std::string& preset_dir) {
  return from_key_values(KeyValueFile::load(path), preset_dir);
}

ExperimentConfig ExperimentConfig::from_key_values(const KeyValueFile& kv,
                                                   const std::string& preset_dir) {
  static const std::set<std::string> known_sections = {
      "", "camera", "path", "audio", "scene", "drive", "extract", "recover",
      "defense", "metrics", "output"};
  for (const auto& section : kv.sections()) {
    if (!known_sections.count(section.name()))
      fail(ErrorKind::Config, "config: unknown section [" + section.name() + "]");
    if (section.name().empty() && !section.entries().empty())
      fail(ErrorKind::Config, "config: top-level keys must live in a section");
  }

  ExperimentConfig cfg;
  cfg.camera = parse_camera(kv.section("camera"), preset_dir);
  cfg.path = parse_path(kv.section("path"));
  cfg.audio = parse_audio(kv.section("audio"));
  cfg.scene = parse_scene(kv.section("scene"), cfg.camera);
  cfg.drive = parse_drive(kv.section("drive"));
  cfg.extract = parse_extract(kv.section("extract"));
  cfg.recover = parse_recover(kv.section("recover"));
  cfg.defense = parse_defense(kv.section("defense"));
  cfg.metrics = parse_metrics(kv.section("metrics"));
  check_keys(kv.section("output"), {"dir"});
  cfg.output_dir = kv.section("output").get_string("dir", "out");
  cfg.config_hash = fnv1a_hex(kv.canonical_text());
  return cfg;
}

AudioSignal make_audio(const AudioSpec& spec) {
  AudioSignal audio;
  switch (spec.kind) {
    case AudioSpec::Kind::Tone:
      audio = synth_tone(spec.freq_hz, spec.duration_s, spec.rate_hz, spec.amplitude);
      break;
    case AudioSpec::Kind::Chirp:
      audio = synth_chirp(spec.f0_hz, spec.f1_hz, spec.duration_s, spec.rate_hz, spec.amplitude);
      break;
    case AudioSpec::Kind::Silence:
      audio.sample_rate = spec.rate_hz;
      audio.samples.assign(static_cast<size_t>(std::llround(spec.duration_s * spec.rate_hz)), 0.0);
      break;
    case AudioSpec::Kind::Wav:
      audio = read_wav(spec.wav_path);
      break;
  }
  const size_t before = static_cast<size_t>(std::llround(spec.pad_before_s * audio.sample_rate));
  const size_t after = static_cast<size_t>(std::llround(spec.pad_after_s * audio.sample_rate));
  if (before || after) {
    std::vector<double> padded;
    padded.reserve(before + audio.samples.size() + after);
    padded.insert(padded.end(), before, 0.0);
    padded.insert(padded.end(), audio.samples.begin(), audio.samples.end());
    padded.insert(padded.end(), after, 0.0);
    audio.samples = std::move(padded);
  }
  return audio;
}

Scene make_scene(const ExperimentConfig& cfg) {
  if (cfg.scene.kind == SceneChoice::Kind::Generate) return generate_scene(cfg.scene.spec);
  Grid grid = read_pgm16(cfg.scene.pgm_path);
  const int m = cfg.scene.spec.margin;
  if (grid.rows() != cfg.camera.geometry.rows + 2 * m ||
      grid.cols() != cfg.camera.geometry.cols + 2 * m)
    fail(ErrorKind::Config, "scene: PGM size does not match camera frame plus margin");
  return scene_from_grid(std::move(grid), m);
}

SimulationOutput run_simulation(const ExperimentConfig& cfg) {
  SimulationOutput out;
  out.audio = make_audio(cfg.audio);
  const ShutterTiming& timing = cfg.camera.timing;
  const double step = timing.step_s();
  out.lens_motion = audio_to_lens_motion(out.audio, cfg.path, cfg.drive.spl_db, cfg.drive.mix, step);
  out.pixel_motion = motion_to_pixels(out.lens_motion, cfg.camera.geometry);

  const int rows = cfg.camera.geometry.rows;
  int frames = cfg.drive.frames;
  if (frames <= 0) {
    frames = static_cast<int>(std::floor(out.audio.duration() * timing.frame_rate_hz));
    frames = std::max(frames, 1);
  }
  const long needed = timing.frame_start_step(frames - 1) +
                      static_cast<long>(rows - 1) * timing.delta_div +
                      timing.exposure_steps() + 1;
  if (static_cast<long>(out.pixel_motion.size()) < needed) {
    out.pixel_motion.x_px.resize(static_cast<size_t>(needed), 0.0);
    out.pixel_motion.y_px.resize(static_cast<size_t>(needed), 0.0);
    out.pixel_motion.scale.resize(static_cast<size_t>(needed), 1.0);
    out.lens_motion.x_um.resize(static_cast<size_t>(needed), 0.0);
    out.lens_motion.y_um.resize(static_cast<size_t>(needed), 0.0);
    out.lens_motion.z_um.resize(static_cast<size_t>(needed), 0.0);
  }

  out.scene = make_scene(cfg);
  const ShutterSchedule schedule =
      make_schedule(timing, rows, cfg.camera.schedule_mode, cfg.camera.seed);
  out.frames = render_video(out.scene, out.pixel_motion, schedule, timing, frames);
  return out;
}

ChannelSet run_extraction(const FrameSequence& frames, const ExtractSpec& spec) {
  if (frames.frames.empty()) fail(ErrorKind::Input, "run_extraction: no frames");
  const int rows = frames.frames.front().rows();
  const int cols = frames.frames.front().cols();
  const int groups = spec.groups > 0 ? spec.groups : default_channel_groups(rows, cols);
  return channels_from_video(frames, groups, spec.demons, spec.reference_refresh);
}

void save_frames(const std::string& dir, const SimulationOutput& sim,
                 const ExperimentConfig& cfg) {
  fs::create_directories(dir);
  const ShutterTiming& t = sim.frames.timing;
  std::vector<std::pair<std::string, std::string>> manifest;
  manifest.emplace_back("config_hash", cfg.config_hash);
  manifest.emplace_back("frames", std::to_string(sim.frames.count()));
  manifest.emplace_back("rows", std::to_string(sim.frames.frames.front().rows()));
  manifest.emplace_back("cols", std::to_string(sim.frames.frames.front().cols()));
  manifest.emplace_back("exposure_us", format_double(t.exposure_s * 1e6));
  manifest.emplace_back("row_readout_ns", format_double(t.row_readout_s * 1e9));
  manifest.emplace_back("fps", format_double(t.frame_rate_hz));
  manifest.emplace_back("delta_div", std::to_string(t.delta_div));
  manifest.emplace_back("schedule_mode", sim.frames.schedule_mode == ScheduleMode::Sequential
                                             ? "sequential"
                                             : "random-coded");
  manifest.emplace_back("seed", std::to_string(sim.frames.schedule_seed));
  manifest.emplace_back("frame_pattern", "frame_%06d.pgm");
  write_manifest((fs::path(dir) / "manifest.txt").string(), manifest);

  char name[32];
  for (int k = 0; k < sim.frames.count(); ++k) {
    std::snprintf(name, sizeof(name), "frame_%06d.pgm", k);
    write_pgm16((fs::path(dir) / name).string(), sim.frames.frames[static_cast<size_t>(k)],
                "config=" + cfg.config_hash);
  }
}

FrameSequence load_frames(const std::string& dir) {
  const auto manifest = read_manifest((fs::path(dir) / "manifest.txt").string());
  FrameSequence seq;
  const int count = std::stoi(manifest_value(manifest, "frames"));
  const int rows = std::stoi(manifest_value(manifest, "rows"));
  seq.timing.exposure_s = std::stod(manifest_value(manifest, "exposure_us")) * 1e-6;
  seq.timing.row_readout_s = std::stod(manifest_value(manifest, "row_readout_ns")) * 1e-9;
  seq.timing.frame_rate_hz = std::stod(manifest_value(manifest, "fps"));
  seq.timing.delta_div = std::stoi(manifest_value(manifest, "delta_div"));
  seq.timing.validate(rows);
  seq.schedule_mode = manifest_value(manifest, "schedule_mode") == "random-coded"
                          ? ScheduleMode::RandomCoded
                          : ScheduleMode::Sequential;
  seq.schedule_seed = std::stoull(manifest_value(manifest, "seed"));

  char name[32];
  for (int k = 0; k < count; ++k) {
    std::snprintf(name, sizeof(name), "frame_%06d.pgm", k);
    Grid frame = read_pgm16((fs::path(dir) / name).string());
    if (frame.rows() != rows)
      fail(ErrorKind::Io, "load_frames: frame size does not match the manifest");
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

void save_channels_csv(const std::string& path, const ChannelSet& channels) {
  std::vector<std::string> header{"time_s"};
  for (int g = 0; g < channels.groups; ++g) header.push_back("x" + std::to_string(g));
  for (int g = 0; g < channels.groups; ++g) header.push_back("y" + std::to_string(g));
  std::vector<std::vector<double>> rows(channels.length());
  for (size_t i = 0; i < channels.length(); ++i) {
    auto& row = rows[i];
    row.reserve(header.size());
    row.push_back(static_cast<double>(i) * channels.sample_step_s);
    for (const auto& ch : channels.x) row.push_back(ch[i]);
    for (const auto& ch : channels.y) row.push_back(ch[i]);
  }
  write_csv(path, header, rows);
}

ChannelSet load_channels_csv(const std::string& path, const ShutterTiming& timing, int rows) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 3 || table.header.front() != "time_s")
    fail(ErrorKind::Io, "channels csv: unexpected header");
  const size_t per_dir = (table.header.size() - 1) / 2;
  ChannelSet set;
  set.groups = static_cast<int>(per_dir);
  set.sample_step_s = timing.row_readout_s;
  set.frame_rate_hz = timing.frame_rate_hz;
  set.frame_rows = rows;
  set.x.assign(per_dir, {});
  set.y.assign(per_dir, {});
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) fail(ErrorKind::Io, "channels csv: ragged row");
    for (size_t g = 0; g < per_dir; ++g) {
      set.x[g].push_back(row[1 + g]);
      set.y[g].push_back(row[1 + per_dir + g]);
    }
  }
  for (size_t start = 0; start < set.length(); start += static_cast<size_t>(rows))
    set.frame_starts.push_back(start);
  return set;
}

std::vector<double> mean_x_channel(const ChannelSet& channels) {
  std::vector<double> mixed(channels.length(), 0.0);
  if (channels.x.empty()) return mixed;
  for (const auto& ch : channels.x)
    for (size_t i = 0; i < mixed.size(); ++i) mixed[i] += ch[i];
  for (auto& v : mixed) v /= static_cast<double>(channels.x.size());
  return mixed;
}

double mean_frame_amplitude(const ChannelSet& channels, double freq_hz) {
  const std::vector<double> mixed = mean_x_channel(channels);
  const double rate = 1.0 / channels.sample_step_s;
  const size_t rows = static_cast<size_t>(channels.frame_rows);
  if (rows == 0 || mixed.size() < rows) return 0.0;
  const size_t frames = mixed.size() / rows;
  double acc = 0.0;
  size_t used = 0;
  for (size_t k = frames > 1 ? 1 : 0; k < frames; ++k) {
    const std::vector<double> segment(mixed.begin() + static_cast<long>(k * rows),
                                      mixed.begin() + static_cast<long>((k + 1) * rows));
    acc += dsp::sine_fit_amplitude(segment, rate, freq_hz);
    ++used;
  }
  return used ? acc / static_cast<double>(used) : 0.0;
}

std::vector<SweepRow> sweep_resolution(const ExperimentConfig& cfg,
                                       const std::vector<double>& cols_values) {
  if (cfg.audio.kind != AudioSpec::Kind::Tone)
    fail(ErrorKind::Config, "resolution sweep: a tone drive is required");
  if (cfg.scene.kind != SceneChoice::Kind::Generate)
    fail(ErrorKind::Config, "resolution sweep: requires the generated scene");
  std::vector<SweepRow> out;
  for (double value : cols_values) {
    ExperimentConfig local = cfg;
    local.camera.geometry.cols = static_cast<int>(std::lround(value));
    local.camera.geometry.validate();
    local.scene.spec.cols = local.camera.geometry.cols;
    const SimulationOutput sim = run_simulation(local);
    ExtractSpec extract = local.extract;
    extract.groups = 1;
    const ChannelSet channels = run_extraction(sim.frames, extract);
    SweepRow row;
    row.value = value;
    row.amplitude = mean_frame_amplitude(channels, cfg.audio.freq_hz);
    out.push_back(row);
  }
  return out;
}

std::vector<SweepRow> sweep_spl(const ExperimentConfig& cfg,
                                const std::vector<double>& spl_values) {
  const AudioSignal audio = make_audio(cfg.audio);
  std::vector<SweepRow> out;
  for (double spl : spl_values) {
    const LensMotion motion =
        audio_to_lens_motion(audio, cfg.path, spl, cfg.drive.mix, cfg.camera.timing.step_s());
    double peak = 0.0;
    for (double v : motion.x_um) peak = std::max(peak, std::abs(v));
    SweepRow row;
    row.value = spl;
    row.amplitude = peak;
    out.push_back(row);
  }
  return out;
}

std::vector<SweepRow> sweep_distance(const ExperimentConfig& cfg,
                                     const std::vector<double>& distances_mm) {
  const double amplitude_um = spl_to_amplitude_um(cfg.drive.spl_db, cfg.path) *
                              std::min(cfg.audio.amplitude, 1.0);
  std::vector<SweepRow> out;
  for (double d : distances_mm) {
    SensorGeometry geometry = cfg.camera.geometry;
    geometry.distance_mm = d;
    SweepRow row;
    row.value = d;
    row.amplitude = pixel_displacement(geometry, amplitude_um, DisplacementMode::Lens);
    out.push_back(row);
  }
  return out;
}

std::vector<SweepRow> sweep_sample_rate(const ExperimentConfig& cfg,
                                        const std::vector<double>& rates_khz) {
  if (cfg.audio.kind != AudioSpec::Kind::Tone)
    fail(ErrorKind::Config, "sample-rate sweep: a tone drive is required");
  const SimulationOutput sim = run_simulation(cfg);
  const ChannelSet channels = run_extraction(sim.frames, cfg.extract);
  const std::vector<double> recovered = mean_x_channel(channels);
  const double base_rate = 1.0 / cfg.camera.timing.row_readout_s;
  const double tone = cfg.defense.tone_hz > 0.0 ? cfg.defense.tone_hz : cfg.audio.freq_hz;

  std::vector<SweepRow> out;
  for (double khz : rates_khz) {
    const SampleRateSim sr = simulate_sample_rate(recovered, base_rate, khz * 1000.0,
                                                  cfg.camera.geometry.rows,
                                                  cfg.camera.timing.frame_rate_hz);
    const std::vector<double> real_time =
        expand_to_real_time(sr, cfg.camera.geometry.rows, cfg.camera.timing.frame_rate_hz);
    SweepRow row;
    row.value = khz;
    row.amplitude = tone_band_snr_db(real_time, sr.sample_rate_hz, tone, base_rate / 2.0);
    row.extra = sr.duty;
    out.push_back(row);
  }
  return out;
}

} // namespace rsac
