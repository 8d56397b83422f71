// rsac: batch front-end for the rolling-shutter acoustic side-channel
// toolkit. One command per invocation; everything is driven by a sectioned
// key-value configuration file so runs are reproducible.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsac/defense.hpp"
#include "rsac/dsp.hpp"
#include "rsac/error.hpp"
#include "rsac/experiment.hpp"
#include "rsac/io.hpp"
#include "rsac/metrics.hpp"
#include "rsac/recovery.hpp"

namespace fs = std::filesystem;
using namespace rsac;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::string preset_dir;
};

ExperimentConfig load_config(const CommonArgs& args) {
  return ExperimentConfig::load(args.config_path, args.preset_dir);
}

std::string output_path(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

double drive_tone_hz(const ExperimentConfig& cfg) {
  if (cfg.defense.tone_hz > 0.0) return cfg.defense.tone_hz;
  return cfg.audio.freq_hz;
}

// ---- synth ----------------------------------------------------------------

int cmd_synth(const CommonArgs& args, std::string out) {
  const ExperimentConfig cfg = load_config(args);
  const AudioSignal audio = make_audio(cfg.audio);
  if (out.empty()) out = output_path(cfg, "audio.wav");
  write_wav(out, audio, "config=" + cfg.config_hash);
  std::printf("wrote %s (%zu samples @ %g Hz)\n", out.c_str(), audio.samples.size(),
              audio.sample_rate);
  return kExitOk;
}

// ---- simulate ---------------------------------------------------------------

int cmd_simulate(const CommonArgs& args, std::string frames_dir) {
  const ExperimentConfig cfg = load_config(args);
  const SimulationOutput sim = run_simulation(cfg);
  if (frames_dir.empty()) frames_dir = output_path(cfg, "frames");
  save_frames(frames_dir, sim, cfg);
  std::printf("wrote %d frame(s) to %s\n", sim.frames.count(), frames_dir.c_str());
  return kExitOk;
}

// ---- extract ----------------------------------------------------------------

int cmd_extract(const CommonArgs& args, const std::string& frames_dir, std::string out) {
  ExtractSpec extract;
  std::string out_dir = ".";
  std::string hash;
  if (!args.config_path.empty()) {
    const ExperimentConfig cfg = load_config(args);
    extract = cfg.extract;
    out_dir = cfg.output_dir;
    hash = cfg.config_hash;
  }
  const FrameSequence frames = load_frames(frames_dir);
  const ChannelSet channels = run_extraction(frames, extract);
  if (out.empty()) {
    fs::create_directories(out_dir);
    out = (fs::path(out_dir) / "channels.csv").string();
  }
  save_channels_csv(out, channels);
  std::printf("wrote %s (%d x-channel(s), %zu samples each)\n", out.c_str(), channels.groups,
              channels.length());
  return kExitOk;
}

// ---- recover ----------------------------------------------------------------

int cmd_recover(const CommonArgs& args, const std::string& channels_csv, std::string out) {
  const ExperimentConfig cfg = load_config(args);
  const ChannelSet channels =
      load_channels_csv(channels_csv, cfg.camera.timing, cfg.camera.geometry.rows);
  const std::vector<RecoveredSignal> cleaned = preprocess(channels, cfg.recover.preprocess);

  if (cfg.recover.dump_stages) {
    for (size_t i = 0; i < cleaned.size(); ++i) {
      if (cleaned[i].empty_flag) continue;
      std::vector<std::vector<double>> rows(cleaned[i].samples.size(),
                                            std::vector<double>(2));
      for (size_t s = 0; s < cleaned[i].samples.size(); ++s) {
        rows[s][0] = static_cast<double>(s) / cleaned[i].sample_rate;
        rows[s][1] = cleaned[i].samples[s];
      }
      write_csv(output_path(cfg, "stage_channel" + std::to_string(i) + ".csv"),
                {"time_s", "value"}, rows);
    }
  }

  bool all_empty = true;
  for (const auto& sig : cleaned) all_empty = all_empty && sig.empty_flag;
  if (all_empty) {
    std::printf("no active region found; nothing to recover\n");
    return kExitOk;
  }

  const AudioSignal audio = channels_to_audio(cleaned, cfg.recover.gap_policy,
                                              cfg.recover.target_rate_hz,
                                              cfg.recover.mix_channel);
  if (out.empty()) out = output_path(cfg, "recovered.wav");
  write_wav(out, audio, "config=" + cfg.config_hash);
  std::printf("wrote %s (%zu samples @ %g Hz)\n", out.c_str(), audio.samples.size(),
              audio.sample_rate);
  return kExitOk;
}

// ---- measure ----------------------------------------------------------------

std::vector<double> load_signal(const std::string& path, const ExperimentConfig& cfg,
                                double& rate) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    const ChannelSet channels =
        load_channels_csv(path, cfg.camera.timing, cfg.camera.geometry.rows);
    rate = 1.0 / channels.sample_step_s;
    return mean_x_channel(channels);
  }
  const AudioSignal audio = read_wav(path);
  rate = audio.sample_rate;
  return audio.samples;
}

int cmd_measure(const CommonArgs& args, const std::string& input, std::string out,
                double true_duration) {
  const ExperimentConfig cfg = load_config(args);
  double rate = 0.0;
  const std::vector<double> signal = load_signal(input, cfg, rate);

  MetricsReport report;
  report.dominant_hz = dominant_frequency(signal, rate);
  report.track = dominant_freq_track(signal, rate, cfg.metrics.window, cfg.metrics.hop);

  // Active mask from a coarse envelope threshold; SNR needs both classes.
  std::vector<uint8_t> mask(signal.size(), 0);
  double peak = 0.0;
  for (double v : signal) peak = std::max(peak, std::abs(v));
  size_t active = 0;
  for (size_t i = 0; i < signal.size(); ++i) {
    mask[i] = std::abs(signal[i]) > 0.1 * peak;
    active += mask[i];
  }
  if (active > 0 && active < signal.size()) {
    report.snr_db = snr_db(signal, mask);
  } else {
    report.notes = "snr-skipped-uniform-activity";
  }
  if (true_duration > 0.0) {
    const EtaCapMeasurement eta = measure_eta_cap(signal, rate, true_duration);
    report.eta_cap_measured = eta.found_active ? eta.fraction : 0.0;
  }

  const auto kv = report.to_key_values();
  std::string text;
  for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
  if (out.empty()) out = output_path(cfg, "report.txt");
  {
    std::ofstream f(out, std::ios::trunc);
    if (!f) fail(ErrorKind::Io, "cannot write " + out);
    f << text;
  }
  std::fputs(text.c_str(), stdout);
  return kExitOk;
}

// ---- defend -----------------------------------------------------------------

int cmd_defend(const CommonArgs& args, std::string out) {
  const ExperimentConfig cfg = load_config(args);
  if (out.empty()) out = output_path(cfg, "defense.csv");
  const double tone = drive_tone_hz(cfg);

  switch (cfg.defense.kind) {
    case DefenseSpec::Kind::None:
      fail(ErrorKind::Config, "defend: [defense] kind is 'none'");

    case DefenseSpec::Kind::SampleRate: {
      const SimulationOutput sim = run_simulation(cfg);
      const ChannelSet channels = run_extraction(sim.frames, cfg.extract);
      const std::vector<double> recovered = mean_x_channel(channels);
      const double base_rate = 1.0 / cfg.camera.timing.row_readout_s;
      std::vector<std::vector<double>> rows;
      for (double khz : cfg.defense.rates_khz) {
        const SampleRateSim sr =
            simulate_sample_rate(recovered, base_rate, khz * 1000.0, cfg.camera.geometry.rows,
                                 cfg.camera.timing.frame_rate_hz);
        const std::vector<double> real_time =
            expand_to_real_time(sr, cfg.camera.geometry.rows, cfg.camera.timing.frame_rate_hz);
        rows.push_back({khz, sr.duty,
                        tone_peak_to_background_db(real_time, sr.sample_rate_hz, tone,
                                                   base_rate / 2.0),
                        dominant_frequency(real_time, sr.sample_rate_hz),
                        tone_band_snr_db(real_time, sr.sample_rate_hz, tone,
                                         base_rate / 2.0)});
      }
      write_csv(out, {"rate_khz", "duty", "peak_to_background_db", "dominant_freq_hz", "snr_db"},
                rows);
      break;
    }

    case DefenseSpec::Kind::RandomCoded: {
      const SimulationOutput sim = run_simulation(cfg);
      std::vector<std::vector<double>> rows;
      for (double seed : cfg.defense.seeds) {
        const ScheduleComparison cmp = evaluate_random_coded(
            sim.scene, sim.pixel_motion, cfg.camera.timing, sim.frames.count(), tone,
            static_cast<uint64_t>(seed), cfg.extract.demons);
        rows.push_back({seed, cmp.applicable ? 1.0 : 0.0, cmp.sequential_peak_db,
                        cmp.coded_peak_db, cmp.sequential_dominant_hz, cmp.coded_dominant_hz});
      }
      write_csv(out,
                {"seed", "applicable", "sequential_peak_db", "coded_peak_db",
                 "sequential_dominant_hz", "coded_dominant_hz"},
                rows);
      break;
    }

    case DefenseSpec::Kind::LensLock: {
      const AudioSignal audio = make_audio(cfg.audio);
      const LensMotion lens = audio_to_lens_motion(audio, cfg.path, cfg.drive.spl_db,
                                                   cfg.drive.mix, cfg.camera.timing.step_s());
      std::vector<std::vector<double>> rows;
      for (double residual : cfg.defense.residuals) {
        ExperimentConfig local = cfg;
        SimulationOutput sim;
        sim.audio = audio;
        sim.lens_motion = lens;
        sim.pixel_motion = lens_lock(lens, residual, cfg.defense.body_scale, cfg.camera.geometry);
        const int frames =
            std::max(1, static_cast<int>(std::floor(audio.duration() *
                                                    cfg.camera.timing.frame_rate_hz)));
        sim.scene = make_scene(local);
        const ShutterSchedule schedule = make_schedule(cfg.camera.timing,
                                                       cfg.camera.geometry.rows,
                                                       cfg.camera.schedule_mode, cfg.camera.seed);
        sim.frames = render_video(sim.scene, sim.pixel_motion, schedule, cfg.camera.timing, frames);
        const ChannelSet channels = run_extraction(sim.frames, cfg.extract);
        rows.push_back({residual, cfg.defense.body_scale,
                        mean_frame_amplitude(channels, tone)});
      }
      write_csv(out, {"residual", "body_scale", "amplitude_px"}, rows);
      break;
    }

    case DefenseSpec::Kind::VcmSpring: {
      const VcmSensitivity base = vcm_sensitivity(cfg.defense.vcm);
      std::vector<std::vector<double>> rows;
      for (double target : cfg.defense.spring_targets) {
        const SpringCompensation comp = compensate_stiffer_spring(cfg.defense.vcm, target);
        const double check =
            comp.feasible ? vcm_sensitivity(comp.windings_design).sensitivity : 0.0;
        rows.push_back({target, comp.feasible ? 1.0 : 0.0, comp.required_force_n,
                        comp.feasible ? comp.windings_design.windings : 0.0,
                        comp.feasible ? comp.wire_length_design.wire_length_m * 1e3 : 0.0,
                        comp.feasible ? comp.flux_design.flux_density_t : 0.0, base.sensitivity,
                        check});
      }
      write_csv(out,
                {"spring_n_per_m", "feasible", "required_force_n", "windings",
                 "wire_length_mm", "flux_t", "sensitivity", "sensitivity_check"},
                rows);
      break;
    }
  }
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

// ---- sweep ------------------------------------------------------------------

int cmd_sweep(const CommonArgs& args, const std::string& axis, std::vector<double> values,
              std::string out) {
  const ExperimentConfig cfg = load_config(args);
  if (out.empty()) out = output_path(cfg, "sweep_" + axis + ".csv");

  std::vector<SweepRow> rows;
  std::vector<std::string> header;
  if (axis == "resolution") {
    if (values.empty()) values = {480, 960, 1920};
    rows = sweep_resolution(cfg, values);
    header = {"cols", "amplitude_px"};
  } else if (axis == "spl") {
    if (values.empty())
      for (double v = 55.0; v <= 95.0; v += 5.0) values.push_back(v);
    rows = sweep_spl(cfg, values);
    header = {"spl_db", "amplitude_um"};
  } else if (axis == "distance") {
    if (values.empty()) values = {300, 1000, 2000, 3000};
    rows = sweep_distance(cfg, values);
    header = {"distance_mm", "amplitude_px"};
  } else if (axis == "sample-rate") {
    if (values.empty()) values = cfg.defense.rates_khz;
    rows = sweep_sample_rate(cfg, values);
    header = {"rate_khz", "peak_to_background_db", "duty"};
  } else {
    fail(ErrorKind::Config, "sweep: unknown axis '" + axis + "'");
  }

  std::vector<std::vector<double>> csv;
  for (const auto& row : rows) {
    if (header.size() == 3) {
      csv.push_back({row.value, row.amplitude, row.extra});
    } else {
      csv.push_back({row.value, row.amplitude});
    }
  }
  write_csv(out, header, csv);
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

// ---- pipeline ---------------------------------------------------------------

int cmd_pipeline(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const std::string dir = cfg.output_dir;
  fs::create_directories(dir);

  const SimulationOutput sim = run_simulation(cfg);
  write_wav((fs::path(dir) / "audio.wav").string(), sim.audio, "config=" + cfg.config_hash);
  save_frames((fs::path(dir) / "frames").string(), sim, cfg);

  const ChannelSet channels = run_extraction(sim.frames, cfg.extract);
  save_channels_csv((fs::path(dir) / "channels.csv").string(), channels);

  const std::vector<RecoveredSignal> cleaned = preprocess(channels, cfg.recover.preprocess);
  bool all_empty = true;
  for (const auto& sig : cleaned) all_empty = all_empty && sig.empty_flag;

  std::vector<std::pair<std::string, std::string>> summary;
  summary.emplace_back("config_hash", cfg.config_hash);
  summary.emplace_back("frames", std::to_string(sim.frames.count()));
  summary.emplace_back("channels", std::to_string(2 * channels.groups));
  summary.emplace_back("eta_cap_calc",
                       format_double(captured_fraction(cfg.camera.timing,
                                                       cfg.camera.geometry.rows)));

  if (!all_empty) {
    const AudioSignal recovered = channels_to_audio(cleaned, cfg.recover.gap_policy,
                                                    cfg.recover.target_rate_hz,
                                                    cfg.recover.mix_channel);
    write_wav((fs::path(dir) / "recovered.wav").string(), recovered,
              "config=" + cfg.config_hash);

    MetricsReport report;
    const std::vector<double> raw = mean_x_channel(channels);
    const double rate = 1.0 / channels.sample_step_s;
    report.dominant_hz = dominant_frequency(raw, rate);
    if (raw.size() >= 64)
      report.track = dominant_freq_track(raw, rate, cfg.metrics.window, cfg.metrics.hop);
    const auto kv = report.to_key_values();
    std::string text;
    for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
    std::ofstream f((fs::path(dir) / "report.txt").string(), std::ios::trunc);
    f << text;
    summary.emplace_back("dominant_freq_hz", format_double(report.dominant_hz));
  } else {
    summary.emplace_back("recovered", "empty");
  }

  write_manifest((fs::path(dir) / "manifest.txt").string(), summary);
  std::printf("pipeline complete: %s\n", dir.c_str());
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"rolling-shutter acoustic side-channel simulator and recovery toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string out, frames_dir, channels_csv, input, axis;
  std::vector<double> values;
  double true_duration = 0.0;

  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    auto* opt = sub->add_option("--config,-c", common.config_path, "experiment config file");
    if (config_required) opt->required();
    sub->add_option("--preset-dir", common.preset_dir, "camera preset directory");
  };

  auto* synth = app.add_subcommand("synth", "generate the configured audio as a WAV file");
  add_common(synth);
  synth->add_option("--out,-o", out, "output WAV path");

  auto* simulate = app.add_subcommand("simulate", "render rolling-shutter frames");
  add_common(simulate);
  simulate->add_option("--frames-dir", frames_dir, "output frame directory");

  auto* extract = app.add_subcommand("extract", "registration + channel extraction");
  add_common(extract, false);
  extract->add_option("--frames", frames_dir, "frame directory")->required();
  extract->add_option("--out,-o", out, "output channels CSV");

  auto* recover = app.add_subcommand("recover", "preprocess channels and assemble audio");
  add_common(recover);
  recover->add_option("--channels", channels_csv, "channels CSV")->required();
  recover->add_option("--out,-o", out, "output WAV path");

  auto* defend = app.add_subcommand("defend", "run the configured defense sweep");
  add_common(defend);
  defend->add_option("--out,-o", out, "output CSV path");

  auto* measure = app.add_subcommand("measure", "metrics on a WAV or channels CSV");
  add_common(measure);
  measure->add_option("--in,-i", input, "input signal (.wav or channels .csv)")->required();
  measure->add_option("--out,-o", out, "output report path");
  measure->add_option("--true-duration", true_duration, "true tone duration for eta_cap");

  auto* pipeline = app.add_subcommand("pipeline", "synth + simulate + extract + recover + measure");
  add_common(pipeline);

  auto* sweep = app.add_subcommand("sweep", "parameter sweep");
  add_common(sweep);
  sweep->add_option("--axis", axis, "resolution | spl | distance | sample-rate")->required();
  sweep->add_option("--values", values, "sweep values (axis units)");
  sweep->add_option("--out,-o", out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(common, out);
    if (simulate->parsed()) return cmd_simulate(common, frames_dir);
    if (extract->parsed()) return cmd_extract(common, frames_dir, out);
    if (recover->parsed()) return cmd_recover(common, channels_csv, out);
    if (defend->parsed()) return cmd_defend(common, out);
    if (measure->parsed()) return cmd_measure(common, input, out, true_duration);
    if (pipeline->parsed()) return cmd_pipeline(common);
    if (sweep->parsed()) return cmd_sweep(common, axis, values, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
