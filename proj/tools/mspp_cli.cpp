// Command-line front end: enhance / mix / eval / batch / synth / spectrogram.
// Exit codes: 0 success, 2 usage, 3 I/O, 4 numeric or contract violation.
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mspp/errors.hpp"
#include "mspp/pipeline.hpp"

namespace {

void apply_overrides(mspp::EnhancementParams& params,
                     const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw mspp::contract_error("--set expects key=value, got '" + kv + "'");
    mspp::apply_param_override(params, kv.substr(0, eq), kv.substr(eq + 1));
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw mspp::io_error("cannot create " + path);
  f << text;
  if (!f) throw mspp::io_error("write failed: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "speech enhancer: spectral subtraction with a cross-term corrected "
      "magnitude step, then presence-weighted phase compensation"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON parameter file");
  app.add_option("--set", overrides,
                 "override one parameter as key=value (repeatable)");

  // enhance
  auto* c_enh = app.add_subcommand("enhance", "denoise a WAV file");
  std::string enh_in, enh_out, enh_mode = "mspp", enh_clean, enh_report;
  std::optional<double> enh_rho;
  bool enh_timing = false;
  int enh_segframe = 160;
  c_enh->add_option("input", enh_in, "noisy input WAV")->required();
  c_enh->add_option("output", enh_out, "enhanced output WAV")->required();
  c_enh->add_option("--mode", enh_mode, "mspp | m-only | p-only | ss-baseline")
      ->capture_default_str();
  c_enh->add_option("--rho", enh_rho,
                    "constant rho in [0,1] instead of the probabilistic one "
                    "(p-only mode)");
  c_enh->add_option("--clean", enh_clean, "clean reference WAV for metrics");
  c_enh->add_option("--report", enh_report, "write the run manifest JSON here");
  c_enh->add_flag("--timing", enh_timing,
                  "include per-stage timing in the manifest and print it");
  c_enh->add_option("--segsnr-frame", enh_segframe,
                    "segmental-SNR frame length in samples")
      ->capture_default_str();

  // mix
  auto* c_mix = app.add_subcommand("mix", "add noise to clean speech at an exact SNR");
  std::string mix_clean, mix_noise, mix_out, mix_report;
  double mix_snr = 0.0;
  c_mix->add_option("clean", mix_clean, "clean WAV")->required();
  c_mix->add_option("noise", mix_noise, "noise WAV (at least as long)")->required();
  c_mix->add_option("output", mix_out, "noisy output WAV")->required();
  c_mix->add_option("--snr", mix_snr, "target SNR in dB")->required();
  c_mix->add_option("--report", mix_report, "write the run manifest JSON here");

  // eval
  auto* c_eval = app.add_subcommand("eval", "score enhanced speech against a clean reference");
  std::string ev_clean, ev_noisy, ev_enh, ev_report;
  int ev_segframe = 160;
  c_eval->add_option("clean", ev_clean, "clean WAV")->required();
  c_eval->add_option("noisy", ev_noisy, "noisy WAV")->required();
  c_eval->add_option("enhanced", ev_enh, "enhanced WAV")->required();
  c_eval->add_option("--report", ev_report,
                     "write the key-value report here instead of stdout");
  c_eval->add_option("--segsnr-frame", ev_segframe,
                     "segmental-SNR frame length in samples")
      ->capture_default_str();

  // batch
  auto* c_batch = app.add_subcommand(
      "batch", "run the mix/enhance/eval grid from a JSON manifest");
  std::string batch_manifest;
  c_batch->add_option("manifest", batch_manifest, "batch manifest JSON")->required();

  // synth
  auto* c_synth = app.add_subcommand("synth", "generate a deterministic test signal");
  std::string sy_out, sy_kind = "speech";
  unsigned sy_seed = 1;
  double sy_duration = 2.0;
  int sy_rate = 8000;
  c_synth->add_option("output", sy_out, "output WAV")->required();
  c_synth->add_option("--kind", sy_kind, "speech | white")
      ->check(CLI::IsMember({"speech", "white"}))
      ->capture_default_str();
  c_synth->add_option("--seed", sy_seed, "RNG seed")->capture_default_str();
  c_synth->add_option("--duration", sy_duration, "length in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_synth->add_option("--rate", sy_rate, "sample rate in Hz")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // spectrogram
  auto* c_spec = app.add_subcommand("spectrogram", "export a magnitude spectrogram");
  std::string sp_in, sp_out, sp_format = "csv", sp_window = "hamming";
  int sp_frame = 100, sp_hop = 50;
  c_spec->add_option("input", sp_in, "input WAV")->required();
  c_spec->add_option("output", sp_out, "output file")->required();
  c_spec->add_option("--format", sp_format, "csv | pgm")
      ->check(CLI::IsMember({"csv", "pgm"}))
      ->capture_default_str();
  c_spec->add_option("--window", sp_window,
                     "hamming | modified_hanning | rectangular")
      ->capture_default_str();
  c_spec->add_option("--frame-len", sp_frame, "frame length in samples")
      ->capture_default_str();
  c_spec->add_option("--hop", sp_hop, "hop size in samples")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    mspp::EnhancementParams params;
    if (!config_path.empty()) params = mspp::load_params_json(config_path);
    apply_overrides(params, overrides);
    params.validate();

    if (*c_enh) {
      if (enh_rho && enh_mode != "p-only") {
        std::fprintf(stderr, "error: --rho requires --mode p-only\n");
        return 2;
      }
      const mspp::RunManifest man =
          mspp::enhance(enh_in, enh_out, params, mspp::mode_from_string(enh_mode),
                        enh_rho, enh_clean, enh_segframe);
      if (man.metrics) std::fputs(mspp::format_eval_report(*man.metrics).c_str(), stdout);
      if (!enh_report.empty()) write_text(enh_report, man.to_json(enh_timing));
      if (enh_timing)
        for (const auto& [stage, t] : man.timing_ms)
          std::fprintf(stderr, "%s: %.1f ms\n", stage.c_str(), t);
    } else if (*c_mix) {
      const mspp::RunManifest man = mspp::mix(mix_clean, mix_noise, mix_snr, mix_out);
      if (!mix_report.empty()) write_text(mix_report, man.to_json());
    } else if (*c_eval) {
      mspp::eval_files(ev_clean, ev_noisy, ev_enh, ev_report, ev_segframe);
    } else if (*c_batch) {
      mspp::run_batch_file(batch_manifest);
    } else if (*c_synth) {
      const mspp::SampleBuffer buf =
          sy_kind == "white"
              ? mspp::synth_white_noise(sy_seed, sy_duration, sy_rate)
              : mspp::synth_speech_like(sy_seed, sy_duration, sy_rate);
      mspp::write_wav(buf, sy_out);
    } else if (*c_spec) {
      const mspp::SampleBuffer buf = mspp::read_wav(sp_in);
      const mspp::StftConfig cfg{mspp::window_kind_from_string(sp_window),
                                 sp_frame, sp_hop};
      if (cfg.frame_len < 2 || cfg.hop < 1 || cfg.hop > cfg.frame_len)
        throw mspp::contract_error("spectrogram: need frame-len >= 2 and 0 < hop <= frame-len");
      mspp::spectrogram_export(buf, cfg, sp_out,
                               sp_format == "pgm" ? mspp::SpectrogramFormat::pgm
                                                  : mspp::SpectrogramFormat::csv);
    }
    return 0;
  } catch (const mspp::io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const mspp::contract_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
