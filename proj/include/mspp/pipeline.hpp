#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mspp/m_step.hpp"
#include "mspp/metrics.hpp"
#include "mspp/p_step.hpp"

namespace mspp {

enum class EnhanceMode {
  mspp,         // magnitude step then phase step (the full method)
  m_only,       // magnitude step alone
  p_only,       // phase step applied directly to the noisy input
  ss_baseline,  // classical rectified spectral subtraction (reference)
};

EnhanceMode mode_from_string(const std::string& name);
std::string to_string(EnhanceMode mode);

struct RunManifest {
  std::string command;  // "enhance" or "mix"
  std::string input_path;
  std::string output_path;
  std::string noise_path;  // mix only
  std::string clean_path;  // enhance with a clean reference
  std::string mode;
  EnhancementParams params;
  std::optional<double> rho_const;        // constant-rho p-only runs
  std::optional<double> vad_speech_ratio; // modes that run the magnitude step
  long long rectified_bins = 0;
  double max_imag_rel = 0.0;
  std::optional<double> snr_db;       // mix
  std::optional<double> noise_scale;  // mix
  std::optional<EvalReport> metrics;  // enhance with a clean reference
  std::map<std::string, double> timing_ms;

  // Deterministic given identical inputs and params; timing is included only
  // on request so default manifests are byte-stable across runs.
  std::string to_json(bool include_timing = false) const;
};

struct EnhanceOutcome {
  SampleBuffer enhanced;
  RunManifest manifest;
};

// In-memory core shared by the CLI and batch.
EnhanceOutcome enhance_buffer(const SampleBuffer& noisy,
                              const EnhancementParams& params, EnhanceMode mode,
                              std::optional<double> rho_const = {});

RunManifest enhance(const std::string& noisy_path, const std::string& out_path,
                    const EnhancementParams& params, EnhanceMode mode,
                    std::optional<double> rho_const = {},
                    const std::string& clean_path = "",
                    int segsnr_frame_len = 160);

RunManifest mix(const std::string& clean_path, const std::string& noise_path,
                double snr_db, const std::string& out_path);

std::string format_eval_report(const EvalReport& report);

// Writes the key-value report to report_path, or stdout when empty.
EvalReport eval_files(const std::string& clean_path, const std::string& noisy_path,
                      const std::string& enhanced_path,
                      const std::string& report_path = "",
                      int segsnr_frame_len = 160);

struct BatchSpec {
  std::vector<std::string> clean;
  std::string noise;
  std::vector<double> snr_db;
  std::vector<std::string> modes;  // "p-only@<rho>" selects constant rho
  std::string out_dir;
  int segsnr_frame_len = 160;
  EnhancementParams params;
};

BatchSpec load_batch_spec(const std::string& path);

// mix -> enhance -> eval over the full grid. Writes every WAV plus
// results.csv (one row per grid cell) and summary.csv (rows = SNR levels,
// columns = modes, values = mean segmental-SNR improvement).
void run_batch(const BatchSpec& spec);
void run_batch_file(const std::string& manifest_path);

// JSON config mirroring EnhancementParams, dB-valued where the constants are
// conventionally quoted in dB (xi_min_db, xi_max_db, xi_peak_db).
EnhancementParams load_params_json(const std::string& path);
void apply_param_override(EnhancementParams& params, const std::string& key,
                          const std::string& value);

}  // namespace mspp
