#include "mspp/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <utility>

#include <json.hpp>

#include "mspp/errors.hpp"

namespace mspp {

using nlohmann::json;

void EnhancementParams::validate() const {
  if (!(mu > 0.0)) throw contract_error("params: mu must be > 0");
  if (!(xi_min > 0.0 && xi_min < xi_max))
    throw contract_error("params: need 0 < xi_min < xi_max");
  if (!(xi_peak > 0.0)) throw contract_error("params: xi_peak must be > 0");
  if (!(alpha_xi > 0.0 && alpha_xi < 1.0))
    throw contract_error("params: alpha_xi must be in (0, 1)");
  if (w_local < 0 || w_global <= w_local)
    throw contract_error("params: need 0 <= w_local < w_global");
  if (!(noise_beta > 0.0 && noise_beta < 1.0))
    throw contract_error("params: noise_beta must be in (0, 1)");
  if (init_frame_count < 1)
    throw contract_error("params: init_frame_count must be >= 1");
  for (const StftConfig* c : {&m_config, &p_config}) {
    if (c->frame_len < 2) throw contract_error("params: frame_len must be >= 2");
    if (c->hop < 1 || c->hop > c->frame_len)
      throw contract_error("params: need 0 < hop <= frame_len");
  }
}

EnhanceMode mode_from_string(const std::string& name) {
  if (name == "mspp") return EnhanceMode::mspp;
  if (name == "m-only") return EnhanceMode::m_only;
  if (name == "p-only") return EnhanceMode::p_only;
  if (name == "ss-baseline") return EnhanceMode::ss_baseline;
  throw contract_error("unknown mode: " + name);
}

std::string to_string(EnhanceMode mode) {
  switch (mode) {
    case EnhanceMode::mspp: return "mspp";
    case EnhanceMode::m_only: return "m-only";
    case EnhanceMode::p_only: return "p-only";
    case EnhanceMode::ss_baseline: return "ss-baseline";
  }
  throw contract_error("unknown mode value");
}

namespace {

double to_db(double ratio) { return 10.0 * std::log10(ratio); }

json params_to_json(const EnhancementParams& p) {
  json j;
  j["mu"] = p.mu;
  j["xi_min_db"] = to_db(p.xi_min);
  j["xi_max_db"] = to_db(p.xi_max);
  j["xi_peak_db"] = to_db(p.xi_peak);
  j["w_local"] = p.w_local;
  j["w_global"] = p.w_global;
  j["alpha_xi"] = p.alpha_xi;
  j["vad_threshold_db"] = p.vad_threshold_db;
  j["noise_beta"] = p.noise_beta;
  j["init_frame_count"] = p.init_frame_count;
  j["m_window"] = to_string(p.m_config.window_kind);
  j["m_frame_len"] = p.m_config.frame_len;
  j["m_hop"] = p.m_config.hop;
  j["p_window"] = to_string(p.p_config.window_kind);
  j["p_frame_len"] = p.p_config.frame_len;
  j["p_hop"] = p.p_config.hop;
  return j;
}

// Single point of truth for config keys, shared by the JSON loader and
// --set overrides. dB-valued keys are converted to linear ratios here.
void set_param(EnhancementParams& p, const std::string& key, const json& v) {
  auto num = [&]() -> double {
    if (!v.is_number())
      throw contract_error("config key " + key + " expects a number");
    return v.get<double>();
  };
  auto integer = [&]() -> int {
    if (!v.is_number_integer())
      throw contract_error("config key " + key + " expects an integer");
    return v.get<int>();
  };
  auto str = [&]() -> std::string {
    if (!v.is_string())
      throw contract_error("config key " + key + " expects a string");
    return v.get<std::string>();
  };

  if (key == "mu") p.mu = num();
  else if (key == "xi_min_db") p.xi_min = std::pow(10.0, num() / 10.0);
  else if (key == "xi_max_db") p.xi_max = std::pow(10.0, num() / 10.0);
  else if (key == "xi_peak_db") p.xi_peak = std::pow(10.0, num() / 10.0);
  else if (key == "w_local") p.w_local = integer();
  else if (key == "w_global") p.w_global = integer();
  else if (key == "alpha_xi") p.alpha_xi = num();
  else if (key == "vad_threshold_db") p.vad_threshold_db = num();
  else if (key == "noise_beta") p.noise_beta = num();
  else if (key == "init_frame_count") p.init_frame_count = integer();
  else if (key == "m_window") p.m_config.window_kind = window_kind_from_string(str());
  else if (key == "m_frame_len") p.m_config.frame_len = integer();
  else if (key == "m_hop") p.m_config.hop = integer();
  else if (key == "p_window") p.p_config.window_kind = window_kind_from_string(str());
  else if (key == "p_frame_len") p.p_config.frame_len = integer();
  else if (key == "p_hop") p.p_config.hop = integer();
  else throw contract_error("unknown config key: " + key);
}

json parse_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open " + path);
  json j = json::parse(f, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw io_error("malformed JSON in " + path);
  return j;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double speech_ratio(const std::vector<VadDecision>& track) {
  if (track.empty()) return 0.0;
  size_t n = 0;
  for (const VadDecision& d : track) n += d.is_speech ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(track.size());
}

struct ParsedMode {
  EnhanceMode mode;
  std::optional<double> rho;
  std::string file_label;  // filename-safe variant of the mode string
};

// Batch mode strings: the four mode names, plus "p-only@<rho>" for the
// constant-rho phase-only reference.
ParsedMode parse_mode_string(const std::string& s) {
  const std::string tag = "p-only@";
  if (s.rfind(tag, 0) == 0) {
    const std::string num = s.substr(tag.size());
    try {
      size_t pos = 0;
      const double r = std::stod(num, &pos);
      if (pos != num.size()) throw std::invalid_argument(num);
      return {EnhanceMode::p_only, r, "p-only-rho" + num};
    } catch (const contract_error&) {
      throw;
    } catch (const std::exception&) {
      throw contract_error("bad constant-rho mode string: " + s);
    }
  }
  return {mode_from_string(s), std::nullopt, s};
}

}  // namespace

std::string RunManifest::to_json(bool include_timing) const {
  json j;
  j["command"] = command;
  j["input"] = input_path;
  j["output"] = output_path;
  if (!noise_path.empty()) j["noise"] = noise_path;
  if (!clean_path.empty()) j["clean"] = clean_path;
  if (!mode.empty()) j["mode"] = mode;
  j["params"] = params_to_json(params);
  if (rho_const) j["rho_const"] = *rho_const;
  if (vad_speech_ratio) j["vad_speech_ratio"] = *vad_speech_ratio;
  if (command == "enhance") {
    j["rectified_bins"] = rectified_bins;
    j["max_imag_rel"] = max_imag_rel;
  }
  if (snr_db) j["snr_db"] = *snr_db;
  if (noise_scale) j["noise_scale"] = *noise_scale;
  if (metrics) {
    json m;
    m["input_snr_db"] = metrics->input_snr_db;
    m["snrseg_improvement_db"] = metrics->snrseg_improvement_db;
    m["overall_snr_improvement_db"] = metrics->overall_snr_improvement_db;
    m["pesq"] = nullptr;  // slot for an externally computed score
    j["metrics"] = m;
  }
  if (include_timing && !timing_ms.empty()) {
    json t;
    for (const auto& [k, v] : timing_ms) t[k] = v;
    j["timing_ms"] = t;
  }
  return j.dump(2) + "\n";
}

EnhanceOutcome enhance_buffer(const SampleBuffer& noisy,
                              const EnhancementParams& params, EnhanceMode mode,
                              std::optional<double> rho_const) {
  params.validate();
  if (rho_const && mode != EnhanceMode::p_only)
    throw contract_error("constant rho only applies to p-only mode");

  EnhanceOutcome out;
  out.manifest.command = "enhance";
  out.manifest.mode = to_string(mode);
  out.manifest.params = params;
  out.manifest.rho_const = rho_const;

  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  const auto t0 = clock::now();

  switch (mode) {
    case EnhanceMode::mspp: {
      MStepResult m = run_m_step(noisy, params, MagGainPolicy::mss);
      const auto t1 = clock::now();
      PStepResult p = run_p_step(m.intermediate, params, PStepMode::prob());
      out.manifest.timing_ms["m_step"] = ms(t0, t1);
      out.manifest.timing_ms["p_step"] = ms(t1, clock::now());
      out.manifest.vad_speech_ratio = speech_ratio(m.vad_track);
      out.manifest.rectified_bins = m.rectified_bins;
      out.manifest.max_imag_rel = std::max(m.max_imag_rel, p.max_imag_rel);
      out.enhanced = std::move(p.enhanced);
      break;
    }
    case EnhanceMode::m_only:
    case EnhanceMode::ss_baseline: {
      const MagGainPolicy policy = mode == EnhanceMode::ss_baseline
                                       ? MagGainPolicy::classical_rectified
                                       : MagGainPolicy::mss;
      MStepResult m = run_m_step(noisy, params, policy);
      out.manifest.timing_ms["m_step"] = ms(t0, clock::now());
      out.manifest.vad_speech_ratio = speech_ratio(m.vad_track);
      out.manifest.rectified_bins = m.rectified_bins;
      out.manifest.max_imag_rel = m.max_imag_rel;
      out.enhanced = std::move(m.intermediate);
      break;
    }
    case EnhanceMode::p_only: {
      const PStepMode pm =
          rho_const ? PStepMode::constant(*rho_const) : PStepMode::prob();
      PStepResult p = run_p_step(noisy, params, pm);
      out.manifest.timing_ms["p_step"] = ms(t0, clock::now());
      out.manifest.max_imag_rel = p.max_imag_rel;
      out.enhanced = std::move(p.enhanced);
      break;
    }
  }
  out.manifest.timing_ms["total"] = ms(t0, clock::now());
  return out;
}

RunManifest enhance(const std::string& noisy_path, const std::string& out_path,
                    const EnhancementParams& params, EnhanceMode mode,
                    std::optional<double> rho_const,
                    const std::string& clean_path, int segsnr_frame_len) {
  const SampleBuffer noisy = read_wav(noisy_path);

  SampleBuffer clean;
  if (!clean_path.empty()) {
    clean = read_wav(clean_path);
    if (clean.size() != noisy.size())
      throw contract_error("length mismatch: " + clean_path + " has " +
                           std::to_string(clean.size()) + " samples, " +
                           noisy_path + " has " + std::to_string(noisy.size()));
    if (clean.sample_rate_hz != noisy.sample_rate_hz)
      throw contract_error("sample-rate mismatch: " + clean_path + " vs " +
                           noisy_path);
  }

  EnhanceOutcome oc = enhance_buffer(noisy, params, mode, rho_const);
  oc.manifest.input_path = noisy_path;
  oc.manifest.output_path = out_path;
  oc.manifest.clean_path = clean_path;
  if (!clean_path.empty())
    oc.manifest.metrics = improvement(clean, noisy, oc.enhanced, segsnr_frame_len);
  write_wav(oc.enhanced, out_path);
  return oc.manifest;
}

RunManifest mix(const std::string& clean_path, const std::string& noise_path,
                double snr_db, const std::string& out_path) {
  const SampleBuffer clean = read_wav(clean_path);
  const SampleBuffer noise = read_wav(noise_path);
  const MixResult r = mix_at_snr(clean, noise, snr_db);
  write_wav(r.noisy, out_path);

  RunManifest m;
  m.command = "mix";
  m.input_path = clean_path;
  m.noise_path = noise_path;
  m.output_path = out_path;
  m.snr_db = snr_db;
  m.noise_scale = r.noise_scale;
  return m;
}

std::string format_eval_report(const EvalReport& report) {
  std::string out;
  out += "input_snr_db = " + fmt("%.10g", report.input_snr_db) + "\n";
  out += "snrseg_improvement_db = " + fmt("%.10g", report.snrseg_improvement_db) + "\n";
  out += "overall_snr_improvement_db = " +
         fmt("%.10g", report.overall_snr_improvement_db) + "\n";
  out += "pesq = n/a\n";  // slot for an externally computed score
  return out;
}

EvalReport eval_files(const std::string& clean_path, const std::string& noisy_path,
                      const std::string& enhanced_path,
                      const std::string& report_path, int segsnr_frame_len) {
  const SampleBuffer clean = read_wav(clean_path);
  const SampleBuffer noisy = read_wav(noisy_path);
  const SampleBuffer enhanced = read_wav(enhanced_path);

  auto check = [&](const SampleBuffer& b, const std::string& path) {
    if (b.size() != clean.size())
      throw contract_error("length mismatch: " + path + " has " +
                           std::to_string(b.size()) + " samples, expected " +
                           std::to_string(clean.size()) + " (" + clean_path + ")");
    if (b.sample_rate_hz != clean.sample_rate_hz)
      throw contract_error("sample-rate mismatch: " + path + " vs " + clean_path);
  };
  check(noisy, noisy_path);
  check(enhanced, enhanced_path);

  const EvalReport r = improvement(clean, noisy, enhanced, segsnr_frame_len);
  const std::string text = format_eval_report(r);
  if (report_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(report_path);
    if (!f) throw io_error("cannot create " + report_path);
    f << text;
    if (!f) throw io_error("write failed: " + report_path);
  }
  return r;
}

EnhancementParams load_params_json(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.is_object()) throw io_error(path + ": expected a JSON object");
  EnhancementParams p;
  for (const auto& [key, value] : j.items()) set_param(p, key, value);
  p.validate();
  return p;
}

void apply_param_override(EnhancementParams& params, const std::string& key,
                          const std::string& value) {
  if (key == "m_window" || key == "p_window") {
    set_param(params, key, json(value));
    return;
  }
  const json v = json::parse(value, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded() || !v.is_number())
    throw contract_error("config key " + key + " expects a numeric value, got '" +
                         value + "'");
  set_param(params, key, v);
}

BatchSpec load_batch_spec(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.is_object()) throw io_error(path + ": expected a JSON object");

  BatchSpec s;
  bool have_clean = false, have_noise = false, have_snr = false,
       have_modes = false, have_out = false;

  for (const auto& [key, value] : j.items()) {
    if (key == "clean") {
      if (!value.is_array())
        throw contract_error("batch manifest: clean must be an array of paths");
      for (const auto& e : value) s.clean.push_back(e.get<std::string>());
      have_clean = true;
    } else if (key == "noise") {
      s.noise = value.get<std::string>();
      have_noise = true;
    } else if (key == "snr_db") {
      if (!value.is_array())
        throw contract_error("batch manifest: snr_db must be an array");
      for (const auto& e : value) s.snr_db.push_back(e.get<double>());
      have_snr = true;
    } else if (key == "modes") {
      if (!value.is_array())
        throw contract_error("batch manifest: modes must be an array");
      for (const auto& e : value) s.modes.push_back(e.get<std::string>());
      have_modes = true;
    } else if (key == "out_dir") {
      s.out_dir = value.get<std::string>();
      have_out = true;
    } else if (key == "segsnr_frame_len") {
      s.segsnr_frame_len = value.get<int>();
    } else if (key == "params") {
      if (!value.is_object())
        throw contract_error("batch manifest: params must be an object");
      for (const auto& [pk, pv] : value.items()) set_param(s.params, pk, pv);
    } else {
      throw contract_error("batch manifest: unknown key: " + key);
    }
  }

  if (!have_clean || s.clean.empty())
    throw contract_error("batch manifest: need a non-empty clean list");
  if (!have_noise) throw contract_error("batch manifest: missing noise");
  if (!have_snr || s.snr_db.empty())
    throw contract_error("batch manifest: need a non-empty snr_db list");
  if (!have_modes || s.modes.empty())
    throw contract_error("batch manifest: need a non-empty modes list");
  if (!have_out) throw contract_error("batch manifest: missing out_dir");
  return s;
}

void run_batch(const BatchSpec& spec) {
  namespace fs = std::filesystem;
  spec.params.validate();
  for (const std::string& m : spec.modes) parse_mode_string(m);  // fail fast

  std::set<std::string> stems;
  for (const std::string& c : spec.clean) {
    const std::string stem = fs::path(c).stem().string();
    if (!stems.insert(stem).second)
      throw contract_error("batch manifest: duplicate clean stem: " + stem);
  }

  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec) throw io_error("cannot create " + spec.out_dir + ": " + ec.message());

  const fs::path out_dir(spec.out_dir);
  std::ofstream results(out_dir / "results.csv");
  if (!results) throw io_error("cannot create results.csv in " + spec.out_dir);
  results << "clean,noise,snr_db,mode,input_snr_db,snrseg_improvement_db,"
             "overall_snr_improvement_db,rectified_bins\n";

  // mean SegSNR improvement per (snr, mode) cell, accumulated over clean files
  std::vector<std::vector<double>> cell_sum(
      spec.snr_db.size(), std::vector<double>(spec.modes.size(), 0.0));

  for (const std::string& clean_path : spec.clean) {
    const std::string stem = fs::path(clean_path).stem().string();
    for (size_t si = 0; si < spec.snr_db.size(); ++si) {
      const double snr = spec.snr_db[si];
      const std::string tag = stem + "_snr" + fmt("%g", snr);
      const fs::path noisy_path = out_dir / (tag + ".wav");
      mix(clean_path, spec.noise, snr, noisy_path.string());

      for (size_t mi = 0; mi < spec.modes.size(); ++mi) {
        const ParsedMode pm = parse_mode_string(spec.modes[mi]);
        const fs::path enh_path = out_dir / (tag + "_" + pm.file_label + ".wav");
        const RunManifest man =
            enhance(noisy_path.string(), enh_path.string(), spec.params, pm.mode,
                    pm.rho, clean_path, spec.segsnr_frame_len);
        const EvalReport& r = *man.metrics;
        results << clean_path << ',' << spec.noise << ',' << fmt("%.6g", snr)
                << ',' << spec.modes[mi] << ',' << fmt("%.6g", r.input_snr_db)
                << ',' << fmt("%.6g", r.snrseg_improvement_db) << ','
                << fmt("%.6g", r.overall_snr_improvement_db) << ','
                << man.rectified_bins << '\n';
        cell_sum[si][mi] += r.snrseg_improvement_db;
      }
    }
  }
  if (!results) throw io_error("write failed: results.csv");
  results.close();

  std::ofstream summary(out_dir / "summary.csv");
  if (!summary) throw io_error("cannot create summary.csv in " + spec.out_dir);
  summary << "snr_db";
  for (const std::string& m : spec.modes) summary << ',' << m;
  summary << '\n';
  const double n_clean = static_cast<double>(spec.clean.size());
  for (size_t si = 0; si < spec.snr_db.size(); ++si) {
    summary << fmt("%.6g", spec.snr_db[si]);
    for (size_t mi = 0; mi < spec.modes.size(); ++mi)
      summary << ',' << fmt("%.6g", cell_sum[si][mi] / n_clean);
    summary << '\n';
  }
  if (!summary) throw io_error("write failed: summary.csv");
}

void run_batch_file(const std::string& manifest_path) {
  run_batch(load_batch_spec(manifest_path));
}

}  // namespace mspp
