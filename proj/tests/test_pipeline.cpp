#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mspp/audio_io.hpp"
#include "mspp/errors.hpp"
#include "mspp/pipeline.hpp"

using namespace mspp;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  REQUIRE(f.good());
  f << text;
}

size_t count_lines(const std::string& text) {
  size_t n = 0;
  for (const char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

SampleBuffer noisy_mix(uint32_t seed, double snr_db, double dur) {
  const SampleBuffer clean = synth_speech_like(seed, dur);
  const SampleBuffer noise = synth_white_noise(100 + seed, dur);
  return mix_at_snr(clean, noise, snr_db).noisy;
}

}  // namespace

TEST_CASE("mode names round trip") {
  for (const std::string name : {"mspp", "m-only", "p-only", "ss-baseline"})
    CHECK(to_string(mode_from_string(name)) == name);
  CHECK_THROWS_AS(mode_from_string("wiener"), contract_error);
  CHECK_THROWS_AS(mode_from_string(""), contract_error);
}

TEST_CASE("parameter validation rejects each kind of nonsense") {
  const EnhancementParams good;
  CHECK_NOTHROW(good.validate());

  const auto broken = [&](auto&& poke) {
    EnhancementParams p;
    poke(p);
    return p;
  };

  CHECK_THROWS_AS(broken([](auto& p) { p.mu = 0.0; }).validate(), contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.xi_min = 0.0; }).validate(), contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.xi_max = p.xi_min; }).validate(),
                  contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.xi_peak = -1.0; }).validate(),
                  contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.alpha_xi = 0.0; }).validate(),
                  contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.alpha_xi = 1.0; }).validate(),
                  contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.w_local = -1; }).validate(), contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.w_global = p.w_local; }).validate(),
                  contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.noise_beta = 1.0; }).validate(),
                  contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.init_frame_count = 0; }).validate(),
                  contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.m_config.frame_len = 1; }).validate(),
                  contract_error);
  CHECK_THROWS_AS(broken([](auto& p) { p.p_config.hop = 0; }).validate(),
                  contract_error);
  CHECK_THROWS_AS(
      broken([](auto& p) { p.p_config.hop = p.p_config.frame_len + 1; }).validate(),
      contract_error);
}

TEST_CASE("apply_param_override") {
  EnhancementParams p;

  apply_param_override(p, "mu", "0.8");
  CHECK(p.mu == 0.8);

  apply_param_override(p, "w_local", "2");
  CHECK(p.w_local == 2);

  apply_param_override(p, "xi_min_db", "-20");
  CHECK(p.xi_min == std::pow(10.0, -2.0));

  apply_param_override(p, "m_window", "rectangular");
  CHECK(p.m_config.window_kind == WindowKind::rectangular);

  CHECK_THROWS_WITH_AS(apply_param_override(p, "bogus", "1"),
                       doctest::Contains("unknown config key"), contract_error);
  CHECK_THROWS_AS(apply_param_override(p, "mu", "abc"), contract_error);
  CHECK_THROWS_AS(apply_param_override(p, "w_local", "2.5"), contract_error);
  CHECK_THROWS_AS(apply_param_override(p, "m_window", "blackman"), contract_error);
}

TEST_CASE("load_params_json") {
  SUBCASE("partial configs override just the named keys") {
    spit("tmp_pipe_params.json",
         "{\"mu\": 0.7, \"xi_min_db\": -12.0, \"w_global\": 20}\n");
    const EnhancementParams p = load_params_json("tmp_pipe_params.json");
    CHECK(p.mu == 0.7);
    CHECK(p.xi_min == std::pow(10.0, -1.2));
    CHECK(p.w_global == 20);
    CHECK(p.alpha_xi == 0.7);  // untouched default
  }

  SUBCASE("dB values land exactly on the defaults they mirror") {
    spit("tmp_pipe_params_db.json", "{\"xi_min_db\": -10.0}\n");
    const EnhancementParams p = load_params_json("tmp_pipe_params_db.json");
    CHECK(p.xi_min == EnhancementParams{}.xi_min);
  }

  SUBCASE("bad files and bad keys") {
    CHECK_THROWS_AS(load_params_json("tmp_pipe_params_missing.json"), io_error);
    spit("tmp_pipe_params_bad.json", "{ not json");
    CHECK_THROWS_AS(load_params_json("tmp_pipe_params_bad.json"), io_error);
    spit("tmp_pipe_params_arr.json", "[1, 2]\n");
    CHECK_THROWS_AS(load_params_json("tmp_pipe_params_arr.json"), io_error);
    spit("tmp_pipe_params_unknown.json", "{\"frobnicate\": 1}\n");
    CHECK_THROWS_WITH_AS(load_params_json("tmp_pipe_params_unknown.json"),
                         doctest::Contains("unknown config key"), contract_error);
    spit("tmp_pipe_params_invalid.json", "{\"mu\": -1.0}\n");
    CHECK_THROWS_AS(load_params_json("tmp_pipe_params_invalid.json"),
                    contract_error);
    spit("tmp_pipe_params_type.json", "{\"w_local\": 1.5}\n");
    CHECK_THROWS_AS(load_params_json("tmp_pipe_params_type.json"), contract_error);
  }
}

TEST_CASE("enhance_buffer") {
  const EnhancementParams params;

  SUBCASE("magnitude-only on silence returns silence") {
    SampleBuffer z;
    z.samples.assign(2000, 0.0);
    const EnhanceOutcome oc = enhance_buffer(z, params, EnhanceMode::m_only);
    REQUIRE(oc.enhanced.size() == 2000);
    for (const double v : oc.enhanced.samples) REQUIRE(std::fabs(v) <= 1e-12);
    CHECK(oc.manifest.rectified_bins == 0);
  }

  SUBCASE("full pipeline on a noisy mix") {
    const SampleBuffer noisy = noisy_mix(3, 0.0, 1.0);
    const EnhanceOutcome oc = enhance_buffer(noisy, params, EnhanceMode::mspp);
    REQUIRE(oc.enhanced.size() == noisy.size());
    for (const double v : oc.enhanced.samples) REQUIRE(std::isfinite(v));
    CHECK(oc.manifest.mode == "mspp");
    CHECK(oc.manifest.rectified_bins == 0);
    CHECK(oc.manifest.max_imag_rel < 1e-9);
    REQUIRE(oc.manifest.vad_speech_ratio.has_value());
    CHECK(*oc.manifest.vad_speech_ratio >= 0.0);
    CHECK(*oc.manifest.vad_speech_ratio <= 1.0);
    CHECK(oc.manifest.timing_ms.count("m_step") == 1);
    CHECK(oc.manifest.timing_ms.count("p_step") == 1);
    CHECK(oc.manifest.timing_ms.count("total") == 1);
  }

  SUBCASE("the rectified baseline clips bins, the default gain does not") {
    const SampleBuffer noisy = noisy_mix(3, 0.0, 1.0);
    const EnhanceOutcome base =
        enhance_buffer(noisy, params, EnhanceMode::ss_baseline);
    const EnhanceOutcome mss = enhance_buffer(noisy, params, EnhanceMode::mspp);
    CHECK(base.manifest.rectified_bins > 0);
    CHECK(mss.manifest.rectified_bins == 0);
  }

  SUBCASE("phase-only with a pinned rho") {
    const SampleBuffer noisy = noisy_mix(4, 5.0, 0.5);
    const EnhanceOutcome oc =
        enhance_buffer(noisy, params, EnhanceMode::p_only, 0.5);
    REQUIRE(oc.enhanced.size() == noisy.size());
    REQUIRE(oc.manifest.rho_const.has_value());
    CHECK(*oc.manifest.rho_const == 0.5);
    CHECK(!oc.manifest.vad_speech_ratio.has_value());
    CHECK(oc.manifest.timing_ms.count("p_step") == 1);
    CHECK(oc.manifest.timing_ms.count("m_step") == 0);
  }

  SUBCASE("a pinned rho outside phase-only mode is a contract violation") {
    const SampleBuffer noisy = noisy_mix(4, 5.0, 0.5);
    CHECK_THROWS_WITH_AS(enhance_buffer(noisy, params, EnhanceMode::mspp, 0.5),
                         doctest::Contains("constant rho"), contract_error);
  }
}

TEST_CASE("run manifests serialize deterministically") {
  const SampleBuffer noisy = noisy_mix(6, 0.0, 0.5);
  const EnhancementParams params;
  const EnhanceOutcome a = enhance_buffer(noisy, params, EnhanceMode::mspp);
  const EnhanceOutcome b = enhance_buffer(noisy, params, EnhanceMode::mspp);

  SUBCASE("identical runs give identical JSON, timing only on request") {
    CHECK(a.manifest.to_json() == b.manifest.to_json());
    CHECK(a.manifest.to_json().find("timing_ms") == std::string::npos);
    CHECK(a.manifest.to_json(true).find("timing_ms") != std::string::npos);
  }

  SUBCASE("the JSON carries the run description") {
    const json j = json::parse(a.manifest.to_json());
    CHECK(j.at("command") == "enhance");
    CHECK(j.at("mode") == "mspp");
    CHECK(j.at("rectified_bins").get<long long>() == 0);
    CHECK(j.contains("vad_speech_ratio"));
    CHECK(!j.contains("metrics"));
    CHECK(!j.contains("rho_const"));
    CHECK(j.at("params").at("mu") == 0.6);
    CHECK(j.at("params").at("xi_min_db") == -10.0);
    CHECK(j.at("params").at("m_window") == "hamming");
    CHECK(j.at("params").at("p_frame_len") == 256);
  }
}

TEST_CASE("mix command") {
  const SampleBuffer clean = synth_speech_like(5, 0.5);
  write_wav(clean, "tmp_pipe_clean.wav");

  SUBCASE("mixing a file with itself at 0 dB records unit noise scale") {
    const RunManifest m =
        mix("tmp_pipe_clean.wav", "tmp_pipe_clean.wav", 0.0, "tmp_pipe_mix.wav");
    CHECK(m.command == "mix");
    REQUIRE(m.noise_scale.has_value());
    CHECK(*m.noise_scale == 1.0);
    REQUIRE(m.snr_db.has_value());
    CHECK(*m.snr_db == 0.0);
    CHECK(read_wav("tmp_pipe_mix.wav").size() == clean.size());

    const json j = json::parse(m.to_json());
    CHECK(j.at("command") == "mix");
    CHECK(j.at("noise") == "tmp_pipe_clean.wav");
    CHECK(j.at("noise_scale") == 1.0);
    CHECK(!j.contains("rectified_bins"));
  }

  SUBCASE("a missing noise file fails before anything is written") {
    std::filesystem::remove("tmp_pipe_mix_err.wav");
    CHECK_THROWS_AS(mix("tmp_pipe_clean.wav", "tmp_pipe_no_such_noise.wav", 0.0,
                        "tmp_pipe_mix_err.wav"),
                    io_error);
    CHECK(!std::filesystem::exists("tmp_pipe_mix_err.wav"));
  }
}

TEST_CASE("eval_files") {
  const SampleBuffer clean = synth_speech_like(8, 0.5);
  write_wav(clean, "tmp_pipe_eval_clean.wav");
  mix("tmp_pipe_eval_clean.wav", "tmp_pipe_eval_clean.wav", 10.0,
      "tmp_pipe_eval_noisy.wav");

  SUBCASE("evaluating the noisy file against itself reports zero gain") {
    const EvalReport r =
        eval_files("tmp_pipe_eval_clean.wav", "tmp_pipe_eval_noisy.wav",
                   "tmp_pipe_eval_noisy.wav", "tmp_pipe_eval_report.txt");
    CHECK(r.snrseg_improvement_db == 0.0);
    CHECK(r.overall_snr_improvement_db == 0.0);

    const std::string text = slurp("tmp_pipe_eval_report.txt");
    CHECK(text.find("input_snr_db = ") != std::string::npos);
    CHECK(text.find("snrseg_improvement_db = 0\n") != std::string::npos);
    CHECK(text.find("overall_snr_improvement_db = 0\n") != std::string::npos);
    CHECK(text.find("pesq = n/a\n") != std::string::npos);
  }

  SUBCASE("a length mismatch names the offending file") {
    write_wav(synth_speech_like(8, 0.25), "tmp_pipe_eval_short.wav");
    CHECK_THROWS_WITH_AS(
        eval_files("tmp_pipe_eval_clean.wav", "tmp_pipe_eval_short.wav",
                   "tmp_pipe_eval_noisy.wav", ""),
        doctest::Contains("tmp_pipe_eval_short.wav"), contract_error);
  }
}

TEST_CASE("batch runs the whole grid") {
  write_wav(synth_speech_like(21, 0.75), "tmp_pipe_batch_clean.wav");
  write_wav(synth_white_noise(121, 1.0), "tmp_pipe_batch_noise.wav");

  const std::string manifest =
      "{\n"
      "  \"clean\": [\"tmp_pipe_batch_clean.wav\"],\n"
      "  \"noise\": \"tmp_pipe_batch_noise.wav\",\n"
      "  \"snr_db\": [0, 5],\n"
      "  \"modes\": [\"m-only\", \"p-only@0.5\"],\n"
      "  \"out_dir\": \"tmp_pipe_batch_out\"\n"
      "}\n";
  spit("tmp_pipe_batch.json", manifest);
  run_batch_file("tmp_pipe_batch.json");

  SUBCASE("results.csv has one row per grid cell") {
    const std::string results = slurp("tmp_pipe_batch_out/results.csv");
    CHECK(count_lines(results) == 5);  // header + 1 clean x 2 snr x 2 modes
    CHECK(results.rfind("clean,noise,snr_db,mode,input_snr_db,"
                        "snrseg_improvement_db,overall_snr_improvement_db,"
                        "rectified_bins\n", 0) == 0);
    CHECK(results.find(",m-only,") != std::string::npos);
    CHECK(results.find(",p-only@0.5,") != std::string::npos);
  }

  SUBCASE("summary.csv averages per SNR level and mode") {
    const std::string summary = slurp("tmp_pipe_batch_out/summary.csv");
    CHECK(count_lines(summary) == 3);  // header + 2 snr rows
    CHECK(summary.rfind("snr_db,m-only,p-only@0.5\n", 0) == 0);
    CHECK(summary.find("\n0,") != std::string::npos);
    CHECK(summary.find("\n5,") != std::string::npos);
  }

  SUBCASE("every mix and every enhancement lands on disk") {
    namespace fs = std::filesystem;
    for (const std::string name :
         {"tmp_pipe_batch_clean_snr0.wav", "tmp_pipe_batch_clean_snr5.wav",
          "tmp_pipe_batch_clean_snr0_m-only.wav",
          "tmp_pipe_batch_clean_snr5_m-only.wav",
          "tmp_pipe_batch_clean_snr0_p-only-rho0.5.wav",
          "tmp_pipe_batch_clean_snr5_p-only-rho0.5.wav"})
      CHECK(fs::exists(fs::path("tmp_pipe_batch_out") / name));
  }

  SUBCASE("a rerun reproduces both tables byte for byte") {
    const std::string results = slurp("tmp_pipe_batch_out/results.csv");
    const std::string summary = slurp("tmp_pipe_batch_out/summary.csv");
    run_batch_file("tmp_pipe_batch.json");
    CHECK(slurp("tmp_pipe_batch_out/results.csv") == results);
    CHECK(slurp("tmp_pipe_batch_out/summary.csv") == summary);
  }
}

TEST_CASE("batch manifests are validated up front") {
  SUBCASE("unknown keys") {
    spit("tmp_pipe_batch_bad1.json",
         "{\"clean\": [\"a.wav\"], \"noise\": \"n.wav\", \"snr_db\": [0],"
         " \"modes\": [\"mspp\"], \"out_dir\": \"d\", \"bogus\": 1}\n");
    CHECK_THROWS_WITH_AS(load_batch_spec("tmp_pipe_batch_bad1.json"),
                         doctest::Contains("unknown key"), contract_error);
  }

  SUBCASE("missing required keys") {
    spit("tmp_pipe_batch_bad2.json",
         "{\"clean\": [\"a.wav\"], \"snr_db\": [0], \"modes\": [\"mspp\"],"
         " \"out_dir\": \"d\"}\n");
    CHECK_THROWS_WITH_AS(load_batch_spec("tmp_pipe_batch_bad2.json"),
                         doctest::Contains("noise"), contract_error);
    spit("tmp_pipe_batch_bad3.json",
         "{\"clean\": [], \"noise\": \"n.wav\", \"snr_db\": [0],"
         " \"modes\": [\"mspp\"], \"out_dir\": \"d\"}\n");
    CHECK_THROWS_AS(load_batch_spec("tmp_pipe_batch_bad3.json"), contract_error);
  }

  SUBCASE("bad mode strings fail before any audio work") {
    BatchSpec spec;
    spec.clean = {"tmp_pipe_batch_clean.wav"};
    spec.noise = "tmp_pipe_batch_noise.wav";
    spec.snr_db = {0.0};
    spec.modes = {"p-only@fast"};
    spec.out_dir = "tmp_pipe_batch_out2";
    CHECK_THROWS_WITH_AS(run_batch(spec), doctest::Contains("constant-rho"),
                         contract_error);
    spec.modes = {"wiener"};
    CHECK_THROWS_WITH_AS(run_batch(spec), doctest::Contains("unknown mode"),
                         contract_error);
  }

  SUBCASE("duplicate clean stems collide in the output directory") {
    BatchSpec spec;
    spec.clean = {"a/x.wav", "b/x.wav"};
    spec.noise = "n.wav";
    spec.snr_db = {0.0};
    spec.modes = {"mspp"};
    spec.out_dir = "tmp_pipe_batch_out3";
    CHECK_THROWS_WITH_AS(run_batch(spec), doctest::Contains("duplicate clean stem"),
                         contract_error);
  }
}

TEST_CASE("enhance with a clean reference checks compatibility first") {
  write_wav(synth_speech_like(31, 0.5), "tmp_pipe_enh_noisy.wav");
  write_wav(synth_speech_like(31, 0.25), "tmp_pipe_enh_clean_short.wav");
  const EnhancementParams params;
  CHECK_THROWS_WITH_AS(
      enhance("tmp_pipe_enh_noisy.wav", "tmp_pipe_enh_out.wav", params,
              EnhanceMode::mspp, {}, "tmp_pipe_enh_clean_short.wav"),
      doctest::Contains("length mismatch"), contract_error);
}
