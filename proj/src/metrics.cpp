#include "mspp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mspp/errors.hpp"

namespace mspp {

double overall_snr_db(const SampleBuffer& clean, const SampleBuffer& test) {
  if (clean.samples.size() != test.samples.size())
    throw contract_error("overall_snr_db: length mismatch");
  double ec = 0.0, er = 0.0;
  for (size_t i = 0; i < clean.samples.size(); ++i) {
    ec += clean.samples[i] * clean.samples[i];
    const double d = clean.samples[i] - test.samples[i];
    er += d * d;
  }
  if (ec <= 0.0) throw contract_error("overall_snr_db: clean has zero energy");
  if (er < 1e-20) return 99.0;
  return 10.0 * std::log10(ec / er);
}

SegSnr segsnr_db(const SampleBuffer& clean, const SampleBuffer& test, int frame_len) {
  if (clean.samples.size() != test.samples.size())
    throw contract_error("segsnr_db: length mismatch");
  if (frame_len <= 0) throw contract_error("segsnr_db: frame_len must be > 0");

  SegSnr out;
  const size_t nf = clean.samples.size() / frame_len;
  double sum = 0.0;
  for (size_t f = 0; f < nf; ++f) {
    double ec = 0.0, er = 0.0;
    for (int i = 0; i < frame_len; ++i) {
      const size_t idx = f * frame_len + i;
      ec += clean.samples[idx] * clean.samples[idx];
      const double d = clean.samples[idx] - test.samples[idx];
      er += d * d;
    }
    if (ec < 1e-12) continue;  // silent reference frame
    const double v = 10.0 * std::log10(ec / std::max(er, 1e-300));
    const double clamped = std::clamp(v, -10.0, 35.0);
    out.per_frame_db.push_back(clamped);
    sum += clamped;
  }
  if (out.per_frame_db.empty())
    throw contract_error("segsnr_db: no voiced frames");
  out.mean_db = sum / out.per_frame_db.size();
  return out;
}

EvalReport improvement(const SampleBuffer& clean, const SampleBuffer& noisy,
                       const SampleBuffer& enhanced, int frame_len) {
  if (clean.samples.size() != noisy.samples.size() ||
      clean.samples.size() != enhanced.samples.size())
    throw contract_error("improvement: length mismatch");

  const SegSnr seg_noisy = segsnr_db(clean, noisy, frame_len);
  SegSnr seg_enh = segsnr_db(clean, enhanced, frame_len);

  EvalReport r;
  r.snrseg_improvement_db = seg_enh.mean_db - seg_noisy.mean_db;
  r.overall_snr_improvement_db =
      overall_snr_db(clean, enhanced) - overall_snr_db(clean, noisy);
  r.input_snr_db = overall_snr_db(clean, noisy);
  r.per_frame_segsnr = std::move(seg_enh.per_frame_db);
  return r;
}

void spectrogram_export(const SampleBuffer& buf, const StftConfig& cfg,
                        const std::string& path, SpectrogramFormat format) {
  const FrameSequence seq = frame_signal(buf, cfg);
  const size_t L = seq.frames.size();
  const int half = cfg.dft_size() / 2;

  // frames x bins, dB
  std::vector<std::vector<double>> db(L, std::vector<double>(half + 1));
  for (size_t l = 0; l < L; ++l) {
    const std::vector<cplx> bins = forward_dft(seq.frames[l]);
    for (int k = 0; k <= half; ++k)
      db[l][k] = 20.0 * std::log10(std::abs(bins[k]) + 1e-10);
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot create " + path);

  if (format == SpectrogramFormat::csv) {
    char num[64];
    for (size_t l = 0; l < L; ++l) {
      for (int k = 0; k <= half; ++k) {
        std::snprintf(num, sizeof num, "%.6g", db[l][k]);
        if (k) f << ',';
        f << num;
      }
      f << '\n';
    }
  } else {
    // P5: rows are bins with low frequencies at the bottom, time horizontal
    f << "P5\n" << L << ' ' << (half + 1) << "\n255\n";
    for (int row = 0; row <= half; ++row) {
      const int k = half - row;
      for (size_t l = 0; l < L; ++l) {
        const double v = std::clamp((db[l][k] + 80.0) / 80.0, 0.0, 1.0);
        f.put(static_cast<char>(std::lrint(v * 255.0)));
      }
    }
  }
  if (!f) throw io_error("write failed: " + path);
}

}  // namespace mspp
