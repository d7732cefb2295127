#include "mspp/stft.hpp"

#include <cmath>

#include "mspp/errors.hpp"

namespace mspp {

WindowKind window_kind_from_string(const std::string& name) {
  if (name == "hamming") return WindowKind::hamming;
  if (name == "modified_hanning") return WindowKind::modified_hanning;
  if (name == "rectangular") return WindowKind::rectangular;
  throw contract_error("unknown window kind: " + name);
}

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::hamming: return "hamming";
    case WindowKind::modified_hanning: return "modified_hanning";
    case WindowKind::rectangular: return "rectangular";
  }
  return "?";
}

StftConfig StftConfig::m_step_default() {
  return {WindowKind::hamming, 100, 50};
}

StftConfig StftConfig::p_step_default() {
  return {WindowKind::modified_hanning, 256, 192};
}

namespace {

void check_config(const StftConfig& cfg) {
  if (cfg.hop <= 0 || cfg.hop > cfg.frame_len)
    throw contract_error("stft config: need 0 < hop <= frame_len");
}

}  // namespace

std::vector<double> make_window(WindowKind kind, int length) {
  if (length < 2) throw contract_error("make_window: length must be >= 2");
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n) {
    switch (kind) {
      case WindowKind::hamming:
        w[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / length);
        break;
      case WindowKind::modified_hanning:
        w[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / length);
        break;
      case WindowKind::rectangular:
        w[n] = 1.0;
        break;
    }
  }
  return w;
}

FrameSequence frame_signal(const SampleBuffer& buf, const StftConfig& cfg) {
  check_config(cfg);
  if (buf.samples.empty()) throw contract_error("frame_signal: empty buffer");
  const std::vector<double> win = make_window(cfg.window_kind, cfg.frame_len);
  const size_t n = buf.samples.size();
  const size_t L = std::max<size_t>(1, (n + cfg.hop - 1) / cfg.hop);

  FrameSequence seq;
  seq.config = cfg;
  seq.original_len = n;
  seq.frames.assign(L, std::vector<double>(cfg.frame_len, 0.0));
  for (size_t l = 0; l < L; ++l) {
    const size_t start = l * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      const size_t idx = start + i;
      if (idx < n) seq.frames[l][i] = win[i] * buf.samples[idx];
    }
  }
  return seq;
}

std::vector<cplx> forward_dft(const std::vector<double>& frame) {
  std::vector<cplx> bins(frame.begin(), frame.end());
  fft_inplace(bins, false);
  return bins;
}

InverseDftResult inverse_dft_real(const std::vector<cplx>& spectrum) {
  std::vector<cplx> t = spectrum;
  fft_inplace(t, true);
  InverseDftResult r;
  r.frame.resize(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    r.frame[i] = t[i].real();
    r.max_imag_abs = std::max(r.max_imag_abs, std::fabs(t[i].imag()));
    r.max_complex_abs = std::max(r.max_complex_abs, std::abs(t[i]));
  }
  return r;
}

SampleBuffer overlap_add(const std::vector<std::vector<double>>& frames,
                         const StftConfig& cfg, size_t original_len,
                         int sample_rate_hz) {
  check_config(cfg);
  if (frames.empty()) throw contract_error("overlap_add: empty frame list");
  for (const auto& f : frames)
    if (static_cast<int>(f.size()) != cfg.frame_len)
      throw contract_error("overlap_add: frame length mismatch");

  const std::vector<double> win = make_window(cfg.window_kind, cfg.frame_len);
  const size_t L = frames.size();
  const size_t total = (L - 1) * cfg.hop + cfg.frame_len;
  std::vector<double> num(total, 0.0), den(total, 0.0);
  for (size_t l = 0; l < L; ++l) {
    const size_t start = l * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      num[start + i] += frames[l][i];
      den[start + i] += win[i];
    }
  }

  SampleBuffer out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.assign(original_len, 0.0);
  const size_t n = std::min(original_len, total);
  for (size_t i = 0; i < n; ++i)
    out.samples[i] = num[i] / std::max(den[i], 1e-8);
  return out;
}

}  // namespace mspp
