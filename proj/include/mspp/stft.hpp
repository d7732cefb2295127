#pragma once

#include <string>
#include <vector>

#include "mspp/audio_io.hpp"
#include "mspp/fft.hpp"

namespace mspp {

enum class WindowKind { hamming, modified_hanning, rectangular };

WindowKind window_kind_from_string(const std::string& name);
std::string to_string(WindowKind kind);

struct StftConfig {
  WindowKind window_kind = WindowKind::hamming;
  int frame_len = 100;
  int hop = 50;

  int dft_size() const { return frame_len; }

  // magnitude-compensation step: Hamming, 100 samples, 50% overlap
  static StftConfig m_step_default();
  // phase-compensation step: modified Hanning, 256 samples, hop 192
  static StftConfig p_step_default();
};

struct FrameSequence {
  std::vector<std::vector<double>> frames;  // already windowed
  StftConfig config;
  size_t original_len = 0;
};

// Periodic windows: hamming 0.54 - 0.46 cos(2 pi n / N),
// modified_hanning 0.5 - 0.5 cos(2 pi n / N), rectangular all ones.
std::vector<double> make_window(WindowKind kind, int length);

// Frame l covers [l*hop, l*hop + frame_len), tail zero-padded, each frame
// multiplied by the analysis window. L = ceil(len / hop), at least 1.
FrameSequence frame_signal(const SampleBuffer& buf, const StftConfig& cfg);

// bins[k] = sum_n frame[n] exp(-j 2 pi n k / N)
std::vector<cplx> forward_dft(const std::vector<double>& frame);

struct InverseDftResult {
  std::vector<double> frame;   // Re(IDFT(bins))
  double max_imag_abs = 0.0;   // largest |Im| discarded by Re(.)
  double max_complex_abs = 0.0;  // largest |IDFT value|, for relative residue
};

InverseDftResult inverse_dft_real(const std::vector<cplx>& spectrum);

// out[m] = sum_l frame_l[m - l*hop] / sum_l window[m - l*hop], the analysis
// window envelope; denominator floored at 1e-8; truncated to original_len.
SampleBuffer overlap_add(const std::vector<std::vector<double>>& frames,
                         const StftConfig& cfg, size_t original_len,
                         int sample_rate_hz);

}  // namespace mspp
