#pragma once

#include <vector>

#include "mspp/stft.hpp"

namespace mspp {

// Per-bin noise power estimate |D|^2, updated recursively on non-speech frames.
struct NoiseProfile {
  std::vector<double> mag_sq;
  double beta = 0.7;
  int init_frame_count = 6;
};

struct VadDecision {
  bool is_speech = false;
  double frame_snr_db = 0.0;
};

// mag_sq[k] = mean over the first `count` frames of |Y[k]|^2.
NoiseProfile init_noise(const std::vector<std::vector<cplx>>& first_frames,
                        int count, double beta = 0.7);

// Energy-ratio VAD: 10 log10(sum |Y|^2 / max(sum mag_sq, 1e-12)) > threshold.
VadDecision vad_classify(const std::vector<cplx>& frame,
                         const NoiseProfile& profile, double threshold_db);

// Non-speech: mag_sq <- beta * mag_sq + (1 - beta) |Y|^2. Speech: unchanged.
NoiseProfile update_noise(const NoiseProfile& profile,
                          const std::vector<cplx>& frame,
                          const VadDecision& decision);

}  // namespace mspp
