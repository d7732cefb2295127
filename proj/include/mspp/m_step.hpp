#pragma once

#include <functional>
#include <vector>

#include "mspp/noise_tracker.hpp"
#include "mspp/params.hpp"

namespace mspp {

// Square of the classical spectral-subtraction gain, 1 - |D|^2 / max(|Y|^2, eps).
// May be negative; clamping is the rectified baseline's job, not this function's.
double classical_ss_gain_sq(double y_mag_sq, double d_mag_sq);

// Cross-correlation term under the noise-phase decision angle(D) = angle(Y):
// chi = (2 |Y| d - 2 d^2) / max(|Y|^2, eps).
double cross_term_chi(cplx y, double d_mag);

// sqrt(|h_ss_sq - chi|): never negative, never NaN, no flooring.
double mss_gain(double h_ss_sq, double chi);

// Z[k] = H[k] * Y[k]: modified magnitude, unchanged phase.
std::vector<cplx> apply_magnitude_compensation(const std::vector<cplx>& y_frame,
                                               const NoiseProfile& profile);

enum class MagGainPolicy {
  mss,                  // sqrt(|h_ss_sq - chi|), structurally floor-free
  classical_rectified,  // sqrt(max(h_ss_sq, 0)), counts flooring events
};

struct MStepResult {
  SampleBuffer intermediate;
  std::vector<VadDecision> vad_track;
  long long rectified_bins = 0;  // flooring events; always 0 under mss
  double max_imag_rel = 0.0;     // worst synthesis IDFT imaginary residue
};

// Observation hook for gain-level oracles: called per bin with the noisy bin,
// the noise magnitude estimate in force, and the applied gain.
using GainObserver =
    std::function<void(int frame, int bin, cplx y, double d_mag, double h)>;

// Full analysis-modification-synthesis pass with the M-step framing:
// VAD-gated recursive noise tracking bootstrapped on the first
// init_frame_count frames, per-bin gain, inverse DFT, normalized overlap-add.
MStepResult run_m_step(const SampleBuffer& noisy, const EnhancementParams& params,
                       MagGainPolicy policy = MagGainPolicy::mss,
                       const GainObserver& observer = nullptr);

}  // namespace mspp
