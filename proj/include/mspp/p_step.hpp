#pragma once

#include <vector>

#include "mspp/params.hpp"

namespace mspp {

// Cross-frame memory for the frame-level presence probability.
struct SppState {
  double prev_xi_frame = 0.0;

  explicit SppState(const EnhancementParams& params)
      : prev_xi_frame(params.xi_min) {}
};

// V = RMS of the frame's bin magnitudes, the phase-step noise proxy.
double noise_proxy_v(const std::vector<cplx>& z_frame);

// gamma[k] = |Z[k]|^2 / max(v^2, eps)
std::vector<double> posterior_snr(const std::vector<cplx>& z_frame, double v);

// xi[k] = (1 - alpha_xi) * gamma[k]
std::vector<double> a_priori_xi(const std::vector<double>& gamma, double alpha_xi);

// Weighted mean over [k-w, k+w] with a normalized raised-cosine kernel
// h(i) ~ 0.5 + 0.5 cos(pi i / (w+1)); out-of-range neighbours count as 0.
std::vector<double> smooth_xi(const std::vector<double>& xi, int w);

// 0 at or below xi_min, 1 at or above xi_max,
// log(xi_psi/xi_min) / log(xi_max/xi_min) between.
double presence_prob(double xi_psi, double xi_min, double xi_max);

// Frame-level probability: 0 below xi_min, 1 when rising above xi_min,
// otherwise the clamped log interpolation between xi_peak*xi_min and
// xi_peak*xi_max. Advances state.prev_xi_frame to the current frame mean.
double frame_presence(const std::vector<double>& xi, SppState& state,
                      const EnhancementParams& params);

// sqrt(1 - p_local * p_global * p_frame): 0 for certain speech, 1 for noise.
double rho(double p_local, double p_global, double p_frame);

// Anti-symmetric weighting: 0 at DC and Nyquist, +1 below, -1 above.
std::vector<int> lambda_weights(int n);

// phi[k] = mu * rho[k] * lambda[k] * v
std::vector<double> phase_comp_function(double mu, const std::vector<double>& rho,
                                        const std::vector<int>& lambda, double v);

// X[k] = |Z[k]| exp(j angle(Z[k] + phi[k])): phi shifts the real part,
// magnitude kept exactly.
std::vector<cplx> apply_phase_compensation(const std::vector<cplx>& z_frame,
                                           const std::vector<double>& phi);

struct PStepMode {
  bool probabilistic = true;
  double rho_const = 1.0;  // used when probabilistic == false

  static PStepMode prob() { return {true, 1.0}; }
  static PStepMode constant(double r) { return {false, r}; }
};

struct PStepResult {
  SampleBuffer enhanced;
  double max_imag_rel = 0.0;  // worst synthesis IDFT imaginary residue
  double min_prob = 1.0;      // observed range over P_local/P_global/P_frame/rho
  double max_prob = 0.0;
};

// Full analysis-modification-synthesis pass with the phase-step framing.
// Throws contract_error if any probability or rho leaves [0,1].
PStepResult run_p_step(const SampleBuffer& intermediate,
                       const EnhancementParams& params,
                       const PStepMode& mode = PStepMode::prob());

}  // namespace mspp
