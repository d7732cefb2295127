#include "mspp/p_step.hpp"

#include <cmath>

#include "mspp/errors.hpp"

namespace mspp {

namespace {

constexpr double kEps = 1e-12;

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw contract_error(std::string(what) + " left [0,1]: " + std::to_string(p));
}

}  // namespace

double noise_proxy_v(const std::vector<cplx>& z_frame) {
  if (z_frame.empty()) throw contract_error("noise_proxy_v: empty frame");
  double acc = 0.0;
  for (const cplx& z : z_frame) acc += std::norm(z);
  return std::sqrt(acc / z_frame.size());
}

std::vector<double> posterior_snr(const std::vector<cplx>& z_frame, double v) {
  if (v < 0.0) throw contract_error("posterior_snr: v must be >= 0");
  const double den = std::max(v * v, kEps);
  std::vector<double> gamma(z_frame.size());
  for (size_t k = 0; k < z_frame.size(); ++k)
    gamma[k] = std::norm(z_frame[k]) / den;
  return gamma;
}

std::vector<double> a_priori_xi(const std::vector<double>& gamma, double alpha_xi) {
  std::vector<double> xi(gamma.size());
  for (size_t k = 0; k < gamma.size(); ++k) xi[k] = (1.0 - alpha_xi) * gamma[k];
  return xi;
}

std::vector<double> smooth_xi(const std::vector<double>& xi, int w) {
  if (w < 0) throw contract_error("smooth_xi: w must be >= 0");
  if (w == 0) return xi;

  std::vector<double> h(2 * w + 1);
  double sum = 0.0;
  for (int i = -w; i <= w; ++i) {
    h[i + w] = 0.5 + 0.5 * std::cos(M_PI * i / (w + 1.0));
    sum += h[i + w];
  }
  for (double& v : h) v /= sum;

  const int n = static_cast<int>(xi.size());
  std::vector<double> out(xi.size(), 0.0);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int i = -w; i <= w; ++i) {
      const int kk = k - i;
      if (kk >= 0 && kk < n) acc += h[i + w] * xi[kk];
    }
    out[k] = acc;
  }
  return out;
}

double presence_prob(double xi_psi, double xi_min, double xi_max) {
  if (!(0.0 < xi_min && xi_min < xi_max))
    throw contract_error("presence_prob: need 0 < xi_min < xi_max");
  if (xi_psi <= xi_min) return 0.0;
  if (xi_psi >= xi_max) return 1.0;
  return std::log(xi_psi / xi_min) / std::log(xi_max / xi_min);
}

double frame_presence(const std::vector<double>& xi, SppState& state,
                      const EnhancementParams& params) {
  if (xi.empty()) throw contract_error("frame_presence: empty frame");
  double mean = 0.0;
  for (const double v : xi) mean += v;
  mean /= xi.size();

  double p;
  if (mean < params.xi_min) {
    p = 0.0;
  } else if (mean > state.prev_xi_frame && mean > params.xi_min) {
    p = 1.0;
  } else {
    const double lo = params.xi_peak * params.xi_min;
    const double hi = params.xi_peak * params.xi_max;
    if (mean <= lo)
      p = 0.0;
    else if (mean >= hi)
      p = 1.0;
    else
      p = std::log(mean / lo) / std::log(params.xi_max / params.xi_min);
  }
  state.prev_xi_frame = mean;
  return p;
}

double rho(double p_local, double p_global, double p_frame) {
  check_prob(p_local, "P_local");
  check_prob(p_global, "P_global");
  check_prob(p_frame, "P_frame");
  return std::sqrt(1.0 - p_local * p_global * p_frame);
}

std::vector<int> lambda_weights(int n) {
  if (n < 2) throw contract_error("lambda_weights: n must be >= 2");
  std::vector<int> lam(n, 0);
  for (int k = 1; k < n; ++k) {
    if (2 * k == n)
      lam[k] = 0;
    else if (2 * k < n)
      lam[k] = 1;
    else
      lam[k] = -1;
  }
  return lam;
}

std::vector<double> phase_comp_function(double mu, const std::vector<double>& rho,
                                        const std::vector<int>& lambda, double v) {
  if (rho.size() != lambda.size())
    throw contract_error("phase_comp_function: length mismatch");
  if (!(mu > 0.0)) throw contract_error("phase_comp_function: mu must be > 0");
  if (v < 0.0) throw contract_error("phase_comp_function: v must be >= 0");
  std::vector<double> phi(rho.size());
  for (size_t k = 0; k < rho.size(); ++k) phi[k] = mu * rho[k] * lambda[k] * v;
  return phi;
}

std::vector<cplx> apply_phase_compensation(const std::vector<cplx>& z_frame,
                                           const std::vector<double>& phi) {
  if (z_frame.size() != phi.size())
    throw contract_error("apply_phase_compensation: length mismatch");
  std::vector<cplx> x(z_frame.size());
  for (size_t k = 0; k < z_frame.size(); ++k) {
    const cplx shifted = z_frame[k] + phi[k];  // real offset
    if (shifted == cplx(0.0, 0.0)) {
      x[k] = 0.0;  // angle undefined at the origin
      continue;
    }
    x[k] = std::polar(std::abs(z_frame[k]), std::arg(shifted));
  }
  return x;
}

PStepResult run_p_step(const SampleBuffer& intermediate,
                       const EnhancementParams& params, const PStepMode& mode) {
  params.validate();
  if (intermediate.samples.empty())
    throw contract_error("run_p_step: input too short for one frame");
  if (!mode.probabilistic && !(mode.rho_const >= 0.0 && mode.rho_const <= 1.0))
    throw contract_error("run_p_step: constant rho must be in [0,1]");

  const StftConfig& cfg = params.p_config;
  const size_t n = intermediate.samples.size();
  const size_t pad = static_cast<size_t>(cfg.frame_len - cfg.hop);

  // same edge guard as the magnitude step: keep single-coverage window
  // positions away from the modified output
  SampleBuffer padded;
  padded.sample_rate_hz = intermediate.sample_rate_hz;
  padded.samples.assign(n + 2 * pad, 0.0);
  std::copy(intermediate.samples.begin(), intermediate.samples.end(),
            padded.samples.begin() + pad);

  const FrameSequence seq = frame_signal(padded, cfg);
  const size_t L = seq.frames.size();
  const int nb = cfg.dft_size();
  const std::vector<int> lam = lambda_weights(nb);

  SppState state(params);
  PStepResult res;
  std::vector<std::vector<double>> out_frames(L);
  std::vector<double> rho_vec(nb);

  const auto track = [&res](double p) {
    res.min_prob = std::min(res.min_prob, p);
    res.max_prob = std::max(res.max_prob, p);
  };

  for (size_t t = 0; t < L; ++t) {
    const std::vector<cplx> Z = forward_dft(seq.frames[t]);
    const double v = noise_proxy_v(Z);

    if (mode.probabilistic) {
      const std::vector<double> gamma = posterior_snr(Z, v);
      const std::vector<double> xi = a_priori_xi(gamma, params.alpha_xi);
      const std::vector<double> xi_local = smooth_xi(xi, params.w_local);
      const std::vector<double> xi_global = smooth_xi(xi, params.w_global);

      const double p_frame = frame_presence(xi, state, params);
      check_prob(p_frame, "P_frame");
      track(p_frame);

      for (int k = 0; k < nb; ++k) {
        const double pl = presence_prob(xi_local[k], params.xi_min, params.xi_max);
        const double pg = presence_prob(xi_global[k], params.xi_min, params.xi_max);
        check_prob(pl, "P_local");
        check_prob(pg, "P_global");
        track(pl);
        track(pg);
        rho_vec[k] = rho(pl, pg, p_frame);
        check_prob(rho_vec[k], "rho");
        track(rho_vec[k]);
      }
      // The zero-padded smoothing is asymmetric at the spectrum edges, so
      // mirror the lower half to keep phi exactly anti-symmetric.
      for (int k = 1; k < nb / 2; ++k) rho_vec[nb - k] = rho_vec[k];
    } else {
      rho_vec.assign(nb, mode.rho_const);
    }

    const std::vector<double> phi =
        phase_comp_function(params.mu, rho_vec, lam, v);
    const std::vector<cplx> xhat = apply_phase_compensation(Z, phi);

    // Conjugate summation: synthesize from the Hermitian part, which equals
    // taking the real part of the inverse transform of xhat.
    std::vector<cplx> herm(nb);
    for (int k = 0; k < nb; ++k)
      herm[k] = 0.5 * (xhat[k] + std::conj(xhat[(nb - k) % nb]));

    InverseDftResult inv = inverse_dft_real(herm);
    if (inv.max_complex_abs > 0.0)
      res.max_imag_rel =
          std::max(res.max_imag_rel, inv.max_imag_abs / inv.max_complex_abs);
    out_frames[t] = std::move(inv.frame);
  }

  const SampleBuffer whole =
      overlap_add(out_frames, cfg, padded.samples.size(), intermediate.sample_rate_hz);
  res.enhanced.sample_rate_hz = intermediate.sample_rate_hz;
  res.enhanced.samples.assign(whole.samples.begin() + pad,
                              whole.samples.begin() + pad + n);
  return res;
}

}  // namespace mspp
