#include "mspp/m_step.hpp"

#include <cmath>

#include "mspp/errors.hpp"

namespace mspp {

namespace {

constexpr double kEps = 1e-12;

// Extended-precision scalar for the per-bin gain. Near |Y| == |D| the two
// gain terms cancel almost exactly; in plain double the subtraction leaves
// ~1e-16 of absolute error which sqrt inflates to ~1e-8, visibly breaking the
// closed-form identity H = |1 - |D|/|Y||. 128-bit arithmetic keeps the
// residual ~1e-34 so the identity holds to the last double ulp.
#if defined(__SIZEOF_FLOAT128__)
using wide_real = __float128;
#else
using wide_real = long double;
#endif

template <class F>
F gain_sq_classical(F y_mag_sq, F d_mag) {
  const F den = y_mag_sq > static_cast<F>(kEps) ? y_mag_sq : static_cast<F>(kEps);
  return static_cast<F>(1) - d_mag * d_mag / den;
}

template <class F>
F gain_chi(F y_mag, F y_mag_sq, F d_mag) {
  const F den = y_mag_sq > static_cast<F>(kEps) ? y_mag_sq : static_cast<F>(kEps);
  return (static_cast<F>(2) * y_mag * d_mag - static_cast<F>(2) * d_mag * d_mag) / den;
}

// The full modified gain in wide precision; returns a double.
double mss_gain_wide(cplx y, double d_mag) {
  const wide_real re = y.real(), im = y.imag();
  const wide_real y2 = re * re + im * im;  // exact: double products fit
  wide_real ym = 0;
  if (y2 > 0) {
    const wide_real seed = static_cast<wide_real>(std::sqrt(static_cast<double>(y2)));
    ym = static_cast<wide_real>(0.5) * (seed + y2 / seed);  // one Newton step
  }
  const wide_real d = static_cast<wide_real>(d_mag);
  wide_real diff = gain_sq_classical(y2, d) - gain_chi(ym, y2, d);
  if (diff < 0) diff = -diff;
  return std::sqrt(static_cast<double>(diff));
}

}  // namespace

double classical_ss_gain_sq(double y_mag_sq, double d_mag_sq) {
  return 1.0 - d_mag_sq / std::max(y_mag_sq, kEps);
}

double cross_term_chi(cplx y, double d_mag) {
  return gain_chi(std::abs(y), std::norm(y), d_mag);
}

double mss_gain(double h_ss_sq, double chi) {
  return std::sqrt(std::fabs(h_ss_sq - chi));
}

std::vector<cplx> apply_magnitude_compensation(const std::vector<cplx>& y_frame,
                                               const NoiseProfile& profile) {
  if (y_frame.size() != profile.mag_sq.size())
    throw contract_error("apply_magnitude_compensation: length mismatch");
  std::vector<cplx> z(y_frame.size());
  for (size_t k = 0; k < y_frame.size(); ++k) {
    const double d = std::sqrt(std::max(profile.mag_sq[k], 0.0));
    z[k] = mss_gain_wide(y_frame[k], d) * y_frame[k];
  }
  return z;
}

MStepResult run_m_step(const SampleBuffer& noisy, const EnhancementParams& params,
                       MagGainPolicy policy, const GainObserver& observer) {
  params.validate();
  const StftConfig& cfg = params.m_config;
  const size_t n = noisy.samples.size();
  const size_t need = static_cast<size_t>(params.init_frame_count) * cfg.hop + cfg.frame_len;
  if (n < need)
    throw contract_error("run_m_step: input too short for noise bootstrap (need " +
                         std::to_string(need) + " samples, got " + std::to_string(n) + ")");

  // Zero-pad both edges by the single-coverage span. The periodic analysis
  // window is ~0 there, and dividing a *modified* frame by the floored
  // envelope would blow up the first/last hop of output otherwise.
  const size_t pad = static_cast<size_t>(cfg.frame_len - cfg.hop);
  SampleBuffer padded;
  padded.sample_rate_hz = noisy.sample_rate_hz;
  padded.samples.assign(n + 2 * pad, 0.0);
  std::copy(noisy.samples.begin(), noisy.samples.end(), padded.samples.begin() + pad);

  const FrameSequence seq = frame_signal(padded, cfg);
  const size_t L = seq.frames.size();
  std::vector<std::vector<cplx>> Y(L);
  for (size_t l = 0; l < L; ++l) Y[l] = forward_dft(seq.frames[l]);

  NoiseProfile profile =
      init_noise(Y, params.init_frame_count, params.noise_beta);

  MStepResult res;
  res.vad_track.reserve(L);
  std::vector<std::vector<double>> out_frames(L);
  const int nb = cfg.dft_size();

  for (size_t l = 0; l < L; ++l) {
    const VadDecision dec = vad_classify(Y[l], profile, params.vad_threshold_db);
    res.vad_track.push_back(dec);

    std::vector<cplx> z(nb);
    for (int k = 0; k < nb; ++k) {
      const cplx y = Y[l][k];
      const double d = std::sqrt(std::max(profile.mag_sq[k], 0.0));
      double h;
      if (policy == MagGainPolicy::mss) {
        h = mss_gain_wide(y, d);
      } else {
        double g2 = classical_ss_gain_sq(std::norm(y), profile.mag_sq[k]);
        if (g2 < 0.0) {
          ++res.rectified_bins;
          g2 = 0.0;
        }
        h = std::sqrt(g2);
      }
      if (observer) observer(static_cast<int>(l), k, y, d, h);
      z[k] = h * y;
    }

    InverseDftResult inv = inverse_dft_real(z);
    if (inv.max_complex_abs > 0.0)
      res.max_imag_rel =
          std::max(res.max_imag_rel, inv.max_imag_abs / inv.max_complex_abs);
    out_frames[l] = std::move(inv.frame);

    profile = update_noise(profile, Y[l], dec);
  }

  const SampleBuffer whole =
      overlap_add(out_frames, cfg, padded.samples.size(), noisy.sample_rate_hz);
  res.intermediate.sample_rate_hz = noisy.sample_rate_hz;
  res.intermediate.samples.assign(whole.samples.begin() + pad,
                                  whole.samples.begin() + pad + n);
  return res;
}

}  // namespace mspp
