#include "mspp/noise_tracker.hpp"

#include <cmath>

#include "mspp/errors.hpp"

namespace mspp {

NoiseProfile init_noise(const std::vector<std::vector<cplx>>& first_frames,
                        int count, double beta) {
  if (count < 1) throw contract_error("init_noise: count must be >= 1");
  if (static_cast<int>(first_frames.size()) < count)
    throw contract_error("init_noise: fewer frames than count");

  const size_t n = first_frames[0].size();
  NoiseProfile p;
  p.beta = beta;
  p.init_frame_count = count;
  p.mag_sq.assign(n, 0.0);
  for (int l = 0; l < count; ++l) {
    if (first_frames[l].size() != n)
      throw contract_error("init_noise: frame length mismatch");
    for (size_t k = 0; k < n; ++k)
      p.mag_sq[k] += std::norm(first_frames[l][k]);
  }
  for (size_t k = 0; k < n; ++k) p.mag_sq[k] /= count;
  return p;
}

VadDecision vad_classify(const std::vector<cplx>& frame,
                         const NoiseProfile& profile, double threshold_db) {
  if (frame.size() != profile.mag_sq.size())
    throw contract_error("vad_classify: frame/profile length mismatch");
  double ey = 0.0, ed = 0.0;
  for (size_t k = 0; k < frame.size(); ++k) {
    ey += std::norm(frame[k]);
    ed += profile.mag_sq[k];
  }
  VadDecision d;
  d.frame_snr_db = 10.0 * std::log10(ey / std::max(ed, 1e-12));
  d.is_speech = d.frame_snr_db > threshold_db;
  return d;
}

NoiseProfile update_noise(const NoiseProfile& profile,
                          const std::vector<cplx>& frame,
                          const VadDecision& decision) {
  if (frame.size() != profile.mag_sq.size())
    throw contract_error("update_noise: frame/profile length mismatch");
  if (decision.is_speech) return profile;
  NoiseProfile p = profile;
  for (size_t k = 0; k < frame.size(); ++k)
    p.mag_sq[k] = profile.beta * profile.mag_sq[k] +
                  (1.0 - profile.beta) * std::norm(frame[k]);
  return p;
}

}  // namespace mspp
