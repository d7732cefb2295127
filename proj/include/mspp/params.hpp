#pragma once

#include <cmath>

#include "mspp/stft.hpp"

namespace mspp {

// All tuning constants of the two-step enhancer. The SNR-ratio fields
// (xi_min, xi_max, xi_peak) are linear ratios; config files hold them in dB
// and convert once at load time.
struct EnhancementParams {
  double mu = 0.6;                             // phase compensation scale
  double xi_min = std::pow(10.0, -10.0 / 10.0);   // -10 dB
  double xi_max = std::pow(10.0, -5.0 / 10.0);    //  -5 dB
  double xi_peak = std::pow(10.0, 10.0 / 10.0);   // +10 dB
  int w_local = 1;
  int w_global = 15;
  double alpha_xi = 0.7;
  StftConfig m_config = StftConfig::m_step_default();
  StftConfig p_config = StftConfig::p_step_default();
  double vad_threshold_db = 3.0;
  double noise_beta = 0.7;
  int init_frame_count = 6;

  void validate() const;  // throws contract_error on nonsense values
};

}  // namespace mspp
