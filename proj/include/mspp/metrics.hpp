#pragma once

#include <string>
#include <vector>

#include "mspp/audio_io.hpp"
#include "mspp/stft.hpp"

namespace mspp {

struct EvalReport {
  double snrseg_improvement_db = 0.0;
  double overall_snr_improvement_db = 0.0;
  double input_snr_db = 0.0;
  std::vector<double> per_frame_segsnr;  // of the enhanced signal
};

// 10 log10(sum clean^2 / sum (clean - test)^2), capped at 99 dB when the
// residual energy is below 1e-20.
double overall_snr_db(const SampleBuffer& clean, const SampleBuffer& test);

struct SegSnr {
  double mean_db = 0.0;
  std::vector<double> per_frame_db;
};

// Non-overlapping frames, per-frame SNR clamped to [-10, 35] dB, frames with
// clean energy < 1e-12 excluded. Throws contract_error if nothing survives.
SegSnr segsnr_db(const SampleBuffer& clean, const SampleBuffer& test,
                 int frame_len = 160);

EvalReport improvement(const SampleBuffer& clean, const SampleBuffer& noisy,
                       const SampleBuffer& enhanced, int frame_len = 160);

enum class SpectrogramFormat { csv, pgm };

// Magnitude in dB (20 log10(|bin| + 1e-10)), bins 0..N/2 per frame.
// csv: one row per frame, 6 significant digits.
// pgm: binary P5, dB range [-80, 0] mapped to [0, 255], time horizontal.
void spectrogram_export(const SampleBuffer& buf, const StftConfig& cfg,
                        const std::string& path, SpectrogramFormat format);

}  // namespace mspp
