#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mspp {

// Mono time-domain signal, nominal range [-1, 1].
struct SampleBuffer {
  std::vector<double> samples;
  int sample_rate_hz = 8000;

  size_t size() const { return samples.size(); }
};

// 16-bit mono PCM only; samples scaled by 1/32768.
SampleBuffer read_wav(const std::string& path);

// Clamps to [-1, 1 - 2^-15], rounds to int16. Round-trip error <= 2^-15.
void write_wav(const SampleBuffer& buf, const std::string& path);

struct MixResult {
  SampleBuffer noisy;
  double noise_scale = 0.0;
};

// noisy = clean + s * noise with s chosen so the clean/noise energy ratio
// equals snr_db exactly. Noise is truncated to the clean length first.
MixResult mix_at_snr(const SampleBuffer& clean, const SampleBuffer& noise, double snr_db);

// Deterministic voiced-harmonic test signal: 3-5 harmonics of a random pitch
// in [100, 250] Hz, raised-cosine amplitude modulation at 2-6 Hz, silence
// gaps >= 100 ms between segments, peak normalized to 0.5.
SampleBuffer synth_speech_like(uint32_t seed, double duration_s, int sample_rate_hz = 8000);

// Deterministic white Gaussian noise, sigma = 0.1.
SampleBuffer synth_white_noise(uint32_t seed, double duration_s, int sample_rate_hz = 8000);

}  // namespace mspp
