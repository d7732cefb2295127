#include "mspp/audio_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "mspp/errors.hpp"

namespace mspp {

namespace {

// mt19937-backed generator with explicit bit-to-double conversion so streams
// are identical across standard libraries (std::*_distribution is
// implementation-defined, which would break byte-level reproducibility).
class Rng {
 public:
  explicit Rng(uint32_t seed) : gen_(seed) {}

  // 53-bit uniform in [0, 1)
  double next() {
    const double a = static_cast<double>(gen_() >> 5);   // 27 bits
    const double b = static_cast<double>(gen_() >> 6);   // 26 bits
    return (a * 67108864.0 + b) / 9007199254740992.0;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

  int randint(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() * (hi - lo + 1));
  }

  double gauss() {  // Box-Muller
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next();
    const double u2 = next();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

uint32_t read_u32(std::istream& s) {
  unsigned char b[4];
  s.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& s) {
  unsigned char b[2];
  s.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& s, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  s.write(b, 4);
}

void write_u16(std::ostream& s, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  s.write(b, 2);
}

}  // namespace

SampleBuffer read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path);

  char tag[4];
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "RIFF", 4) != 0)
    throw io_error(path + ": not a RIFF file");
  read_u32(f);  // overall size, unused
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "WAVE", 4) != 0)
    throw io_error(path + ": not a WAVE file");

  bool have_fmt = false;
  uint16_t channels = 0, bits = 0, format = 0;
  uint32_t rate = 0;
  SampleBuffer out;

  while (f.read(tag, 4)) {
    const uint32_t size = read_u32(f);
    if (!f) throw io_error(path + ": truncated chunk header");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw io_error(path + ": malformed fmt chunk");
      format = read_u16(f);
      channels = read_u16(f);
      rate = read_u32(f);
      read_u32(f);  // byte rate
      read_u16(f);  // block align
      bits = read_u16(f);
      f.seekg(size - 16 + (size & 1), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw io_error(path + ": data chunk before fmt chunk");
      if (format != 1) throw io_error(path + ": unsupported encoding (PCM only)");
      if (channels != 1)
        throw io_error(path + ": unsupported channel count " + std::to_string(channels));
      if (bits != 16) throw io_error(path + ": unsupported bit depth " + std::to_string(bits));
      const size_t n = size / 2;
      std::vector<char> raw(size);
      f.read(raw.data(), size);
      if (!f && size > 0) throw io_error(path + ": truncated data chunk");
      out.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const int16_t v = static_cast<int16_t>(
            static_cast<unsigned char>(raw[2 * i]) |
            (static_cast<unsigned char>(raw[2 * i + 1]) << 8));
        out.samples[i] = v / 32768.0;
      }
      out.sample_rate_hz = static_cast<int>(rate);
      return out;
    } else {
      f.seekg(size + (size & 1), std::ios::cur);
    }
  }
  throw io_error(path + ": no data chunk");
}

void write_wav(const SampleBuffer& buf, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot create " + path);

  const uint32_t data_size = static_cast<uint32_t>(buf.samples.size() * 2);
  f.write("RIFF", 4);
  write_u32(f, 36 + data_size);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_u32(f, 16);
  write_u16(f, 1);  // PCM
  write_u16(f, 1);  // mono
  write_u32(f, static_cast<uint32_t>(buf.sample_rate_hz));
  write_u32(f, static_cast<uint32_t>(buf.sample_rate_hz) * 2);
  write_u16(f, 2);
  write_u16(f, 16);
  f.write("data", 4);
  write_u32(f, data_size);

  constexpr double kMax = 32767.0 / 32768.0;
  for (const double s : buf.samples) {
    if (!std::isfinite(s))
      throw contract_error("write_wav: non-finite sample");
    const double c = std::min(std::max(s, -1.0), kMax);
    const int16_t q = static_cast<int16_t>(std::lrint(c * 32768.0));
    write_u16(f, static_cast<uint16_t>(q));
  }
  if (!f) throw io_error("write failed: " + path);
}

MixResult mix_at_snr(const SampleBuffer& clean, const SampleBuffer& noise, double snr_db) {
  if (clean.sample_rate_hz != noise.sample_rate_hz)
    throw contract_error("mix_at_snr: sample rate mismatch");
  if (noise.samples.size() < clean.samples.size())
    throw contract_error("mix_at_snr: noise shorter than clean signal");
  const size_t n = clean.samples.size();

  double ec = 0.0, en = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ec += clean.samples[i] * clean.samples[i];
    en += noise.samples[i] * noise.samples[i];
  }
  if (ec <= 0.0) throw contract_error("mix_at_snr: zero-energy clean signal");
  if (en <= 0.0) throw contract_error("mix_at_snr: zero-energy noise signal");

  const double s = std::sqrt(ec / (en * std::pow(10.0, snr_db / 10.0)));
  MixResult r;
  r.noise_scale = s;
  r.noisy.sample_rate_hz = clean.sample_rate_hz;
  r.noisy.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    r.noisy.samples[i] = clean.samples[i] + s * noise.samples[i];
  return r;
}

SampleBuffer synth_speech_like(uint32_t seed, double duration_s, int sample_rate_hz) {
  if (duration_s <= 0.0) throw contract_error("synth_speech_like: duration must be > 0");
  const double fs = sample_rate_hz;
  const size_t n = static_cast<size_t>(std::llround(duration_s * fs));

  Rng rng(seed);
  SampleBuffer out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.assign(n, 0.0);

  const double pitch = rng.uniform(100.0, 250.0);
  const int nharm = rng.randint(3, 5);
  const double fenv = rng.uniform(2.0, 6.0);
  std::vector<double> phases(nharm);
  for (int h = 0; h < nharm; ++h) phases[h] = rng.uniform(0.0, 2.0 * M_PI);

  // leading silence so the noise tracker has a bootstrap region
  size_t pos = static_cast<size_t>(std::llround(rng.uniform(0.12, 0.18) * fs));
  while (pos < n) {
    const size_t seg = static_cast<size_t>(std::llround(rng.uniform(0.3, 0.6) * fs));
    const size_t end = std::min(pos + seg, n);
    const size_t len = end - pos;
    const size_t fade = std::min<size_t>(80, len);
    for (size_t i = 0; i < len; ++i) {
      const double env = 0.5 * (1.0 - std::cos(2.0 * M_PI * fenv * (i / fs)));
      double v = 0.0;
      for (int h = 1; h <= nharm; ++h)
        v += (1.0 / h) *
             std::sin(2.0 * M_PI * h * pitch * ((pos + i) / fs) + phases[h - 1]);
      double w = 1.0;
      if (fade > 0 && i >= len - fade) {
        const size_t j = i - (len - fade);
        w = 0.5 * (1.0 + std::cos(M_PI * j / static_cast<double>(fade)));
      }
      out.samples[pos + i] = v * w * env;
    }
    pos = end + static_cast<size_t>(std::llround(rng.uniform(0.1, 0.2) * fs));
  }

  double peak = 0.0;
  for (const double s : out.samples) peak = std::max(peak, std::fabs(s));
  if (peak > 0.0) {
    const double g = 0.5 / peak;
    for (double& s : out.samples) s *= g;
  }
  return out;
}

SampleBuffer synth_white_noise(uint32_t seed, double duration_s, int sample_rate_hz) {
  if (duration_s <= 0.0) throw contract_error("synth_white_noise: duration must be > 0");
  const size_t n =
      static_cast<size_t>(std::llround(duration_s * static_cast<double>(sample_rate_hz)));
  Rng rng(seed + 7777u);  // offset keeps speech seed k and noise seed k distinct
  SampleBuffer out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i) out.samples[i] = 0.1 * rng.gauss();
  return out;
}

}  // namespace mspp
