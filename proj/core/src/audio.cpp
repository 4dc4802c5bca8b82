#include "gensep/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "gensep/errors.hpp"

namespace gensep {

double rms(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(w.samples.size()));
}

double peak(const Waveform& w) {
  double p = 0.0;
  for (double s : w.samples) p = std::max(p, std::abs(s));
  return p;
}

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw InputError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t chunk_len = read_u32(chunk + 4);
    if (pos + 8 + chunk_len > bytes.size()) {
      throw InputError("truncated WAV chunk in " + path);
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw InputError("malformed fmt chunk in " + path);
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (format != 1 || bits != 16) {
    throw InputError("unsupported WAV encoding (need PCM 16-bit): " + path);
  }
  if (channels != 1) {
    throw InputError("unsupported channel count (need mono): " + path);
  }
  if (data == nullptr) throw InputError("WAV file has no data chunk: " + path);

  Waveform w;
  w.sample_rate = static_cast<double>(rate);
  const std::size_t n = data_len / 2;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t v =
        static_cast<std::int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
    w.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_len = n * 2;
  std::vector<unsigned char> out;
  out.reserve(44 + data_len);

  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  const std::uint32_t rate = static_cast<std::uint32_t>(w.sample_rate);
  put_u32(out, rate);
  put_u32(out, rate * 2);  // byte rate
  put_u16(out, 2);         // block align
  put_u16(out, 16);        // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_len);

  for (double s : w.samples) {
    const double scaled = std::round(s * 32767.0);
    const std::int16_t v = static_cast<std::int16_t>(
        std::clamp(scaled, -32768.0, 32767.0));
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write WAV file: " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw InputError("short write to WAV file: " + path);
}

MixResult mix_at_0db(const Waveform& a, const Waveform& b) {
  if (a.sample_rate != b.sample_rate) {
    throw InputError("mix_at_0db: sample rates differ");
  }
  const double rms_a = rms(a), rms_b = rms(b);
  if (rms_a <= 0.0 || rms_b <= 0.0) {
    throw InputError("mix_at_0db: silent input signal");
  }
  const double scale = rms_a / rms_b;

  const std::size_t n = std::max(a.samples.size(), b.samples.size());
  MixResult r;
  r.a_scaled.sample_rate = r.b_scaled.sample_rate = r.mixture.sample_rate =
      a.sample_rate;
  r.a_scaled.samples.assign(n, 0.0);
  r.b_scaled.samples.assign(n, 0.0);
  r.mixture.samples.assign(n, 0.0);
  std::copy(a.samples.begin(), a.samples.end(), r.a_scaled.samples.begin());
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    r.b_scaled.samples[i] = b.samples[i] * scale;
  }
  for (std::size_t i = 0; i < n; ++i) {
    r.mixture.samples[i] = r.a_scaled.samples[i] + r.b_scaled.samples[i];
  }
  return r;
}

}  // namespace gensep
