#include "bytesing/common/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "bytesing/common/error.h"

namespace bytesing {
namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated WAV file");
  return v;
}

}  // namespace

std::int16_t quantize_pcm16(double x) {
  const double scaled = std::round(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

double dequantize_pcm16(std::int16_t s) { return s / 32768.0; }

void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  out.write("RIFF", 4);
  put<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, 1);  // PCM
  put<std::uint16_t>(out, 1);  // mono
  put<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate * 2));
  put<std::uint16_t>(out, 2);
  put<std::uint16_t>(out, 16);
  out.write("data", 4);
  put<std::uint32_t>(out, data_bytes);
  for (double x : wave.samples) put<std::int16_t>(out, quantize_pcm16(x));
  if (!out) throw IoError("failed writing " + path.string());
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0) {
    throw IoError(path.string() + ": not a RIFF file");
  }
  get<std::uint32_t>(in);
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0) {
    throw IoError(path.string() + ": not a WAVE file");
  }
  Waveform wave;
  int channels = 0;
  int bits = 0;
  bool have_fmt = false;
  while (in.read(tag, 4)) {
    const auto size = get<std::uint32_t>(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const auto format = get<std::uint16_t>(in);
      channels = get<std::uint16_t>(in);
      wave.sample_rate = static_cast<int>(get<std::uint32_t>(in));
      get<std::uint32_t>(in);
      get<std::uint16_t>(in);
      bits = get<std::uint16_t>(in);
      if (size > 16) in.seekg(size - 16, std::ios::cur);
      if (format != 1 || bits != 16 || channels < 1) {
        throw IoError(path.string() + ": only 16-bit PCM is supported");
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw IoError(path.string() + ": data before fmt chunk");
      const std::size_t frames = size / (2 * static_cast<std::size_t>(channels));
      wave.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
          acc += dequantize_pcm16(get<std::int16_t>(in));
        }
        wave.samples[i] = acc / channels;
      }
      return wave;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  throw IoError(path.string() + ": missing data chunk");
}

}  // namespace bytesing
