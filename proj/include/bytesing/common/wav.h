#ifndef BYTESING_COMMON_WAV_H_
#define BYTESING_COMMON_WAV_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace bytesing {

struct Waveform {
  int sample_rate = 24000;
  std::vector<double> samples;  // mono, nominally in [-1, 1)
};

// 16-bit signed PCM <-> float in [-1, 1).
std::int16_t quantize_pcm16(double x);
double dequantize_pcm16(std::int16_t s);

// RIFF/WAVE, mono, 16-bit PCM.
void write_wav(const std::filesystem::path& path, const Waveform& wave);
// Reads 16-bit PCM; multichannel input is averaged down to mono.
Waveform read_wav(const std::filesystem::path& path);

}  // namespace bytesing

#endif  // BYTESING_COMMON_WAV_H_
