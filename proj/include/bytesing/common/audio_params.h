#ifndef BYTESING_COMMON_AUDIO_PARAMS_H_
#define BYTESING_COMMON_AUDIO_PARAMS_H_

namespace bytesing {

inline constexpr int kSampleRate = 24000;
inline constexpr int kHopSamples = 300;
inline constexpr double kHopSec = static_cast<double>(kHopSamples) / kSampleRate;
inline constexpr int kWindowSamples = 1200;
inline constexpr int kFftSize = 2048;
inline constexpr int kNumMels = 80;
inline constexpr double kMelFmin = 0.0;
inline constexpr double kMelFmax = 12000.0;
inline constexpr double kLogMelFloor = -10.0;  // natural log

// ceil(num_samples / hop)
inline long frames_for_samples(long num_samples) {
  return (num_samples + kHopSamples - 1) / kHopSamples;
}

}  // namespace bytesing

#endif  // BYTESING_COMMON_AUDIO_PARAMS_H_
