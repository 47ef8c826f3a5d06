#ifndef BYTESING_VOCODER_SAMPLE_H_
#define BYTESING_VOCODER_SAMPLE_H_

#include <cstdint>

namespace bytesing::vocoder {

inline constexpr int kNumClasses = 256;

struct CoarseFine {
  int coarse = 0;
  int fine = 0;
  bool operator==(const CoarseFine&) const = default;
};

// s in [0, 65535] -> (s / 256, s % 256). Throws ValidationError otherwise.
CoarseFine split_sample(int s);
// Inverse of split_sample; both parts must lie in [0, 255].
int combine_sample(int coarse, int fine);

// Signed PCM16 <-> unsigned 16-bit offset code (s + 32768).
inline int to_unsigned(std::int16_t s) { return static_cast<int>(s) + 32768; }
inline std::int16_t to_signed(int u) { return static_cast<std::int16_t>(u - 32768); }

// Scales a class index in [0, 255] to [-1, 1].
inline double scale_class(int v) { return v / 127.5 - 1.0; }

}  // namespace bytesing::vocoder

#endif  // BYTESING_VOCODER_SAMPLE_H_
