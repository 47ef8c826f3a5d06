#ifndef BYTESING_EVAL_F0_H_
#define BYTESING_EVAL_F0_H_

#include <cstddef>
#include <vector>

namespace bytesing::eval {

inline constexpr double kF0Min = 50.0;
inline constexpr double kF0Max = 1500.0;

// Per-frame pitch on the mel hop grid. f0_hz is 0 where unvoiced.
struct F0Track {
  std::vector<bool> voiced;
  std::vector<double> f0_hz;

  std::size_t size() const { return voiced.size(); }
  std::size_t voiced_count() const;
};

struct YinOptions {
  double threshold = 0.15;
  int integration_window = 600;
  // Frames whose mean power is below this are unvoiced without analysis.
  double silence_power = 1e-10;
};

// YIN tracker at 24 kHz, frame t centred on t * hop like the mel frames.
F0Track extract_f0(const std::vector<double>& wave, const YinOptions& options = {});

}  // namespace bytesing::eval

#endif  // BYTESING_EVAL_F0_H_
