#ifndef BYTESING_EVAL_METRICS_H_
#define BYTESING_EVAL_METRICS_H_

#include <optional>
#include <string>

#include "bytesing/common/matrix.h"
#include "bytesing/eval/f0.h"

namespace bytesing::eval {

// 10 / ln 10: natural-log power to dB.
inline constexpr double kNepersToDb = 4.342944819032518;

// Frame-mean Euclidean distance between two natural-log mel spectrograms,
// in dB. Throws ValidationError unless the shapes match.
double msd_db(const Matrix& a, const Matrix& b);

struct F0Comparison {
  long overlap = 0;                  // frames voiced in both tracks
  std::optional<double> rmse_hz;     // absent when overlap == 0
  std::optional<double> corr;        // absent when overlap < 2 or a track is flat
};

// Throws ValidationError on unequal lengths.
F0Comparison compare_f0(const F0Track& a, const F0Track& b);

struct MetricReport {
  double msd_db = 0.0;
  F0Comparison f0;

  std::string to_json() const;
};

// Mel and F0 of both waveforms, then the metrics above. Waveforms must map
// to the same frame count.
MetricReport evaluate_waves(const std::vector<double>& ref, const std::vector<double>& hyp);

}  // namespace bytesing::eval

#endif  // BYTESING_EVAL_METRICS_H_
