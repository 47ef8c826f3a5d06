#ifndef BYTESING_EVAL_ALIGNMENT_H_
#define BYTESING_EVAL_ALIGNMENT_H_

#include <string>
#include <vector>

#include "bytesing/common/matrix.h"

namespace bytesing::eval {

struct AlignmentSummary {
  std::vector<double> centroids;  // sum_j j * alpha_t(j)
  double mean_deviation = 0.0;    // from the diagonal t * frames_per_step
  double max_deviation = 0.0;
  int monotonicity_violations = 0;  // steps where the centroid moves backwards
};

// `alpha` is steps x memory length. `memory_per_step` is the expected
// memory advance per decoder step (reduction / downsample).
// Throws ValidationError on an empty matrix.
AlignmentSummary alignment_diagnostics(const Matrix& alpha, double memory_per_step,
                                       double tolerance = 1e-9);

// Plain CSV, one decoder step per line.
void write_matrix_csv(const std::string& path, const Matrix& m);

}  // namespace bytesing::eval

#endif  // BYTESING_EVAL_ALIGNMENT_H_
