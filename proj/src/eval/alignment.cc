#include "bytesing/eval/alignment.h"

#include <cmath>
#include <fstream>

#include "bytesing/common/error.h"

namespace bytesing::eval {

AlignmentSummary alignment_diagnostics(const Matrix& alpha, double memory_per_step,
                                       double tolerance) {
  if (alpha.size() == 0) throw ValidationError("empty attention trace");
  AlignmentSummary s;
  s.centroids.resize(static_cast<std::size_t>(alpha.rows()));
  double total = 0.0;
  for (Index t = 0; t < alpha.rows(); ++t) {
    double c = 0.0;
    for (Index j = 0; j < alpha.cols(); ++j) c += static_cast<double>(j) * alpha(t, j);
    s.centroids[static_cast<std::size_t>(t)] = c;
    const double dev = std::abs(c - static_cast<double>(t) * memory_per_step);
    total += dev;
    s.max_deviation = std::max(s.max_deviation, dev);
    if (t > 0 && c < s.centroids[static_cast<std::size_t>(t - 1)] - tolerance) {
      ++s.monotonicity_violations;
    }
  }
  s.mean_deviation = total / static_cast<double>(alpha.rows());
  return s;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(9);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace bytesing::eval
