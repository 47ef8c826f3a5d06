#ifndef BYTESING_TESTS_SUPPORT_GRAD_CHECK_H_
#define BYTESING_TESTS_SUPPORT_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bytesing/nn/autograd.h"

namespace bytesing::testing {

struct BlockError {
  std::string name;
  double rel_error = 0.0;
  double analytic_norm = 0.0;
};

// Central-difference oracle. `loss` must rebuild the graph from the current
// parameter values; when `with_backward` is set it also calls
// Tape::backward so analytic gradients land in the store.
//
// Relative error per parameter block: ||analytic - numeric|| /
// max(||analytic||, ||numeric||, floor).
inline std::vector<BlockError> check_gradients(
    nn::ParameterStore& store, const std::function<double(bool)>& loss,
    double eps = 1e-6, double floor = 1e-7) {
  store.zero_grad();
  loss(true);
  std::vector<BlockError> out;
  for (nn::Parameter* p : store.all()) {
    const Matrix analytic = p->grad;
    Matrix numeric(p->value.rows(), p->value.cols());
    for (Index i = 0; i < p->value.size(); ++i) {
      double& w = p->value.data()[i];
      const double saved = w;
      w = saved + eps;
      const double up = loss(false);
      w = saved - eps;
      const double down = loss(false);
      w = saved;
      numeric.data()[i] = (up - down) / (2.0 * eps);
    }
    const double denom = std::max({analytic.norm(), numeric.norm(), floor});
    out.push_back(BlockError{p->name(), (analytic - numeric).norm() / denom,
                             analytic.norm()});
  }
  store.zero_grad();
  return out;
}

inline double max_rel_error(const std::vector<BlockError>& errors) {
  double worst = 0.0;
  for (const auto& e : errors) worst = std::max(worst, e.rel_error);
  return worst;
}

}  // namespace bytesing::testing

#endif  // BYTESING_TESTS_SUPPORT_GRAD_CHECK_H_
