#ifndef BYTESING_NN_OPTIMIZER_H_
#define BYTESING_NN_OPTIMIZER_H_

#include <vector>

#include "bytesing/nn/autograd.h"

namespace bytesing::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 1.0;  // global gradient-norm clip; <= 0 disables
};

class Adam {
 public:
  Adam(ParameterStore& store, AdamConfig config);

  // Applies one update from the accumulated gradients, then zeroes them.
  // Returns the global gradient norm before clipping.
  double step();

  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamConfig config_;
  long steps_ = 0;
};

double global_grad_norm(const ParameterStore& store);

}  // namespace bytesing::nn

#endif  // BYTESING_NN_OPTIMIZER_H_
