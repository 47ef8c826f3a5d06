#ifndef BYTESING_NN_LAYERS_H_
#define BYTESING_NN_LAYERS_H_

#include <string>
#include <vector>

#include "bytesing/nn/autograd.h"
#include "bytesing/nn/ops.h"

namespace bytesing::nn {

// Layers hold non-owning pointers into a ParameterStore that must outlive
// them. `bind()` puts the parameters on a tape once so that recurrent loops
// do not create a leaf per step.

class Linear {
 public:
  struct Bound {
    Var w, b;
  };

  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, Index in, Index out,
         Rng& rng);

  Bound bind(Tape& tape) const;
  static Var apply(const Bound& bound, const Var& x);
  Var operator()(Tape& tape, const Var& x) const { return apply(bind(tape), x); }

  Parameter& weight() const { return *w_; }
  Parameter& bias() const { return *b_; }

 private:
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(ParameterStore& store, const std::string& name, Index vocab,
            Index dim, Rng& rng);

  // Throws ShapeError for ids outside [0, vocab).
  Var operator()(Tape& tape, const std::vector<int>& ids) const;
  Index vocab() const { return table_->value.rows(); }
  Index dim() const { return table_->value.cols(); }

 private:
  Parameter* table_ = nullptr;
};

class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParameterStore& store, const std::string& name, Index in, Index out,
         int kernel, int dilation, Rng& rng);

  Var operator()(Tape& tape, const Var& x) const;
  int kernel() const { return kernel_; }
  int dilation() const { return dilation_; }
  Parameter& weight() const { return *w_; }
  Parameter& bias() const { return *b_; }

 private:
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
  int kernel_ = 1;
  int dilation_ = 1;
};

class Gru {
 public:
  struct Bound {
    Var w_ih, b_ih, w_hh, b_hh;
  };

  Gru() = default;
  Gru(ParameterStore& store, const std::string& name, Index in, Index hidden,
      Rng& rng);

  Bound bind(Tape& tape) const;
  // One step for a batch: x is B x in, h is B x hidden.
  static Var step(const Bound& bound, const Var& x, const Var& h);
  // Whole sequence from a zero state; rows of the result follow input order
  // even when `reverse` is set.
  Var run(Tape& tape, const Var& seq, bool reverse) const;

  Index hidden() const { return w_hh_->value.rows(); }

 private:
  Parameter* w_ih_ = nullptr;
  Parameter* b_ih_ = nullptr;
  Parameter* w_hh_ = nullptr;
  Parameter* b_hh_ = nullptr;
};

class Lstm {
 public:
  Lstm() = default;
  Lstm(ParameterStore& store, const std::string& name, Index in, Index hidden,
       Rng& rng);

  Var run(Tape& tape, const Var& seq, bool reverse) const;
  Index hidden() const { return w_hh_->value.rows(); }

 private:
  Parameter* w_ih_ = nullptr;
  Parameter* b_ih_ = nullptr;
  Parameter* w_hh_ = nullptr;
  Parameter* b_hh_ = nullptr;
};

// y = relu(x W_h + b_h) * T + x * (1 - T),  T = sigmoid(x W_t + b_t).
class Highway {
 public:
  Highway() = default;
  Highway(ParameterStore& store, const std::string& name, Index size, Rng& rng);

  Var operator()(Tape& tape, const Var& x) const;

 private:
  Linear transform_;
  Linear gate_;
};

}  // namespace bytesing::nn

#endif  // BYTESING_NN_LAYERS_H_
