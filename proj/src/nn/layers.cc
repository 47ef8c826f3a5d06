#include "bytesing/nn/layers.h"

#include <cmath>

#include "bytesing/common/error.h"

namespace bytesing::nn {

Linear::Linear(ParameterStore& store, const std::string& name, Index in, Index out,
               Rng& rng)
    : w_(&store.add(name + ".weight", glorot_init(in, out, rng))),
      b_(&store.add(name + ".bias", Matrix::Zero(1, out))) {}

Linear::Bound Linear::bind(Tape& tape) const {
  return Bound{tape.param(*w_), tape.param(*b_)};
}

Var Linear::apply(const Bound& bound, const Var& x) {
  return add(matmul(x, bound.w), bound.b);
}

Embedding::Embedding(ParameterStore& store, const std::string& name, Index vocab,
                     Index dim, Rng& rng)
    : table_(&store.add(name + ".table",
                        uniform_init(vocab, dim, std::sqrt(3.0 / static_cast<double>(dim)),
                                     rng))) {}

Var Embedding::operator()(Tape& tape, const std::vector<int>& ids) const {
  for (int id : ids) {
    if (id < 0 || id >= vocab()) {
      throw ShapeError("embedding '" + table_->name() + "': id " + std::to_string(id) +
                       " outside vocabulary of " + std::to_string(vocab()));
    }
  }
  return gather_rows(tape.param(*table_), ids);
}

Conv1d::Conv1d(ParameterStore& store, const std::string& name, Index in, Index out,
               int kernel, int dilation, Rng& rng)
    : w_(&store.add(name + ".weight",
                    uniform_init(kernel * in, out,
                                 std::sqrt(6.0 / static_cast<double>(kernel * in + out)),
                                 rng))),
      b_(&store.add(name + ".bias", Matrix::Zero(1, out))),
      kernel_(kernel),
      dilation_(dilation) {}

Var Conv1d::operator()(Tape& tape, const Var& x) const {
  return conv1d(x, tape.param(*w_), tape.param(*b_), kernel_, dilation_);
}

namespace {

Matrix recurrent_init(Index hidden, Index gates, Rng& rng) {
  return uniform_init(hidden, gates * hidden, 1.0 / std::sqrt(static_cast<double>(hidden)),
                      rng);
}

}  // namespace

Gru::Gru(ParameterStore& store, const std::string& name, Index in, Index hidden,
         Rng& rng)
    : w_ih_(&store.add(name + ".w_ih", glorot_init(in, 3 * hidden, rng))),
      b_ih_(&store.add(name + ".b_ih", Matrix::Zero(1, 3 * hidden))),
      w_hh_(&store.add(name + ".w_hh", recurrent_init(hidden, 3, rng))),
      b_hh_(&store.add(name + ".b_hh", Matrix::Zero(1, 3 * hidden))) {}

Gru::Bound Gru::bind(Tape& tape) const {
  return Bound{tape.param(*w_ih_), tape.param(*b_ih_), tape.param(*w_hh_),
               tape.param(*b_hh_)};
}

Var Gru::step(const Bound& bound, const Var& x, const Var& h) {
  const Var xp = add(matmul(x, bound.w_ih), bound.b_ih);
  return gru_cell(xp, h, bound.w_hh, bound.b_hh);
}

Var Gru::run(Tape& tape, const Var& seq, bool reverse) const {
  const Bound bound = bind(tape);
  const Index steps = seq.rows();
  const Var xp = add(matmul(seq, bound.w_ih), bound.b_ih);
  Var h = tape.constant(Matrix::Zero(1, hidden()));
  std::vector<Var> outputs(static_cast<std::size_t>(steps));
  for (Index i = 0; i < steps; ++i) {
    const Index s = reverse ? steps - 1 - i : i;
    h = gru_cell(slice_rows(xp, s, 1), h, bound.w_hh, bound.b_hh);
    outputs[static_cast<std::size_t>(s)] = h;
  }
  return concat_rows(outputs);
}

Lstm::Lstm(ParameterStore& store, const std::string& name, Index in, Index hidden,
           Rng& rng)
    : w_ih_(&store.add(name + ".w_ih", glorot_init(in, 4 * hidden, rng))),
      b_ih_(&store.add(name + ".b_ih", Matrix::Zero(1, 4 * hidden))),
      w_hh_(&store.add(name + ".w_hh", recurrent_init(hidden, 4, rng))),
      b_hh_(&store.add(name + ".b_hh", Matrix::Zero(1, 4 * hidden))) {
  // Forget-gate bias of 1.
  b_ih_->value.middleCols(hidden, hidden).setOnes();
}

Var Lstm::run(Tape& tape, const Var& seq, bool reverse) const {
  const Var w_ih = tape.param(*w_ih_);
  const Var b_ih = tape.param(*b_ih_);
  const Var w_hh = tape.param(*w_hh_);
  const Var b_hh = tape.param(*b_hh_);
  const Index steps = seq.rows();
  const Index h_size = hidden();
  const Var xp = add(matmul(seq, w_ih), b_ih);
  Var h = tape.constant(Matrix::Zero(1, h_size));
  Var c = tape.constant(Matrix::Zero(1, h_size));
  std::vector<Var> outputs(static_cast<std::size_t>(steps));
  for (Index i = 0; i < steps; ++i) {
    const Index s = reverse ? steps - 1 - i : i;
    const Var hc = lstm_cell(slice_rows(xp, s, 1), h, c, w_hh, b_hh);
    h = slice_cols(hc, 0, h_size);
    c = slice_cols(hc, h_size, h_size);
    outputs[static_cast<std::size_t>(s)] = h;
  }
  return concat_rows(outputs);
}

Highway::Highway(ParameterStore& store, const std::string& name, Index size, Rng& rng)
    : transform_(store, name + ".transform", size, size, rng),
      gate_(store, name + ".gate", size, size, rng) {
  gate_.bias().value.setConstant(-1.0);
}

Var Highway::operator()(Tape& tape, const Var& x) const {
  const Var h = relu(transform_(tape, x));
  const Var gate = sigmoid(gate_(tape, x));
  const Var carry = add_scalar(scale(gate, -1.0), 1.0);
  return add(mul(h, gate), mul(x, carry));
}

}  // namespace bytesing::nn
