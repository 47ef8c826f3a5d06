#ifndef BYTESING_NN_AUTOGRAD_H_
#define BYTESING_NN_AUTOGRAD_H_

#include <deque>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "bytesing/common/matrix.h"

namespace bytesing::nn {

using Rng = std::mt19937_64;

// A trainable matrix with its accumulated gradient.
class Parameter {
 public:
  Parameter(std::string name, Matrix init);

  const std::string& name() const { return name_; }
  Matrix value;
  Matrix grad;

 private:
  std::string name_;
};

// Owns parameters in creation order; addresses stay stable.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Matrix init);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  void zero_grad();
  std::size_t num_scalars() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Records a computation graph for one forward pass and replays it backwards.
// A non-recording tape keeps values only, which is what inference uses.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Matrix value);
  // Leaf bound to `p`; backward() adds into p.grad. The value is not copied.
  Var param(Parameter& p);

  // Adds an op result. `backward` is kept only when some input needs a
  // gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, const std::vector<Var>& inputs, Backward backward);

  const Matrix& value(int id) const;
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  // Zero-initialised on first access.
  Matrix& grad(int id);
  void accumulate(int id, const Matrix& g);

  // Seeds d(loss)/d(loss) = 1 for a 1x1 node and propagates to parameters.
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
    bool has_grad = false;
  };

  Var push(Node node);

  std::deque<Node> nodes_;
  bool record_;
};

// Initialisers.
Matrix uniform_init(Index rows, Index cols, double limit, Rng& rng);
// Glorot/Xavier uniform with fan_in = rows, fan_out = cols.
Matrix glorot_init(Index rows, Index cols, Rng& rng);

}  // namespace bytesing::nn

#endif  // BYTESING_NN_AUTOGRAD_H_
