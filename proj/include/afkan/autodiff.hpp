#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "afkan/tensor.hpp"

namespace afkan {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Backward rule of one recorded op. Reads `self.grad` and the saved forward
// values (`self.value`, `self.inputs[i]->value`), and accumulates into the
// grad buffers of the inputs that require grad.
using BackwardFn = std::function<void(Node& self)>;

// One entry of the define-by-run tape.
struct Node {
  Tensor value;
  Tensor grad;
  bool has_grad = false;
  bool requires_grad = false;
  bool leaf = true;
  const char* op = "leaf";
  std::vector<NodePtr> inputs;
  BackwardFn backward;

  // Gradient buffer, zero-filled on first access.
  Tensor& grad_buffer();
};

// Handle to a tape node. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  static Var parameter(Tensor value) { return Var(std::move(value), true); }
  static Var constant(Tensor value) { return Var(std::move(value), false); }

  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }
  std::size_t rank() const { return node_->value.rank(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->leaf; }
  const char* op() const { return node_->op; }
  const NodePtr& node() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

  // Accumulated gradient; zeros when backward never reached this node.
  Tensor grad() const;
  void zero_grad();

  // Leaf values may be updated between tapes (optimizer steps, loading).
  Tensor& mutable_value();

 private:
  NodePtr node_;
};

// Records a new op on the tape. When no input requires grad, or recording is
// disabled, the result is a constant and `fn` is dropped.
Var make_result(Tensor value, std::vector<Var> inputs, const char* op, BackwardFn fn);

// Reverse sweep from a scalar loss. Leaf gradients accumulate across calls;
// intermediate gradients are recomputed each call.
void backward(const Var& loss);

bool grad_enabled();

// Disables tape recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool strict_division();

// While alive, division by an exact zero throws NumericError on this thread.
class StrictDivisionGuard {
 public:
  StrictDivisionGuard();
  ~StrictDivisionGuard();
  StrictDivisionGuard(const StrictDivisionGuard&) = delete;
  StrictDivisionGuard& operator=(const StrictDivisionGuard&) = delete;

 private:
  bool previous_;
};

// ---- elementwise (broadcasting) ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

Var add(const Var& a, double s);
Var sub(const Var& a, double s);
Var rsub(double s, const Var& a);  // s - a
Var mul(const Var& a, double s);
Var div(const Var& a, double s);

Var neg(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
Var tanh(const Var& x);
Var sqrt(const Var& x);
Var square(const Var& x);
Var pow(const Var& x, double exponent);
// max(x, s) elementwise; gradient passes where x >= s.
Var maximum(const Var& x, double s);

// ---- linear algebra / shape ----
// (M,K)x(K,N) or (B,M,K)x(K,N).
Var matmul(const Var& a, const Var& b);
Var reshape(const Var& x, Shape shape);
Var permute(const Var& x, std::vector<std::size_t> order);
Var transpose(const Var& x);

// ---- reductions ----
enum class Reduce { kSum, kMax, kMin, kMean };

Var reduce(Reduce op, const Var& x, long axis, bool keep = false);
Var sum(const Var& x, long axis, bool keep = false);
Var mean(const Var& x, long axis, bool keep = false);
Var max(const Var& x, long axis, bool keep = false);
Var min(const Var& x, long axis, bool keep = false);
Var sum_all(const Var& x);

// softmax(x / max(temperature, 1)) along `axis`, max-subtracted.
Var softmax(const Var& x, long axis, double temperature = 1.0);
// Same, with a learnable temperature (a single-element Var).
Var softmax(const Var& x, long axis, const Var& temperature);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator/(const Var& a, const Var& b) { return div(a, b); }
inline Var operator+(const Var& a, double s) { return add(a, s); }
inline Var operator-(const Var& a, double s) { return sub(a, s); }
inline Var operator*(const Var& a, double s) { return mul(a, s); }
inline Var operator/(const Var& a, double s) { return div(a, s); }
inline Var operator+(double s, const Var& a) { return add(a, s); }
inline Var operator-(double s, const Var& a) { return rsub(s, a); }
inline Var operator*(double s, const Var& a) { return mul(a, s); }
inline Var operator-(const Var& x) { return neg(x); }

}  // namespace afkan
