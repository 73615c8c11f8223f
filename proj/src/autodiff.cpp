#include "afkan/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace afkan {

namespace {

thread_local bool g_grad_enabled = true;
thread_local bool g_strict_division = false;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

// Per-dimension strides of an operand aligned to the broadcast output shape.
// Broadcast (extent 1 or missing) dimensions get stride 0.
std::vector<std::size_t> aligned_strides(const Shape& operand, const Shape& out) {
  const std::size_t r = out.size();
  std::vector<std::size_t> strides(r, 0);
  std::size_t stride = 1;
  for (std::size_t i = 0; i < operand.size(); ++i) {
    const std::size_t src = operand.size() - 1 - i;
    const std::size_t dst = r - 1 - i;
    strides[dst] = operand[src] == 1 ? 0 : stride;
    stride *= operand[src];
  }
  return strides;
}

struct BroadcastPlan {
  Shape out;
  std::vector<std::size_t> sa;
  std::vector<std::size_t> sb;
  // kRepeat: operand index = i / k (operand spans the leading output dims).
  // kTile: operand index = i % k (operand spans the trailing output dims).
  enum class Kind { kSame, kScalarB, kScalarA, kRepeatB, kTileB, kRepeatA, kTileA, kGeneral } kind;
  std::size_t k = 1;
};

enum class Layout { kOther, kRepeat, kTile };

// How an operand maps onto the full output when its non-unit extents form a
// contiguous leading (repeat) or trailing (tile) block of the output shape.
Layout classify(const Shape& operand, const Shape& out) {
  const std::size_t r = out.size();
  Shape padded(r, 1);
  std::copy(operand.begin(), operand.end(), padded.begin() + static_cast<long>(r - operand.size()));
  std::size_t t = 0;
  while (t < r && padded[t] == out[t]) ++t;
  bool ones = true;
  for (std::size_t j = t; j < r; ++j) ones = ones && padded[j] == 1;
  if (ones) return Layout::kRepeat;
  t = r;
  while (t > 0 && padded[t - 1] == out[t - 1]) --t;
  ones = true;
  for (std::size_t j = 0; j < t; ++j) ones = ones && padded[j] == 1;
  return ones ? Layout::kTile : Layout::kOther;
}

BroadcastPlan plan_broadcast(const Shape& a, const Shape& b) {
  BroadcastPlan p;
  p.out = broadcast_shape(a, b);
  const std::size_t na = shape_numel(a);
  const std::size_t nb = shape_numel(b);
  const std::size_t no = shape_numel(p.out);
  if (na == no && nb == no) {
    p.kind = BroadcastPlan::Kind::kSame;
    return p;
  }
  if (nb == 1 && na == no) {
    p.kind = BroadcastPlan::Kind::kScalarB;
    return p;
  }
  if (na == 1 && nb == no) {
    p.kind = BroadcastPlan::Kind::kScalarA;
    return p;
  }
  if (na == no) {
    const Layout l = classify(b, p.out);
    if (l == Layout::kRepeat) {
      p.kind = BroadcastPlan::Kind::kRepeatB;
      p.k = no / nb;
      return p;
    }
    if (l == Layout::kTile) {
      p.kind = BroadcastPlan::Kind::kTileB;
      p.k = nb;
      return p;
    }
  }
  if (nb == no) {
    const Layout l = classify(a, p.out);
    if (l == Layout::kRepeat) {
      p.kind = BroadcastPlan::Kind::kRepeatA;
      p.k = no / na;
      return p;
    }
    if (l == Layout::kTile) {
      p.kind = BroadcastPlan::Kind::kTileA;
      p.k = na;
      return p;
    }
  }
  p.kind = BroadcastPlan::Kind::kGeneral;
  p.sa = aligned_strides(a, p.out);
  p.sb = aligned_strides(b, p.out);
  return p;
}

// Calls fn(out_index, a_index, b_index) over the broadcast output.
template <class Fn>
void for_each_broadcast(const BroadcastPlan& p, Fn&& fn) {
  const std::size_t n = shape_numel(p.out);
  const std::size_t k = p.k;
  switch (p.kind) {
    case BroadcastPlan::Kind::kSame:
      for (std::size_t i = 0; i < n; ++i) fn(i, i, i);
      return;
    case BroadcastPlan::Kind::kScalarB:
      for (std::size_t i = 0; i < n; ++i) fn(i, i, std::size_t{0});
      return;
    case BroadcastPlan::Kind::kScalarA:
      for (std::size_t i = 0; i < n; ++i) fn(i, std::size_t{0}, i);
      return;
    case BroadcastPlan::Kind::kRepeatB:
      for (std::size_t o = 0, i = 0; o < n / k; ++o) {
        for (std::size_t j = 0; j < k; ++j, ++i) fn(i, i, o);
      }
      return;
    case BroadcastPlan::Kind::kTileB:
      for (std::size_t i = 0; i < n; i += k) {
        for (std::size_t j = 0; j < k; ++j) fn(i + j, i + j, j);
      }
      return;
    case BroadcastPlan::Kind::kRepeatA:
      for (std::size_t o = 0, i = 0; o < n / k; ++o) {
        for (std::size_t j = 0; j < k; ++j, ++i) fn(i, o, i);
      }
      return;
    case BroadcastPlan::Kind::kTileA:
      for (std::size_t i = 0; i < n; i += k) {
        for (std::size_t j = 0; j < k; ++j) fn(i + j, j, i + j);
      }
      return;
    case BroadcastPlan::Kind::kGeneral:
      break;
  }
  const std::size_t r = p.out.size();
  const std::size_t inner = p.out[r - 1];
  const std::size_t step_a = p.sa[r - 1];
  const std::size_t step_b = p.sb[r - 1];
  const std::size_t outer = n / inner;
  std::vector<std::size_t> counter(r, 0);
  std::size_t base_a = 0;
  std::size_t base_b = 0;
  std::size_t i = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t ia = base_a;
    std::size_t ib = base_b;
    for (std::size_t j = 0; j < inner; ++j, ++i, ia += step_a, ib += step_b) fn(i, ia, ib);
    for (std::size_t d = r - 1; d-- > 0;) {
      ++counter[d];
      base_a += p.sa[d];
      base_b += p.sb[d];
      if (counter[d] < p.out[d]) break;
      base_a -= p.sa[d] * p.out[d];
      base_b -= p.sb[d] * p.out[d];
      counter[d] = 0;
    }
  }
}

template <class F, class DA, class DB>
Var binary_op(const Var& a, const Var& b, const char* name, F f, DA da, DB db) {
  BroadcastPlan plan = plan_broadcast(a.shape(), b.shape());
  Tensor out(plan.out);
  const double* av = a.value().data().data();
  const double* bv = b.value().data().data();
  double* ov = out.data().data();
  for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
    ov[i] = f(av[ia], bv[ib]);
  });
  return make_result(std::move(out), {a, b}, name, [plan = std::move(plan), da, db](Node& self) {
    const Node& na = *self.inputs[0];
    const Node& nb = *self.inputs[1];
    const double* g = self.grad.data().data();
    const double* av = na.value.data().data();
    const double* bv = nb.value.data().data();
    const double* ov = self.value.data().data();
    if (na.requires_grad) {
      double* ga = self.inputs[0]->grad_buffer().data().data();
      for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
        ga[ia] += g[i] * da(av[ia], bv[ib], ov[i]);
      });
    }
    if (nb.requires_grad) {
      double* gb = self.inputs[1]->grad_buffer().data().data();
      for_each_broadcast(plan, [&](std::size_t i, std::size_t ia, std::size_t ib) {
        gb[ib] += g[i] * db(av[ia], bv[ib], ov[i]);
      });
    }
  });
}

// f(x) and df(x, y) with y = f(x).
template <class F, class DF>
Var unary_op(const Var& x, const char* name, F f, DF df) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  const std::size_t n = xv.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = f(xv[i]);
  return make_result(std::move(out), {x}, name, [df](Node& self) {
    const Node& in = *self.inputs[0];
    if (!in.requires_grad) return;
    double* gx = self.inputs[0]->grad_buffer().data().data();
    const double* g = self.grad.data().data();
    const double* xv = in.value.data().data();
    const double* yv = self.value.data().data();
    const std::size_t n = self.value.size();
    for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * df(xv[i], yv[i]);
  });
}

void check_divisor(const Tensor& b) {
  if (!g_strict_division) return;
  for (double v : b.data()) {
    if (v == 0.0) throw NumericError("division by exact zero (strict mode)");
  }
}

struct AxisSplit {
  std::size_t outer;
  std::size_t extent;
  std::size_t inner;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

// ---- Node / Var ----

Tensor& Node::grad_buffer() {
  if (!has_grad) {
    grad = Tensor(value.shape());
    has_grad = true;
  }
  return grad;
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor Var::grad() const {
  if (node_->has_grad) return node_->grad;
  return Tensor(node_->value.shape());
}

void Var::zero_grad() {
  node_->has_grad = false;
  node_->grad = Tensor();
}

Tensor& Var::mutable_value() {
  if (!node_->leaf) throw ValueError("only leaf values may be mutated");
  return node_->value;
}

Var make_result(Tensor value, std::vector<Var> inputs, const char* op, BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = op;
  node->leaf = false;
  if (g_grad_enabled) {
    const bool any = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Var& v) { return v.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      node->inputs.reserve(inputs.size());
      for (auto& v : inputs) node->inputs.push_back(v.node());
      node->backward = std::move(fn);
    }
  }
  return Var(std::move(node));
}

void backward(const Var& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Leaf contributions of this sweep are collected in fresh buffers and added
  // to the previously accumulated gradient afterwards, so repeating a sweep
  // adds a bitwise-identical increment.
  std::vector<std::pair<Node*, Tensor>> previous;
  for (Node* n : order) {
    if (n->leaf && n->has_grad) previous.emplace_back(n, std::move(n->grad));
    n->has_grad = false;
    n->grad = Tensor();
  }
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->leaf || !n->backward || !n->has_grad) continue;
    n->backward(*n);
  }
  for (Node* n : order) {
    if (!n->leaf) {
      n->has_grad = false;
      n->grad = Tensor();
    }
  }
  for (auto& [n, old] : previous) {
    if (n->has_grad) {
      for (std::size_t i = 0; i < old.size(); ++i) old[i] += n->grad[i];
    }
    n->grad = std::move(old);
    n->has_grad = true;
  }
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool strict_division() { return g_strict_division; }

StrictDivisionGuard::StrictDivisionGuard() : previous_(g_strict_division) {
  g_strict_division = true;
}
StrictDivisionGuard::~StrictDivisionGuard() { g_strict_division = previous_; }

// ---- elementwise ----

Var add(const Var& a, const Var& b) {
  return binary_op(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
  return binary_op(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
  return binary_op(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; }, [](double x, double, double) { return x; });
}

Var div(const Var& a, const Var& b) {
  check_divisor(b.value());
  return binary_op(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; },
      [](double x, double y, double) { return -x / (y * y); });
}

Var add(const Var& a, double s) {
  return unary_op(
      a, "add_scalar", [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var sub(const Var& a, double s) {
  return unary_op(
      a, "sub_scalar", [s](double x) { return x - s; }, [](double, double) { return 1.0; });
}

Var rsub(double s, const Var& a) {
  return unary_op(
      a, "rsub_scalar", [s](double x) { return s - x; }, [](double, double) { return -1.0; });
}

Var mul(const Var& a, double s) {
  return unary_op(
      a, "mul_scalar", [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Var div(const Var& a, double s) {
  if (g_strict_division && s == 0.0) throw NumericError("division by exact zero (strict mode)");
  return unary_op(
      a, "div_scalar", [s](double x) { return x / s; }, [s](double, double) { return 1.0 / s; });
}

Var neg(const Var& x) {
  return unary_op(
      x, "neg", [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Var exp(const Var& x) {
  return unary_op(
      x, "exp", [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var log(const Var& x) {
  return unary_op(
      x, "log", [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var tanh(const Var& x) {
  return unary_op(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sqrt(const Var& x) {
  return unary_op(
      x, "sqrt", [](double v) { return std::sqrt(v); },
      [](double, double y) { return 0.5 / y; });
}

Var square(const Var& x) {
  return unary_op(
      x, "square", [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var pow(const Var& x, double exponent) {
  return unary_op(
      x, "pow", [exponent](double v) { return std::pow(v, exponent); },
      [exponent](double v, double) { return exponent * std::pow(v, exponent - 1.0); });
}

Var maximum(const Var& x, double s) {
  return unary_op(
      x, "maximum_scalar", [s](double v) { return v >= s ? v : s; },
      [s](double v, double) { return v >= s ? 1.0 : 0.0; });
}

// ---- linear algebra / shape ----

Var matmul(const Var& a, const Var& b) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if ((as.size() != 2 && as.size() != 3) || bs.size() != 2) {
    throw ShapeError("matmul expects rank-2/3 x rank-2, got " + shape_str(as) + " x " +
                     shape_str(bs));
  }
  const std::size_t k = as.back();
  if (k != bs[0]) {
    throw ShapeError("matmul inner dimensions differ: " + shape_str(as) + " x " + shape_str(bs));
  }
  const std::size_t m = a.size() / k;
  const std::size_t n = bs[1];
  Shape out_shape = as;
  out_shape.back() = n;
  Tensor out(out_shape);
  MutMap(out.data().data(), static_cast<long>(m), static_cast<long>(n)).noalias() =
      ConstMap(a.value().data().data(), static_cast<long>(m), static_cast<long>(k)) *
      ConstMap(b.value().data().data(), static_cast<long>(k), static_cast<long>(n));
  return make_result(std::move(out), {a, b}, "matmul", [m, k, n](Node& self) {
    ConstMap g(self.grad.data().data(), static_cast<long>(m), static_cast<long>(n));
    ConstMap av(self.inputs[0]->value.data().data(), static_cast<long>(m), static_cast<long>(k));
    ConstMap bv(self.inputs[1]->value.data().data(), static_cast<long>(k), static_cast<long>(n));
    if (self.inputs[0]->requires_grad) {
      MutMap ga(self.inputs[0]->grad_buffer().data().data(), static_cast<long>(m),
                static_cast<long>(k));
      ga.noalias() += g * bv.transpose();
    }
    if (self.inputs[1]->requires_grad) {
      MutMap gb(self.inputs[1]->grad_buffer().data().data(), static_cast<long>(k),
                static_cast<long>(n));
      gb.noalias() += av.transpose() * g;
    }
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_result(std::move(out), {x}, "reshape", [](Node& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    const std::size_t n = gx.size();
    for (std::size_t i = 0; i < n; ++i) gx[i] += self.grad[i];
  });
}

Var permute(const Var& x, std::vector<std::size_t> order) {
  const Shape& in_shape = x.shape();
  const std::size_t r = in_shape.size();
  if (order.size() != r) throw ShapeError("permute order length differs from rank");
  std::vector<bool> seen(r, false);
  for (auto o : order) {
    if (o >= r || seen[o]) throw ShapeError("permute order is not a permutation");
    seen[o] = true;
  }
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  Shape out_shape(r);
  std::vector<std::size_t> src_strides(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = in_shape[order[i]];
    src_strides[i] = in_strides[order[i]];
  }
  // Source offset for every output element.
  const std::size_t n = x.size();
  auto index = std::make_shared<std::vector<std::size_t>>(n);
  std::vector<std::size_t> counter(r, 0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    (*index)[i] = offset;
    for (std::size_t d = r; d-- > 0;) {
      ++counter[d];
      offset += src_strides[d];
      if (counter[d] < out_shape[d]) break;
      offset -= src_strides[d] * out_shape[d];
      counter[d] = 0;
    }
  }
  Tensor out(out_shape);
  const auto& xv = x.value();
  for (std::size_t i = 0; i < n; ++i) out[i] = xv[(*index)[i]];
  return make_result(std::move(out), {x}, "permute", [index](Node& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    const std::size_t n = self.grad.size();
    for (std::size_t i = 0; i < n; ++i) gx[(*index)[i]] += self.grad[i];
  });
}

Var transpose(const Var& x) {
  if (x.rank() != 2) throw ShapeError("transpose expects rank 2, got " + shape_str(x.shape()));
  return permute(x, {1, 0});
}

// ---- reductions ----

Var reduce(Reduce op, const Var& x, long axis, bool keep) {
  const Shape& shape = x.shape();
  const std::size_t ax = normalize_axis(axis, shape.size());
  const AxisSplit s = split_axis(shape, ax);
  Shape out_shape = shape;
  if (keep) {
    out_shape[ax] = 1;
  } else {
    out_shape.erase(out_shape.begin() + static_cast<long>(ax));
  }
  Tensor out(out_shape);
  const auto& xv = x.value();

  if (op == Reduce::kSum || op == Reduce::kMean) {
    const double scale = op == Reduce::kMean ? 1.0 / static_cast<double>(s.extent) : 1.0;
    if (s.inner == 1) {
      // Reduction over the last axis: contiguous runs.
      const double* xp = xv.data().data();
      for (std::size_t o = 0; o < s.outer; ++o) {
        double acc = 0.0;
        for (std::size_t e = 0; e < s.extent; ++e) acc += xp[o * s.extent + e];
        out[o] = acc * scale;
      }
      return make_result(std::move(out), {x}, op == Reduce::kSum ? "sum" : "mean",
                         [s, scale](Node& self) {
                           double* gx = self.inputs[0]->grad_buffer().data().data();
                           const double* g = self.grad.data().data();
                           for (std::size_t o = 0; o < s.outer; ++o) {
                             const double go = scale * g[o];
                             for (std::size_t e = 0; e < s.extent; ++e) gx[o * s.extent + e] += go;
                           }
                         });
    }
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t e = 0; e < s.extent; ++e) {
        const std::size_t base = (o * s.extent + e) * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) out[o * s.inner + i] += xv[base + i];
      }
    }
    if (scale != 1.0) {
      for (auto& v : out.data()) v *= scale;
    }
    return make_result(std::move(out), {x}, op == Reduce::kSum ? "sum" : "mean",
                       [s, scale](Node& self) {
                         auto& gx = self.inputs[0]->grad_buffer();
                         for (std::size_t o = 0; o < s.outer; ++o) {
                           for (std::size_t e = 0; e < s.extent; ++e) {
                             const std::size_t base = (o * s.extent + e) * s.inner;
                             for (std::size_t i = 0; i < s.inner; ++i) {
                               gx[base + i] += scale * self.grad[o * s.inner + i];
                             }
                           }
                         }
                       });
  }

  // max/min: first extremal index wins ties.
  const bool is_max = op == Reduce::kMax;
  auto arg = std::make_shared<std::vector<std::size_t>>(s.outer * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      std::size_t best = o * s.extent * s.inner + i;
      for (std::size_t e = 1; e < s.extent; ++e) {
        const std::size_t idx = (o * s.extent + e) * s.inner + i;
        if (is_max ? xv[idx] > xv[best] : xv[idx] < xv[best]) best = idx;
      }
      (*arg)[o * s.inner + i] = best;
      out[o * s.inner + i] = xv[best];
    }
  }
  return make_result(std::move(out), {x}, is_max ? "max" : "min", [arg](Node& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    for (std::size_t j = 0; j < arg->size(); ++j) gx[(*arg)[j]] += self.grad[j];
  });
}

Var sum(const Var& x, long axis, bool keep) { return reduce(Reduce::kSum, x, axis, keep); }
Var mean(const Var& x, long axis, bool keep) { return reduce(Reduce::kMean, x, axis, keep); }
Var max(const Var& x, long axis, bool keep) { return reduce(Reduce::kMax, x, axis, keep); }
Var min(const Var& x, long axis, bool keep) { return reduce(Reduce::kMin, x, axis, keep); }

Var sum_all(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return make_result(Tensor::scalar(total), {x}, "sum_all", [](Node& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    const double g = self.grad[0];
    for (auto& v : gx.data()) v += g;
  });
}

Var softmax(const Var& x, long axis, double temperature) {
  const Shape& shape = x.shape();
  const std::size_t ax = normalize_axis(axis, shape.size());
  const AxisSplit s = split_axis(shape, ax);
  const double inv_t = 1.0 / std::max(temperature, 1.0);
  const auto& xv = x.value();
  Tensor out(shape);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < s.extent; ++e) peak = std::max(peak, xv[base + e * s.inner]);
      double total = 0.0;
      for (std::size_t e = 0; e < s.extent; ++e) {
        const double v = std::exp((xv[base + e * s.inner] - peak) * inv_t);
        out[base + e * s.inner] = v;
        total += v;
      }
      for (std::size_t e = 0; e < s.extent; ++e) out[base + e * s.inner] /= total;
    }
  }
  return make_result(std::move(out), {x}, "softmax", [s, inv_t](Node& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    const auto& y = self.value;
    const auto& g = self.grad;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.extent * s.inner + i;
        double dot = 0.0;
        for (std::size_t e = 0; e < s.extent; ++e) {
          dot += g[base + e * s.inner] * y[base + e * s.inner];
        }
        for (std::size_t e = 0; e < s.extent; ++e) {
          const std::size_t idx = base + e * s.inner;
          gx[idx] += inv_t * y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

Var softmax(const Var& x, long axis, const Var& temperature) {
  if (temperature.size() != 1) {
    throw ShapeError("temperature must be a single element, got " +
                     shape_str(temperature.shape()));
  }
  return softmax(div(x, maximum(temperature, 1.0)), axis, 1.0);
}

}  // namespace afkan
