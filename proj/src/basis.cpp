#include "afkan/basis.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <tuple>
#include <type_traits>
#include <utility>

#include "afkan/detail/activation_impl.hpp"

namespace afkan {

namespace {

template <FunctionType F>
using TypeConst = std::integral_constant<FunctionType, F>;

template <class Fn>
decltype(auto) with_function_type(FunctionType type, Fn&& fn) {
  switch (type) {
    case FunctionType::kSum: return fn(TypeConst<FunctionType::kSum>{});
    case FunctionType::kProd: return fn(TypeConst<FunctionType::kProd>{});
    case FunctionType::kSumProd: return fn(TypeConst<FunctionType::kSumProd>{});
    case FunctionType::kQuad1: return fn(TypeConst<FunctionType::kQuad1>{});
    case FunctionType::kQuad2: return fn(TypeConst<FunctionType::kQuad2>{});
    case FunctionType::kCubic1: return fn(TypeConst<FunctionType::kCubic1>{});
    case FunctionType::kCubic2: return fn(TypeConst<FunctionType::kCubic2>{});
  }
  throw ValueError("unknown function type " + std::to_string(static_cast<int>(type)));
}

template <FunctionType F>
double combine_value(double p, double q) {
  if constexpr (F == FunctionType::kSum) {
    return p + q;
  } else if constexpr (F == FunctionType::kProd) {
    return p * q;
  } else if constexpr (F == FunctionType::kSumProd) {
    return p + q + p * q;
  } else if constexpr (F == FunctionType::kQuad1) {
    const double pq = p * q;
    return pq * pq;
  } else if constexpr (F == FunctionType::kQuad2) {
    const double pq = p * q;
    return p * p + q * q + pq * pq;
  } else if constexpr (F == FunctionType::kCubic1) {
    return (p + q) * (p * p + q * q);
  } else {
    const double pq = p * q;
    return pq * pq * pq;
  }
}

template <FunctionType F>
void combine_grad(double p, double q, double& dp, double& dq) {
  if constexpr (F == FunctionType::kSum) {
    dp = 1.0;
    dq = 1.0;
  } else if constexpr (F == FunctionType::kProd) {
    dp = q;
    dq = p;
  } else if constexpr (F == FunctionType::kSumProd) {
    dp = 1.0 + q;
    dq = 1.0 + p;
  } else if constexpr (F == FunctionType::kQuad1) {
    dp = 2.0 * p * q * q;
    dq = 2.0 * p * p * q;
  } else if constexpr (F == FunctionType::kQuad2) {
    dp = 2.0 * p + 2.0 * p * q * q;
    dq = 2.0 * q + 2.0 * p * p * q;
  } else if constexpr (F == FunctionType::kCubic1) {
    const double s2 = p * p + q * q;
    dp = s2 + 2.0 * p * (p + q);
    dq = s2 + 2.0 * q * (p + q);
  } else {
    const double pq = p * q;
    dp = 3.0 * pq * pq * q;
    dq = 3.0 * pq * pq * p;
  }
}

void check_compact_phases(const Var& low, const Var& high) {
  if (low.rank() != 1 || low.shape() != high.shape()) {
    throw ShapeError("compact phases must be matching rank-1 tensors, got " +
                     shape_str(low.shape()) + " and " + shape_str(high.shape()));
  }
}

void check_per_input_phases(const Var& x, const Var& low, const Var& high) {
  if (x.rank() != 2) throw ShapeError("expected (B, D) input, got " + shape_str(x.shape()));
  if (low.rank() != 2 || low.shape() != high.shape() || low.shape()[0] != x.shape()[1]) {
    throw ShapeError("per-input phases must be (D, n) with D = " + std::to_string(x.shape()[1]) +
                     ", got " + shape_str(low.shape()) + " and " + shape_str(high.shape()));
  }
}

Shape with_trailing(const Shape& shape, std::size_t extent) {
  Shape out = shape;
  out.push_back(extent);
  return out;
}

}  // namespace

void GridSpec::validate() const {
  if (grid < 1) throw ValueError("grid size must be >= 1, got " + std::to_string(grid));
  if (order < 1) throw ValueError("spline order must be >= 1, got " + std::to_string(order));
}

namespace {

// Endpoints near (low, low + width), each moved by at most a few ulps, whose
// floating-point difference equals width exactly.
std::pair<double, double> exact_interval(double low, double width) {
  constexpr int kReach = 6;
  auto step = [](double v, int ulps) {
    const double dir = ulps > 0 ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::abs(ulps); ++s) v = std::nextafter(v, dir);
    return v;
  };
  const double h0 = low + width;
  for (int r = 0; r <= kReach; ++r) {
    for (int dl = -r; dl <= r; ++dl) {
      for (int dh = -r; dh <= r; ++dh) {
        if (std::max(std::abs(dl), std::abs(dh)) != r) continue;
        const double l = step(low, dl);
        const double h = step(h0, dh);
        if (h - l == width) return {l, h};
      }
    }
  }
  return {low, h0};
}

}  // namespace

PhasePair phase_init(const GridSpec& spec, PhaseLayout layout, std::size_t d_in) {
  spec.validate();
  const std::size_t n = spec.count();
  const double g = static_cast<double>(spec.grid);
  const double k = static_cast<double>(spec.order);
  std::vector<double> low(n);
  std::vector<double> high(n);
  const double width = (k + 1.0) / g;
  for (std::size_t i = 0; i < n; ++i) {
    std::tie(low[i], high[i]) = exact_interval((static_cast<double>(i) - k) / g, width);
  }
  PhasePair pair;
  pair.layout = layout;
  if (layout == PhaseLayout::kCompact) {
    pair.low = Tensor(Shape{n}, std::move(low));
    pair.high = Tensor(Shape{n}, std::move(high));
    return pair;
  }
  if (d_in == 0) throw ValueError("per-input phase layout needs d_in >= 1");
  std::vector<double> low_rows;
  std::vector<double> high_rows;
  low_rows.reserve(d_in * n);
  high_rows.reserve(d_in * n);
  for (std::size_t r = 0; r < d_in; ++r) {
    low_rows.insert(low_rows.end(), low.begin(), low.end());
    high_rows.insert(high_rows.end(), high.begin(), high.end());
  }
  pair.low = Tensor(Shape{d_in, n}, std::move(low_rows));
  pair.high = Tensor(Shape{d_in, n}, std::move(high_rows));
  return pair;
}

std::string_view function_type_name(FunctionType type) {
  switch (type) {
    case FunctionType::kSum: return "sum";
    case FunctionType::kProd: return "prod";
    case FunctionType::kSumProd: return "sum_prod";
    case FunctionType::kQuad1: return "quad1";
    case FunctionType::kQuad2: return "quad2";
    case FunctionType::kCubic1: return "cubic1";
    case FunctionType::kCubic2: return "cubic2";
  }
  throw ValueError("unknown function type " + std::to_string(static_cast<int>(type)));
}

FunctionType parse_function_type(std::string_view name) {
  for (auto type : kAllFunctionTypes) {
    if (function_type_name(type) == name) return type;
  }
  throw ValueError("unknown function type '" + std::string(name) +
                   "' (expected sum, prod, sum_prod, quad1, quad2, cubic1, cubic2)");
}

double combine_scalar(FunctionType type, double p, double q) {
  return with_function_type(type,
                            [&](auto f) { return combine_value<decltype(f)::value>(p, q); });
}

void combine_partials(FunctionType type, double p, double q, double& dp, double& dq) {
  with_function_type(type, [&](auto f) { combine_grad<decltype(f)::value>(p, q, dp, dq); });
}

Tensor combine(FunctionType type, const Tensor& p, const Tensor& q) {
  if (p.shape() != q.shape()) {
    throw ShapeError("combine operands differ: " + shape_str(p.shape()) + " vs " +
                     shape_str(q.shape()));
  }
  Tensor out(p.shape());
  with_function_type(type, [&](auto f) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      out[i] = combine_value<decltype(f)::value>(p[i], q[i]);
    }
  });
  return out;
}

Var combine(FunctionType type, const Var& p, const Var& q) {
  if (p.shape() != q.shape()) {
    throw ShapeError("combine operands differ: " + shape_str(p.shape()) + " vs " +
                     shape_str(q.shape()));
  }
  switch (type) {
    case FunctionType::kSum: return p + q;
    case FunctionType::kProd: return p * q;
    case FunctionType::kSumProd: return p + q + p * q;
    case FunctionType::kQuad1: return square(p * q);
    case FunctionType::kQuad2: return square(p) + square(q) + square(p * q);
    case FunctionType::kCubic1: return (p + q) * (square(p) + square(q));
    case FunctionType::kCubic2: return pow(p * q, 3.0);
  }
  throw ValueError("unknown function type " + std::to_string(static_cast<int>(type)));
}

namespace {

constexpr std::size_t kSigmoidChunk = 128;

// Logistic function over a contiguous block, vectorized through Eigen.
void sigmoid_block(const double* in, double* out, std::size_t len) {
  Eigen::Map<const Eigen::ArrayXd> a(in, static_cast<Eigen::Index>(len));
  Eigen::Map<Eigen::ArrayXd> o(out, static_cast<Eigen::Index>(len));
  o = 1.0 / (1.0 + (-a).exp());
}

// SiLU / Sigmoid basis evaluation with the logistic terms computed in blocks.
template <ActivationTag kTag, FunctionType kType>
void basis_logistic(const double* xv, const double* lv, const double* hv, std::size_t m,
                    std::size_t n, double* ov, double* cp, double* cq) {
  const std::size_t rows = std::max<std::size_t>(1, kSigmoidChunk / n) * 8;
  Storage u(rows * n), w(rows * n), su(rows * n), sw(rows * n);
  for (std::size_t e0 = 0; e0 < m; e0 += rows) {
    const std::size_t cnt = std::min(rows, m - e0);
    const std::size_t len = cnt * n;
    for (std::size_t r = 0; r < cnt; ++r) {
      const double xe = xv[e0 + r];
      for (std::size_t i = 0; i < n; ++i) {
        u[r * n + i] = xe - lv[i];
        w[r * n + i] = hv[i] - xe;
      }
    }
    sigmoid_block(u.data(), su.data(), len);
    sigmoid_block(w.data(), sw.data(), len);
    const std::size_t base = e0 * n;
    for (std::size_t j = 0; j < len; ++j) {
      double p = 0.0, q = 0.0, ap = 0.0, aq = 0.0;
      if constexpr (kTag == ActivationTag::kSiLU) {
        p = u[j] * su[j];
        q = w[j] * sw[j];
        ap = su[j] * (1.0 + u[j] * (1.0 - su[j]));
        aq = sw[j] * (1.0 + w[j] * (1.0 - sw[j]));
      } else {
        p = su[j];
        q = sw[j];
        ap = su[j] * (1.0 - su[j]);
        aq = sw[j] * (1.0 - sw[j]);
      }
      ov[base + j] = combine_value<kType>(p, q);
      if (cp != nullptr) {
        double dp = 0.0;
        double dq = 0.0;
        combine_grad<kType>(p, q, dp, dq);
        cp[base + j] = dp * ap;
        cq[base + j] = dq * aq;
      }
    }
  }
}

}  // namespace

Var basis_A(const Var& x, const Var& low, const Var& high, const ActivationKind& act,
            FunctionType type) {
  check_compact_phases(low, high);
  (void)activation_name(act.tag);
  (void)function_type_name(type);
  const std::size_t n = low.size();
  const std::size_t m = x.size();
  const Shape shape = with_trailing(x.shape(), n);
  Tensor out(shape);
  const bool record = grad_enabled() &&
                      (x.requires_grad() || low.requires_grad() || high.requires_grad());
  // dA/du and -dA/dw per entry (u = x - l, w = h - x), kept for the backward rule.
  auto coef_p = std::make_shared<Tensor>(record ? shape : Shape{1});
  auto coef_q = std::make_shared<Tensor>(record ? shape : Shape{1});
  {
    const double* xv = x.value().data().data();
    const double* lv = low.value().data().data();
    const double* hv = high.value().data().data();
    double* ov = out.data().data();
    double* cp = coef_p->data().data();
    double* cq = coef_q->data().data();
    detail::with_tag(act.tag, [&](auto t) {
      with_function_type(type, [&](auto f) {
        constexpr ActivationTag kTag = decltype(t)::value;
        constexpr FunctionType kType = decltype(f)::value;
        if constexpr (kTag == ActivationTag::kSiLU || kTag == ActivationTag::kSigmoid) {
          basis_logistic<kTag, kType>(xv, lv, hv, m, n, ov, record ? cp : nullptr,
                                      record ? cq : nullptr);
          return;
        }
        for (std::size_t e = 0; e < m; ++e) {
          const double xe = xv[e];
          double* row = ov + e * n;
          if (!record) {
            for (std::size_t i = 0; i < n; ++i) {
              const double p = detail::value_of<kTag>(act, xe - lv[i]);
              const double q = detail::value_of<kTag>(act, hv[i] - xe);
              row[i] = combine_value<kType>(p, q);
            }
            continue;
          }
          for (std::size_t i = 0; i < n; ++i) {
            double ap = 0.0;
            double aq = 0.0;
            const double p = detail::value_and_derivative_of<kTag>(act, xe - lv[i], ap);
            const double q = detail::value_and_derivative_of<kTag>(act, hv[i] - xe, aq);
            row[i] = combine_value<kType>(p, q);
            double dp = 0.0;
            double dq = 0.0;
            combine_grad<kType>(p, q, dp, dq);
            cp[e * n + i] = dp * ap;
            cq[e * n + i] = dq * aq;
          }
        }
      });
    });
  }
  return make_result(std::move(out), {x, low, high}, "basis_A", [coef_p, coef_q, n, m](Node& self) {
    Node& nx = *self.inputs[0];
    Node& nl = *self.inputs[1];
    Node& nh = *self.inputs[2];
    const double* g = self.grad.data().data();
    const double* cp = coef_p->data().data();
    const double* cq = coef_q->data().data();
    double* gx = nx.requires_grad ? nx.grad_buffer().data().data() : nullptr;
    double* gl = nl.requires_grad ? nl.grad_buffer().data().data() : nullptr;
    double* gh = nh.requires_grad ? nh.grad_buffer().data().data() : nullptr;
    // Phase gradients are reduced into locals first; n is small.
    std::vector<double> acc_l(n, 0.0);
    std::vector<double> acc_h(n, 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      const std::size_t base = e * n;
      double sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double gp = g[base + i] * cp[base + i];
        const double gq = g[base + i] * cq[base + i];
        sx += gp - gq;
        acc_l[i] -= gp;
        acc_h[i] += gq;
      }
      if (gx) gx[e] += sx;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (gl) gl[i] += acc_l[i];
      if (gh) gh[i] += acc_h[i];
    }
  });
}

Var basis_A_composed(const Var& x, const Var& low, const Var& high, const ActivationKind& act,
                     FunctionType type) {
  check_compact_phases(low, high);
  const Var xe = reshape(x, with_trailing(x.shape(), 1));
  const Var p = activation(xe - low, act);
  const Var q = activation(high - xe, act);
  return combine(type, p, q);
}

Var relu_kan_R(const Var& x, const Var& low, const Var& high) {
  check_per_input_phases(x, low, high);
  const std::size_t batch = x.shape()[0];
  const std::size_t d = x.shape()[1];
  const std::size_t n = low.shape()[1];
  const auto& lv = low.value();
  const auto& hv = high.value();
  for (std::size_t j = 0; j < lv.size(); ++j) {
    if (hv[j] == lv[j]) {
      throw ValueError("relu_kan_R: phase high equals phase low at index " + std::to_string(j) +
                       " (normalization constant undefined)");
    }
  }
  // c = 16 / (h - l)^4 from the live phases.
  std::vector<double> c(lv.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double w = hv[j] - lv[j];
    c[j] = 16.0 / (w * w * w * w);
  }
  Tensor out(Shape{batch, d, n});
  const auto& xv = x.value();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t r = 0; r < d; ++r) {
      const double xe = xv[b * d + r];
      double* row = out.data().data() + (b * d + r) * n;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = r * n + i;
        const double a = std::max(xe - lv[j], 0.0);
        const double q = std::max(hv[j] - xe, 0.0);
        const double pq = a * q;
        row[i] = pq * pq * c[j];
      }
    }
  }
  return make_result(
      std::move(out), {x, low, high}, "relu_kan_R",
      [batch, d, n, c = std::move(c)](Node& self) {
        Node& nx = *self.inputs[0];
        Node& nl = *self.inputs[1];
        Node& nh = *self.inputs[2];
        const auto& xv = nx.value;
        const auto& lv = nl.value;
        const auto& hv = nh.value;
        double* gx = nx.requires_grad ? nx.grad_buffer().data().data() : nullptr;
        double* gl = nl.requires_grad ? nl.grad_buffer().data().data() : nullptr;
        double* gh = nh.requires_grad ? nh.grad_buffer().data().data() : nullptr;
        const double* g = self.grad.data().data();
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t r = 0; r < d; ++r) {
            const double xe = xv[b * d + r];
            const double* grow = g + (b * d + r) * n;
            double sx = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const std::size_t j = r * n + i;
              const double u = xe - lv[j];
              const double v = hv[j] - xe;
              const double a = std::max(u, 0.0);
              const double q = std::max(v, 0.0);
              const double da = u >= 0.0 ? 1.0 : 0.0;
              const double dq = v >= 0.0 ? 1.0 : 0.0;
              const double w = hv[j] - lv[j];
              const double pq = a * q;
              const double value = pq * pq * c[j];
              // d/da (a q)^2 c = 2 a q^2 c, likewise for q; dc/dl = 4c/w = -dc/dh.
              const double ga_term = grow[i] * 2.0 * a * q * q * c[j] * da;
              const double gq_term = grow[i] * 2.0 * a * a * q * c[j] * dq;
              const double gc_term = grow[i] * value * 4.0 / w;
              sx += ga_term - gq_term;
              if (gl) gl[j] += -ga_term + gc_term;
              if (gh) gh[j] += gq_term - gc_term;
            }
            if (gx) gx[b * d + r] += sx;
          }
        }
      });
}

Var relu_kan_R_composed(const Var& x, const Var& low, const Var& high) {
  check_per_input_phases(x, low, high);
  const ActivationKind relu = ActivationKind::of(ActivationTag::kReLU);
  const Var xe = reshape(x, with_trailing(x.shape(), 1));
  const Var a = activation(xe - low, relu);
  const Var q = activation(high - xe, relu);
  const Var c = 16.0 * pow(high - low, -4.0);
  return square(a * q) * c;
}

Tensor linspace(double lo, double hi, std::size_t count) {
  if (count == 0) throw ValueError("linspace needs count >= 1");
  Tensor out(Shape{count});
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  return out;
}

Var grbf(const Var& x, const Tensor& centers, double h) {
  if (!(h > 0.0)) throw ValueError("grbf: h must be > 0, got " + std::to_string(h));
  if (centers.rank() != 1) throw ShapeError("grbf: centers must be rank 1");
  const Var xe = reshape(x, with_trailing(x.shape(), 1));
  const Var r = xe - Var::constant(centers);
  return exp(square(r) * (-1.0 / (2.0 * h * h)));
}

Var rswaf(const Var& x, const Tensor& centers, double h) {
  if (!(h > 0.0)) throw ValueError("rswaf: h must be > 0, got " + std::to_string(h));
  if (centers.rank() != 1) throw ShapeError("rswaf: centers must be rank 1");
  const Var xe = reshape(x, with_trailing(x.shape(), 1));
  const Var t = tanh((xe - Var::constant(centers)) / h);
  return 1.0 - square(t);
}

Tensor bspline_basis(const Tensor& x, const GridSpec& spec, double lo, double hi) {
  spec.validate();
  if (!(lo < hi)) {
    throw ValueError("bspline_basis: range lower bound must be below upper bound");
  }
  const int g = spec.grid;
  const int k = spec.order;
  const double step = (hi - lo) / static_cast<double>(g);
  const std::size_t knot_count = static_cast<std::size_t>(g + 2 * k + 1);
  std::vector<double> knots(knot_count);
  for (std::size_t j = 0; j < knot_count; ++j) {
    knots[j] = lo + (static_cast<double>(j) - k) * step;
  }
  const std::size_t n = spec.count();
  Tensor out(with_trailing(x.shape(), n));
  std::vector<double> basis(knot_count - 1);
  for (std::size_t e = 0; e < x.size(); ++e) {
    const double v = x[e];
    for (std::size_t j = 0; j + 1 < knot_count; ++j) {
      basis[j] = (v >= knots[j] && v < knots[j + 1]) ? 1.0 : 0.0;
    }
    for (int p = 1; p <= k; ++p) {
      const std::size_t active = knot_count - 1 - static_cast<std::size_t>(p);
      for (std::size_t j = 0; j < active; ++j) {
        const double left = (v - knots[j]) / (knots[j + p] - knots[j]) * basis[j];
        const double right =
            (knots[j + p + 1] - v) / (knots[j + p + 1] - knots[j + 1]) * basis[j + 1];
        basis[j] = left + right;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out[e * n + i] = basis[i];
  }
  return out;
}

}  // namespace afkan
