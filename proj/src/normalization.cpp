#include "afkan/normalization.hpp"

#include <cmath>

namespace afkan {

namespace {

void check_affine(const Var& x, const Var& gain, const Var& bias) {
  if (x.rank() != 2) throw ShapeError("normalization expects (B, D), got " + shape_str(x.shape()));
  const Shape want{x.shape()[1]};
  if (gain.shape() != want || bias.shape() != want) {
    throw ShapeError("norm affine shapes " + shape_str(gain.shape()) + "/" +
                     shape_str(bias.shape()) + " do not match " + shape_str(want));
  }
}

}  // namespace

std::string_view norm_kind_name(NormKind kind) {
  switch (kind) {
    case NormKind::kLayer: return "layer";
    case NormKind::kBatch: return "batch";
    case NormKind::kNone: return "none";
  }
  throw ValueError("unknown norm kind");
}

NormKind parse_norm_kind(std::string_view name) {
  if (name == "layer") return NormKind::kLayer;
  if (name == "batch") return NormKind::kBatch;
  if (name == "none") return NormKind::kNone;
  throw ValueError("unknown normalization '" + std::string(name) + "' (expected layer|batch|none)");
}

NormParams NormParams::make(NormKind kind, std::size_t width) {
  NormParams p;
  p.kind = kind;
  if (kind == NormKind::kNone) return p;
  p.gain = Var::parameter(Tensor(Shape{width}, 1.0));
  p.bias = Var::parameter(Tensor(Shape{width}, 0.0));
  if (kind == NormKind::kBatch) {
    p.running_mean = Tensor(Shape{width}, 0.0);
    p.running_var = Tensor(Shape{width}, 1.0);
  }
  return p;
}

Var l2_minmax(const Var& x, double lo, double hi) {
  if (!(lo < hi)) throw ValueError("l2_minmax: target range must satisfy lo < hi");
  const auto& xv = x.value();
  const std::size_t n = xv.size();

  double sq = 0.0;
  for (double v : xv.data()) sq += v * v;
  const double norm = std::sqrt(sq);
  const double inv_norm = norm > 0.0 ? 1.0 / norm : 1.0;

  // Extremes of the scaled tensor sit at the extremes of x (positive scale).
  std::size_t arg_min = 0;
  std::size_t arg_max = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (xv[i] < xv[arg_min]) arg_min = i;
    if (xv[i] > xv[arg_max]) arg_max = i;
  }
  const double o_min = xv[arg_min] * inv_norm;
  const double o_max = xv[arg_max] * inv_norm;
  const double spread = o_max - o_min;
  const double range = hi - lo;

  Tensor out(xv.shape(), lo);
  const bool flat = !(spread > 0.0);
  if (!flat) {
    for (std::size_t i = 0; i < n; ++i) {
      const double y = (xv[i] * inv_norm - o_min) / spread;
      out[i] = lo + range * y;
    }
  }
  return make_result(
      std::move(out), {x}, "l2_minmax",
      [flat, norm, inv_norm, arg_min, arg_max, o_min, o_max, spread, range](Node& self) {
        if (flat) return;
        double* gx = self.inputs[0]->grad_buffer().data().data();
        const double* xv = self.inputs[0]->value.data().data();
        const double* g = self.grad.data().data();
        const std::size_t n = self.inputs[0]->value.size();
        // With y_i = (o_i - o_min) / s and upstream gy_i = range * g_i:
        //   dL/do_i    = gy_i / s  (+ extreme-element terms below)
        //   dL/do_min  = sum gy_i (y_i - 1) / s,  dL/do_max = -sum gy_i y_i / s
        const double inv_spread = 1.0 / spread;
        double s1 = 0.0;  // sum gy_i
        double sx = 0.0;  // sum gy_i x_i
        for (std::size_t i = 0; i < n; ++i) {
          s1 += g[i];
          sx += g[i] * xv[i];
        }
        s1 *= range;
        sx *= range;
        const double sy = inv_spread * (inv_norm * sx - o_min * s1);  // sum gy_i y_i
        const double g_min = (sy - s1) * inv_spread;
        const double g_max = -sy * inv_spread;
        const double scale = range * inv_spread;
        if (norm > 0.0) {
          // o = x / |x|: dx = (go - o <go, o>) / |x|.
          const double dot = inv_spread * inv_norm * sx + g_min * o_min + g_max * o_max;
          const double c = inv_norm * inv_norm * dot;
          for (std::size_t i = 0; i < n; ++i) gx[i] += scale * g[i] * inv_norm - xv[i] * c;
          gx[arg_min] += g_min * inv_norm;
          gx[arg_max] += g_max * inv_norm;
        } else {
          for (std::size_t i = 0; i < n; ++i) gx[i] += scale * g[i];
          gx[arg_min] += g_min;
          gx[arg_max] += g_max;
        }
      });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  check_affine(x, gain, bias);
  const std::size_t rows = x.shape()[0];
  const std::size_t d = x.shape()[1];
  const auto& xv = x.value();
  const auto& gv = gain.value();
  const auto& bv = bias.value();
  Tensor out(x.shape());
  auto xhat = std::make_shared<Tensor>(x.shape());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data().data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * inv;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  return make_result(std::move(out), {x, gain, bias}, "layer_norm",
                     [rows, d, xhat, inv_std](Node& self) {
                       Node& nx = *self.inputs[0];
                       Node& ng = *self.inputs[1];
                       Node& nb = *self.inputs[2];
                       const auto& g = self.grad;
                       const auto& gv = ng.value;
                       if (ng.requires_grad || nb.requires_grad) {
                         for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t j = 0; j < d; ++j) {
                             const double gr = g[r * d + j];
                             if (ng.requires_grad) ng.grad_buffer()[j] += gr * (*xhat)[r * d + j];
                             if (nb.requires_grad) nb.grad_buffer()[j] += gr;
                           }
                         }
                       }
                       if (!nx.requires_grad) return;
                       auto& gx = nx.grad_buffer();
                       const double inv_d = 1.0 / static_cast<double>(d);
                       for (std::size_t r = 0; r < rows; ++r) {
                         double m1 = 0.0;
                         double m2 = 0.0;
                         for (std::size_t j = 0; j < d; ++j) {
                           const double gh = g[r * d + j] * gv[j];
                           m1 += gh;
                           m2 += gh * (*xhat)[r * d + j];
                         }
                         m1 *= inv_d;
                         m2 *= inv_d;
                         const double inv = (*inv_std)[r];
                         for (std::size_t j = 0; j < d; ++j) {
                           const double gh = g[r * d + j] * gv[j];
                           gx[r * d + j] += inv * (gh - m1 - (*xhat)[r * d + j] * m2);
                         }
                       }
                     });
}

Var batch_norm(const Var& x, const Var& gain, const Var& bias, Tensor& running_mean,
               Tensor& running_var, bool training, double momentum, double eps) {
  check_affine(x, gain, bias);
  const std::size_t rows = x.shape()[0];
  const std::size_t d = x.shape()[1];
  if (running_mean.shape() != Shape{d} || running_var.shape() != Shape{d}) {
    throw ShapeError("batch_norm running statistics must have shape " + shape_str(Shape{d}));
  }
  if (training && rows < 2) {
    throw ShapeError("batch_norm in training mode needs a batch of at least 2 rows, got " +
                     std::to_string(rows));
  }
  const auto& xv = x.value();
  const auto& gv = gain.value();
  const auto& bv = bias.value();
  Tensor out(x.shape());

  if (!training) {
    auto inv_std = std::make_shared<std::vector<double>>(d);
    auto xhat = std::make_shared<Tensor>(x.shape());
    for (std::size_t j = 0; j < d; ++j) {
      (*inv_std)[j] = 1.0 / std::sqrt(running_var[j] + eps);
      for (std::size_t r = 0; r < rows; ++r) {
        const double h = (xv[r * d + j] - running_mean[j]) * (*inv_std)[j];
        (*xhat)[r * d + j] = h;
        out[r * d + j] = h * gv[j] + bv[j];
      }
    }
    // Fixed statistics: the map is affine in x.
    return make_result(std::move(out), {x, gain, bias}, "batch_norm_eval",
                       [rows, d, xhat, inv_std](Node& self) {
                         Node& nx = *self.inputs[0];
                         Node& ng = *self.inputs[1];
                         Node& nb = *self.inputs[2];
                         const auto& g = self.grad;
                         for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t j = 0; j < d; ++j) {
                             const double gr = g[r * d + j];
                             if (ng.requires_grad) ng.grad_buffer()[j] += gr * (*xhat)[r * d + j];
                             if (nb.requires_grad) nb.grad_buffer()[j] += gr;
                             if (nx.requires_grad) {
                               nx.grad_buffer()[r * d + j] += gr * ng.value[j] * (*inv_std)[j];
                             }
                           }
                         }
                       });
  }

  auto xhat = std::make_shared<Tensor>(x.shape());
  auto inv_std = std::make_shared<std::vector<double>>(d);
  const double nrows = static_cast<double>(rows);
  for (std::size_t j = 0; j < d; ++j) {
    double mu = 0.0;
    for (std::size_t r = 0; r < rows; ++r) mu += xv[r * d + j];
    mu /= nrows;
    double ss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double c = xv[r * d + j] - mu;
      ss += c * c;
    }
    const double var = ss / nrows;
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[j] = inv;
    for (std::size_t r = 0; r < rows; ++r) {
      const double h = (xv[r * d + j] - mu) * inv;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
    running_mean[j] = (1.0 - momentum) * running_mean[j] + momentum * mu;
    running_var[j] = (1.0 - momentum) * running_var[j] + momentum * ss / (nrows - 1.0);
  }
  return make_result(std::move(out), {x, gain, bias}, "batch_norm",
                     [rows, d, xhat, inv_std](Node& self) {
                       Node& nx = *self.inputs[0];
                       Node& ng = *self.inputs[1];
                       Node& nb = *self.inputs[2];
                       const auto& g = self.grad;
                       const auto& gv = ng.value;
                       const double inv_rows = 1.0 / static_cast<double>(rows);
                       for (std::size_t j = 0; j < d; ++j) {
                         double sum_g = 0.0;
                         double sum_gh = 0.0;
                         for (std::size_t r = 0; r < rows; ++r) {
                           sum_g += g[r * d + j];
                           sum_gh += g[r * d + j] * (*xhat)[r * d + j];
                         }
                         if (ng.requires_grad) ng.grad_buffer()[j] += sum_gh;
                         if (nb.requires_grad) nb.grad_buffer()[j] += sum_g;
                         if (!nx.requires_grad) continue;
                         auto& gx = nx.grad_buffer();
                         const double m1 = sum_g * gv[j] * inv_rows;
                         const double m2 = sum_gh * gv[j] * inv_rows;
                         for (std::size_t r = 0; r < rows; ++r) {
                           const double gh = g[r * d + j] * gv[j];
                           gx[r * d + j] +=
                               (*inv_std)[j] * (gh - m1 - (*xhat)[r * d + j] * m2);
                         }
                       }
                     });
}

Var apply_norm(const Var& x, NormParams& p, bool training) {
  switch (p.kind) {
    case NormKind::kLayer:
      return layer_norm(x, p.gain, p.bias, p.eps);
    case NormKind::kBatch:
      return batch_norm(x, p.gain, p.bias, p.running_mean, p.running_var, training, p.momentum,
                        p.eps);
    case NormKind::kNone:
      return x;
  }
  throw ValueError("unknown norm kind");
}

}  // namespace afkan
