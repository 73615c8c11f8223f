#pragma once

#include <string_view>

#include "afkan/autodiff.hpp"
#include "afkan/tensor.hpp"

namespace afkan {

enum class NormKind { kLayer, kBatch, kNone };

std::string_view norm_kind_name(NormKind kind);
NormKind parse_norm_kind(std::string_view name);

inline constexpr double kNormEps = 1e-5;
inline constexpr double kNormMomentum = 0.1;

// Affine parameters and (batch only) running statistics of one norm site.
struct NormParams {
  NormKind kind = NormKind::kLayer;
  Var gain;
  Var bias;
  Tensor running_mean;
  Tensor running_var;
  double momentum = kNormMomentum;
  double eps = kNormEps;

  // gain = 1, bias = 0, running mean 0 / var 1. kNone carries no tensors.
  static NormParams make(NormKind kind, std::size_t width);
};

// L2 normalization over every entry of x, then min-max scaling of every
// entry to [lo, hi]. A zero tensor skips the L2 step; a flat tensor maps to
// lo. Gradients flow through the selected min/max entries (first index on
// ties).
Var l2_minmax(const Var& x, double lo = 0.0, double hi = 1.0);

// Per-row standardization of (B, D) followed by gain * xhat + bias.
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = kNormEps);

// Per-column standardization of (B, D). In training mode batch statistics
// are used and `running_mean` / `running_var` are updated in place with
// `momentum` (running variance uses the unbiased batch variance). In
// inference mode the running statistics are used.
Var batch_norm(const Var& x, const Var& gain, const Var& bias, Tensor& running_mean,
               Tensor& running_var, bool training, double momentum = kNormMomentum,
               double eps = kNormEps);

// Dispatches on p.kind; kNone is the identity.
Var apply_norm(const Var& x, NormParams& p, bool training);

}  // namespace afkan
