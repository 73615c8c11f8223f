#pragma once

#include <array>
#include <string_view>

#include "afkan/activations.hpp"
#include "afkan/autodiff.hpp"
#include "afkan/tensor.hpp"

namespace afkan {

// Grid size G and spline order k; n = G + k basis functions.
struct GridSpec {
  int grid = 3;
  int order = 3;

  std::size_t count() const { return static_cast<std::size_t>(grid + order); }
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class PhaseLayout { kCompact, kPerInput };

// Trainable interval endpoints. Compact: low/high of shape (n).
// Per-input: shape (d_in, n), every row a copy of the compact row.
struct PhasePair {
  Tensor low;
  Tensor high;
  PhaseLayout layout = PhaseLayout::kCompact;
};

// low_i = (i - k) / G for i = 0..n-1, high = low + (k + 1) / G.
PhasePair phase_init(const GridSpec& spec, PhaseLayout layout, std::size_t d_in = 0);

enum class FunctionType { kSum, kProd, kSumProd, kQuad1, kQuad2, kCubic1, kCubic2 };

inline constexpr std::array<FunctionType, 7> kAllFunctionTypes = {
    FunctionType::kSum,   FunctionType::kProd,   FunctionType::kSumProd, FunctionType::kQuad1,
    FunctionType::kQuad2, FunctionType::kCubic1, FunctionType::kCubic2};

std::string_view function_type_name(FunctionType type);
FunctionType parse_function_type(std::string_view name);

// Scalar value of a combination and its two partial derivatives.
double combine_scalar(FunctionType type, double p, double q);
void combine_partials(FunctionType type, double p, double q, double& dp, double& dq);

Tensor combine(FunctionType type, const Tensor& p, const Tensor& q);
Var combine(FunctionType type, const Var& p, const Var& q);

// x (B, D) against compact phases (n) -> (B, D, n) with
// A = combine(act(x - low), act(high - x)). Single fused tape op.
Var basis_A(const Var& x, const Var& low, const Var& high, const ActivationKind& act,
            FunctionType type);

// Same values assembled from elementary tape ops; reference for the fused op.
Var basis_A_composed(const Var& x, const Var& low, const Var& high, const ActivationKind& act,
                     FunctionType type);

// x (B, D) against per-input phases (D, n) -> (B, D, n):
// [relu(x - l) relu(h - x)]^2 * 16 / (h - l)^4 with the constant taken from
// the live phases. Throws ValueError where h == l.
Var relu_kan_R(const Var& x, const Var& low, const Var& high);
Var relu_kan_R_composed(const Var& x, const Var& low, const Var& high);

// Evenly spaced centers on [lo, hi]; h defaults to their spacing.
Tensor linspace(double lo, double hi, std::size_t count);

// exp(-(x - c)^2 / (2 h^2)); x (...) -> (..., C).
Var grbf(const Var& x, const Tensor& centers, double h);
// 1 - tanh^2((x - c) / h); x (...) -> (..., C).
Var rswaf(const Var& x, const Tensor& centers, double h);

// Cox-de Boor B-spline basis of order k on a uniform grid over [lo, hi]
// extended by k knots at each end. x (...) -> (..., G + k).
Tensor bspline_basis(const Tensor& x, const GridSpec& spec, double lo = -1.0, double hi = 1.0);

}  // namespace afkan
