#pragma once

#include <array>
#include <string>
#include <string_view>

#include "afkan/autodiff.hpp"
#include "afkan/tensor.hpp"

namespace afkan {

enum class ActivationTag { kELU, kGELU, kLeakyReLU, kReLU, kSELU, kSigmoid, kSiLU, kSoftplus, kTanh };

inline constexpr std::array<ActivationTag, 9> kAllActivations = {
    ActivationTag::kELU,     ActivationTag::kGELU, ActivationTag::kLeakyReLU,
    ActivationTag::kReLU,    ActivationTag::kSELU, ActivationTag::kSigmoid,
    ActivationTag::kSiLU,    ActivationTag::kSoftplus, ActivationTag::kTanh};

inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluLambda = 1.0507009873554805;

// Activation with its constants. `alpha` is used by ELU, LeakyReLU and SELU,
// `lambda` by SELU only.
struct ActivationKind {
  ActivationTag tag = ActivationTag::kSiLU;
  double alpha = 0.0;
  double lambda = 0.0;

  // Kind with default constants (ELU 1.0, LeakyReLU 0.01, SELU standard).
  static ActivationKind of(ActivationTag tag);
};

// CLI names: elu, gelu, leaky_relu, relu, selu, sigmoid, silu, softplus, tanh.
std::string_view activation_name(ActivationTag tag);
ActivationTag parse_activation(std::string_view name);

double act_scalar(const ActivationKind& kind, double x);
// Closed form; right-hand derivative at the ReLU/LeakyReLU/ELU/SELU kink.
double act_scalar_derivative(const ActivationKind& kind, double x);

Tensor act_forward(const ActivationKind& kind, const Tensor& x);
Tensor act_derivative(const ActivationKind& kind, const Tensor& x);

// Tape op; backward multiplies by act_derivative at the saved input.
Var activation(const Var& x, const ActivationKind& kind);

}  // namespace afkan
