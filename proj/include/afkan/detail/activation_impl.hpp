#pragma once

// Compile-time-dispatched activation kernels shared by the activation and
// basis modules. Not part of the public interface.

#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>

#include "afkan/activations.hpp"

namespace afkan::detail {

inline constexpr double kGeluCoeff = 0.044715;
inline const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

[[noreturn]] inline void unknown_tag(ActivationTag tag) {
  throw ValueError("unknown activation tag " + std::to_string(static_cast<int>(tag)));
}

template <ActivationTag T>
using TagConst = std::integral_constant<ActivationTag, T>;

// Invokes fn with the tag as a compile-time constant so per-element loops are
// specialized once per tensor rather than branching per element.
template <class Fn>
inline decltype(auto) with_tag(ActivationTag tag, Fn&& fn) {
  switch (tag) {
    case ActivationTag::kELU: return fn(TagConst<ActivationTag::kELU>{});
    case ActivationTag::kGELU: return fn(TagConst<ActivationTag::kGELU>{});
    case ActivationTag::kLeakyReLU: return fn(TagConst<ActivationTag::kLeakyReLU>{});
    case ActivationTag::kReLU: return fn(TagConst<ActivationTag::kReLU>{});
    case ActivationTag::kSELU: return fn(TagConst<ActivationTag::kSELU>{});
    case ActivationTag::kSigmoid: return fn(TagConst<ActivationTag::kSigmoid>{});
    case ActivationTag::kSiLU: return fn(TagConst<ActivationTag::kSiLU>{});
    case ActivationTag::kSoftplus: return fn(TagConst<ActivationTag::kSoftplus>{});
    case ActivationTag::kTanh: return fn(TagConst<ActivationTag::kTanh>{});
  }
  unknown_tag(tag);
}

template <ActivationTag T>
double value_of(const ActivationKind& kind, double x) {
  if constexpr (T == ActivationTag::kELU) {
    return x > 0.0 ? x : kind.alpha * std::expm1(x);
  } else if constexpr (T == ActivationTag::kGELU) {
    return 0.5 * x * (1.0 + std::tanh(kSqrt2OverPi * (x + kGeluCoeff * x * x * x)));
  } else if constexpr (T == ActivationTag::kLeakyReLU) {
    return x >= 0.0 ? x : kind.alpha * x;
  } else if constexpr (T == ActivationTag::kReLU) {
    return x > 0.0 ? x : 0.0;
  } else if constexpr (T == ActivationTag::kSELU) {
    return kind.lambda * (x > 0.0 ? x : kind.alpha * std::expm1(x));
  } else if constexpr (T == ActivationTag::kSigmoid) {
    return sigmoid(x);
  } else if constexpr (T == ActivationTag::kSiLU) {
    return x * sigmoid(x);
  } else if constexpr (T == ActivationTag::kSoftplus) {
    // log(1 + e^x) without overflow.
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  } else {
    return std::tanh(x);
  }
}

template <ActivationTag T>
double derivative_of(const ActivationKind& kind, double x) {
  if constexpr (T == ActivationTag::kELU) {
    return x >= 0.0 ? 1.0 : kind.alpha * std::exp(x);
  } else if constexpr (T == ActivationTag::kGELU) {
    const double t = std::tanh(kSqrt2OverPi * (x + kGeluCoeff * x * x * x));
    const double du = kSqrt2OverPi * (1.0 + 3.0 * kGeluCoeff * x * x);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
  } else if constexpr (T == ActivationTag::kLeakyReLU) {
    return x >= 0.0 ? 1.0 : kind.alpha;
  } else if constexpr (T == ActivationTag::kReLU) {
    return x >= 0.0 ? 1.0 : 0.0;
  } else if constexpr (T == ActivationTag::kSELU) {
    return kind.lambda * (x >= 0.0 ? 1.0 : kind.alpha * std::exp(x));
  } else if constexpr (T == ActivationTag::kSigmoid) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
  } else if constexpr (T == ActivationTag::kSiLU) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
  } else if constexpr (T == ActivationTag::kSoftplus) {
    return sigmoid(x);
  } else {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  }
}

// Value and first derivative together, sharing the transcendental call.
template <ActivationTag T>
double value_and_derivative_of(const ActivationKind& kind, double x, double& d) {
  if constexpr (T == ActivationTag::kSigmoid) {
    const double s = sigmoid(x);
    d = s * (1.0 - s);
    return s;
  } else if constexpr (T == ActivationTag::kSiLU) {
    const double s = sigmoid(x);
    d = s * (1.0 + x * (1.0 - s));
    return x * s;
  } else if constexpr (T == ActivationTag::kSoftplus) {
    d = sigmoid(x);
    return value_of<T>(kind, x);
  } else if constexpr (T == ActivationTag::kTanh) {
    const double t = std::tanh(x);
    d = 1.0 - t * t;
    return t;
  } else if constexpr (T == ActivationTag::kGELU) {
    const double t = std::tanh(kSqrt2OverPi * (x + kGeluCoeff * x * x * x));
    const double du = kSqrt2OverPi * (1.0 + 3.0 * kGeluCoeff * x * x);
    d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
    return 0.5 * x * (1.0 + t);
  } else {
    d = derivative_of<T>(kind, x);
    return value_of<T>(kind, x);
  }
}

}  // namespace afkan::detail
