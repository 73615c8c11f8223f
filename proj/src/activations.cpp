#include "afkan/activations.hpp"

#include "afkan/detail/activation_impl.hpp"

namespace afkan {

using detail::derivative_of;
using detail::unknown_tag;
using detail::value_of;
using detail::with_tag;

ActivationKind ActivationKind::of(ActivationTag tag) {
  switch (tag) {
    case ActivationTag::kELU:
      return {tag, 1.0, 0.0};
    case ActivationTag::kLeakyReLU:
      return {tag, 0.01, 0.0};
    case ActivationTag::kSELU:
      return {tag, kSeluAlpha, kSeluLambda};
    case ActivationTag::kGELU:
    case ActivationTag::kReLU:
    case ActivationTag::kSigmoid:
    case ActivationTag::kSiLU:
    case ActivationTag::kSoftplus:
    case ActivationTag::kTanh:
      return {tag, 0.0, 0.0};
  }
  unknown_tag(tag);
}

std::string_view activation_name(ActivationTag tag) {
  switch (tag) {
    case ActivationTag::kELU: return "elu";
    case ActivationTag::kGELU: return "gelu";
    case ActivationTag::kLeakyReLU: return "leaky_relu";
    case ActivationTag::kReLU: return "relu";
    case ActivationTag::kSELU: return "selu";
    case ActivationTag::kSigmoid: return "sigmoid";
    case ActivationTag::kSiLU: return "silu";
    case ActivationTag::kSoftplus: return "softplus";
    case ActivationTag::kTanh: return "tanh";
  }
  unknown_tag(tag);
}

ActivationTag parse_activation(std::string_view name) {
  for (auto tag : kAllActivations) {
    if (activation_name(tag) == name) return tag;
  }
  throw ValueError("unknown activation '" + std::string(name) +
                   "' (expected elu, gelu, leaky_relu, relu, selu, sigmoid, silu, softplus, tanh)");
}

double act_scalar(const ActivationKind& kind, double x) {
  return with_tag(kind.tag, [&](auto t) { return value_of<decltype(t)::value>(kind, x); });
}

double act_scalar_derivative(const ActivationKind& kind, double x) {
  return with_tag(kind.tag, [&](auto t) { return derivative_of<decltype(t)::value>(kind, x); });
}

Tensor act_forward(const ActivationKind& kind, const Tensor& x) {
  Tensor out(x.shape());
  with_tag(kind.tag, [&](auto t) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = value_of<decltype(t)::value>(kind, x[i]);
  });
  return out;
}

Tensor act_derivative(const ActivationKind& kind, const Tensor& x) {
  Tensor out(x.shape());
  with_tag(kind.tag, [&](auto t) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = derivative_of<decltype(t)::value>(kind, x[i]);
  });
  return out;
}

Var activation(const Var& x, const ActivationKind& kind) {
  // Validate the tag before recording anything.
  (void)activation_name(kind.tag);
  return make_result(act_forward(kind, x.value()), {x}, "activation", [kind](Node& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    const auto& xv = self.inputs[0]->value;
    with_tag(kind.tag, [&](auto t) {
      const std::size_t n = xv.size();
      for (std::size_t i = 0; i < n; ++i) {
        gx[i] += self.grad[i] * derivative_of<decltype(t)::value>(kind, xv[i]);
      }
    });
  });
}

}  // namespace afkan
