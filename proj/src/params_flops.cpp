#include "afkan/params_flops.hpp"

namespace afkan {

namespace {

std::uint64_t norm_units(NormKind kind, std::uint64_t entries) {
  // Center, scale, gain, shift.
  return kind == NormKind::kNone ? 0 : 4 * entries;
}

LayerFlops afkan_flops(const AFKanLayer& layer, std::uint64_t b) {
  const auto& c = layer.config();
  const std::uint64_t D = c.in;
  const std::uint64_t n = c.grid.count();
  const std::uint64_t o = c.out;
  LayerFlops f{"afkan"};
  // x - l, h - x, two activations, combination.
  f.elementwise += 5 * b * D * n;
  if (c.l2mm) f.elementwise += 2 * b * D * n;
  switch (c.mode) {
    case ReductionMode::kGlobalAttn:
      f.dense += 2 * b * D * n;
      f.elementwise += b * D + 5 * b * D + 2 * b * D * n;
      break;
    case ReductionMode::kSpatialAttn:
      f.elementwise += 2 * b * D * n + 5 * b * D * n + 2 * b * D * n;
      break;
    case ReductionMode::kMultistep:
      f.dense += 2 * b * D * n;
      f.elementwise += b * D;
      break;
  }
  f.elementwise += norm_units(c.pln, b * D) + b * D + b * o;
  f.dense += 2 * b * D * o;
  return f;
}

LayerFlops relukan_flops(const ReluKanLayer& layer, std::uint64_t b) {
  const std::uint64_t D = layer.in_features();
  const std::uint64_t n = layer.grid().count();
  const std::uint64_t o = layer.out_features();
  LayerFlops f{"relukan"};
  // x - l, h - x, two ReLUs, product, square, scale by c.
  f.elementwise = 7 * b * D * n + b * o;
  f.dense = 2 * b * D * n * o;
  return f;
}

LayerFlops mlp_flops(const MlpLayer& layer, std::uint64_t b) {
  const std::uint64_t D = layer.in_features();
  const std::uint64_t o = layer.out_features();
  LayerFlops f{"mlp"};
  f.elementwise = norm_units(layer.params().pre_norm.kind, b * D);
  if (layer.activates_output()) f.elementwise += b * o;
  f.dense = 2 * b * D * o;
  return f;
}

LayerFlops basis_kan_flops(const BasisKanLayer& layer, std::uint64_t b) {
  const std::uint64_t D = layer.in_features();
  const std::uint64_t C = layer.centers().size();
  const std::uint64_t o = layer.out_features();
  LayerFlops f{"basis_kan"};
  // Distance, scaling, transfer function.
  f.elementwise = norm_units(layer.params().pre_norm.kind, b * D) + 3 * b * D * C + b * o;
  f.dense = 2 * b * D * C * o;
  return f;
}

}  // namespace

ParamReport count_params(const Model& model) {
  ParamReport report;
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    const Layer& layer = model.layer(i);
    LayerParamReport lr;
    lr.kind = std::string(layer.kind());
    lr.in = layer.in_features();
    lr.out = layer.out_features();
    for (const auto& p : layer.parameters()) {
      lr.tensors.push_back({p.name, p.var.size()});
      lr.subtotal += p.var.size();
    }
    report.total += lr.subtotal;
    report.layers.push_back(std::move(lr));
  }
  return report;
}

std::uint64_t kan_params_formula(std::uint64_t d_in, std::uint64_t d_out, std::uint64_t grid,
                                 std::uint64_t order) {
  return d_in * d_out * (grid + order) + d_out;
}

std::uint64_t mlp_params_formula(std::uint64_t d_in, std::uint64_t d_out) {
  return d_in * d_out + d_out;
}

FlopReport estimate_flops(const Model& model, std::size_t batch) {
  if (batch == 0) throw ValueError("estimate_flops: batch must be positive");
  FlopReport report;
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    const Layer& layer = model.layer(i);
    LayerFlops f;
    if (auto* a = dynamic_cast<const AFKanLayer*>(&layer)) {
      f = afkan_flops(*a, batch);
    } else if (auto* r = dynamic_cast<const ReluKanLayer*>(&layer)) {
      f = relukan_flops(*r, batch);
    } else if (auto* m = dynamic_cast<const MlpLayer*>(&layer)) {
      f = mlp_flops(*m, batch);
    } else if (auto* k = dynamic_cast<const BasisKanLayer*>(&layer)) {
      f = basis_kan_flops(*k, batch);
    } else {
      throw ValueError("estimate_flops: unsupported layer kind '" + std::string(layer.kind()) + "'");
    }
    report.dense += f.dense;
    report.elementwise += f.elementwise;
    report.layers.push_back(std::move(f));
  }
  return report;
}

}  // namespace afkan
