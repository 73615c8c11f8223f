#include "afkan/layers.hpp"

#include <cmath>

namespace afkan {

namespace {

void check_input(const Var& x, std::size_t in, std::string_view layer) {
  if (x.rank() != 2 || x.shape()[1] != in) {
    throw ShapeError(std::string(layer) + " layer expects (B, " + std::to_string(in) +
                     ") input, got " + shape_str(x.shape()));
  }
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kAfKan: return "afkan";
    case Variant::kReluKan: return "relukan";
    case Variant::kMlp: return "mlp";
    case Variant::kBasisKan: return "basis_kan";
  }
  throw ValueError("unknown variant");
}

Variant parse_variant(std::string_view name) {
  if (name == "afkan") return Variant::kAfKan;
  if (name == "relukan") return Variant::kReluKan;
  if (name == "mlp") return Variant::kMlp;
  if (name == "basis_kan") return Variant::kBasisKan;
  throw ValueError("unknown variant '" + std::string(name) +
                   "' (expected afkan|relukan|mlp|basis_kan)");
}

std::string_view reduction_mode_name(ReductionMode m) {
  switch (m) {
    case ReductionMode::kGlobalAttn: return "global_attn";
    case ReductionMode::kSpatialAttn: return "spatial_attn";
    case ReductionMode::kMultistep: return "multistep";
  }
  throw ValueError("unknown reduction mode");
}

ReductionMode parse_reduction_mode(std::string_view name) {
  if (name == "global_attn") return ReductionMode::kGlobalAttn;
  if (name == "spatial_attn") return ReductionMode::kSpatialAttn;
  if (name == "multistep") return ReductionMode::kMultistep;
  throw ValueError("unknown reduction mode '" + std::string(name) +
                   "' (expected global_attn|spatial_attn|multistep)");
}

std::string_view basis_kind_name(BasisKind b) {
  switch (b) {
    case BasisKind::kGrbf: return "grbf";
    case BasisKind::kRswaf: return "rswaf";
  }
  throw ValueError("unknown basis kind");
}

BasisKind parse_basis_kind(std::string_view name) {
  if (name == "grbf") return BasisKind::kGrbf;
  if (name == "rswaf") return BasisKind::kRswaf;
  throw ValueError("unknown basis '" + std::string(name) + "' (expected grbf|rswaf)");
}

double kaiming_bound(std::size_t fan_in) {
  if (fan_in == 0) throw ValueError("kaiming_bound: fan_in must be positive");
  return std::sqrt(6.0 / static_cast<double>(fan_in));
}

Tensor kaiming_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = kaiming_bound(fan_in);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

void append_norm_params(std::vector<NamedParam>& out, const std::string& prefix,
                        const NormParams& p) {
  if (p.kind == NormKind::kNone) return;
  out.push_back({prefix + ".gain", p.gain});
  out.push_back({prefix + ".bias", p.bias});
}

void append_norm_buffers(std::vector<NamedBuffer>& out, const std::string& prefix, NormParams& p) {
  if (p.kind != NormKind::kBatch) return;
  out.push_back({prefix + ".running_mean", &p.running_mean});
  out.push_back({prefix + ".running_var", &p.running_var});
}

// ---- AF-KAN ----

AFKanLayer::AFKanLayer(const AFKanConfig& config, Rng& rng) : config_(config) {
  config_.grid.validate();
  if (config_.in == 0 || config_.out == 0) throw ValueError("AF-KAN layer widths must be positive");
  const std::size_t n = config_.grid.count();
  PhasePair phases = phase_init(config_.grid, PhaseLayout::kCompact);
  params_.phase_low = Var::parameter(std::move(phases.low));
  params_.phase_high = Var::parameter(std::move(phases.high));
  switch (config_.mode) {
    case ReductionMode::kGlobalAttn:
    case ReductionMode::kMultistep:
      params_.attn_weight = Var::parameter(kaiming_uniform(Shape{n, 1}, n, rng));
      params_.attn_bias = Var::parameter(Tensor(Shape{1}, 0.0));
      break;
    case ReductionMode::kSpatialAttn:
      // Depthwise, kernel size 1: one weight per channel, fan-in 1.
      params_.conv_weight = Var::parameter(kaiming_uniform(Shape{n, 1}, 1, rng));
      params_.conv_bias = Var::parameter(Tensor(Shape{n, 1}, 0.0));
      break;
  }
  if (config_.mode != ReductionMode::kMultistep) {
    params_.temperature =
        Var::parameter(Tensor(Shape{1}, std::sqrt(static_cast<double>(config_.in))));
  }
  params_.pln = NormParams::make(config_.pln, config_.in);
  params_.w_out = Var::parameter(kaiming_uniform(Shape{config_.in, config_.out}, config_.in, rng));
  params_.b_out = Var::parameter(Tensor(Shape{config_.out}, 0.0));
}

AFKanTrace AFKanLayer::trace(const Var& x, bool training) {
  check_input(x, config_.in, "AF-KAN");
  AFKanTrace t;
  const auto& p = params_;
  t.basis = basis_A(x, p.phase_low, p.phase_high, config_.act, config_.ftype);
  t.normalized = config_.l2mm ? l2_minmax(t.basis) : t.basis;
  switch (config_.mode) {
    case ReductionMode::kGlobalAttn: {
      const Var linear = matmul(t.normalized, p.attn_weight) + p.attn_bias;  // (B, D, 1)
      t.attention = softmax(linear, -2, p.temperature);                     // over D
      t.reduced = sum(t.normalized * t.attention, -1);
      break;
    }
    case ReductionMode::kSpatialAttn: {
      const Var perm = permute(t.normalized, {0, 2, 1});                  // (B, n, D)
      const Var conv = perm * p.conv_weight + p.conv_bias;                // depthwise k=1
      t.attention = softmax(conv, -2, p.temperature);                     // dim -2 of (B, n, D)
      t.reduced = sum(t.normalized * permute(t.attention, {0, 2, 1}), -1);
      break;
    }
    case ReductionMode::kMultistep: {
      const Var linear = matmul(t.normalized, p.attn_weight) + p.attn_bias;  // (B, D, 1)
      t.reduced = reshape(linear, Shape{x.shape()[0], config_.in});
      break;
    }
  }
  t.prelinear = apply_norm(t.reduced, params_.pln, training);
  t.output = matmul(activation(t.prelinear, config_.act), p.w_out) + p.b_out;
  return t;
}

Var AFKanLayer::forward(const Var& x, bool training) { return trace(x, training).output; }

std::vector<NamedParam> AFKanLayer::parameters() const {
  std::vector<NamedParam> out;
  const auto& p = params_;
  out.push_back({"phase_low", p.phase_low});
  out.push_back({"phase_high", p.phase_high});
  if (p.attn_weight) {
    out.push_back({"attn_weight", p.attn_weight});
    out.push_back({"attn_bias", p.attn_bias});
  }
  if (p.conv_weight) {
    out.push_back({"conv_weight", p.conv_weight});
    out.push_back({"conv_bias", p.conv_bias});
  }
  if (p.temperature) out.push_back({"temperature", p.temperature});
  append_norm_params(out, "pln", p.pln);
  out.push_back({"w_out", p.w_out});
  out.push_back({"b_out", p.b_out});
  return out;
}

std::vector<NamedBuffer> AFKanLayer::buffers() {
  std::vector<NamedBuffer> out;
  append_norm_buffers(out, "pln", params_.pln);
  return out;
}

// ---- ReLU-KAN ----

ReluKanLayer::ReluKanLayer(std::size_t in, std::size_t out, const GridSpec& grid, Rng& rng)
    : in_(in), out_(out), grid_(grid) {
  grid_.validate();
  if (in_ == 0 || out_ == 0) throw ValueError("ReLU-KAN layer widths must be positive");
  PhasePair phases = phase_init(grid_, PhaseLayout::kPerInput, in_);
  params_.phase_low = Var::parameter(std::move(phases.low));
  params_.phase_high = Var::parameter(std::move(phases.high));
  const std::size_t fan_in = in_ * grid_.count();
  params_.conv_weight = Var::parameter(kaiming_uniform(Shape{out_, fan_in}, fan_in, rng));
  params_.conv_bias = Var::parameter(Tensor(Shape{out_}, 0.0));
}

Var ReluKanLayer::forward(const Var& x, bool /*training*/) {
  check_input(x, in_, "ReLU-KAN");
  const Var r = relu_kan_R(x, params_.phase_low, params_.phase_high);
  const Var flat = reshape(r, Shape{x.shape()[0], in_ * grid_.count()});
  return matmul(flat, transpose(params_.conv_weight)) + params_.conv_bias;
}

std::vector<NamedParam> ReluKanLayer::parameters() const {
  return {{"phase_low", params_.phase_low},
          {"phase_high", params_.phase_high},
          {"conv_weight", params_.conv_weight},
          {"conv_bias", params_.conv_bias}};
}

// ---- MLP ----

MlpLayer::MlpLayer(std::size_t in, std::size_t out, NormKind norm, const ActivationKind& act,
                   bool activate_output, Rng& rng)
    : in_(in), out_(out), act_(act), activate_output_(activate_output) {
  if (in_ == 0 || out_ == 0) throw ValueError("MLP layer widths must be positive");
  params_.pre_norm = NormParams::make(norm, in_);
  params_.weight = Var::parameter(kaiming_uniform(Shape{in_, out_}, in_, rng));
}

Var MlpLayer::forward(const Var& x, bool training) {
  check_input(x, in_, "MLP");
  Var y = matmul(apply_norm(x, params_.pre_norm, training), params_.weight);
  return activate_output_ ? activation(y, act_) : y;
}

std::vector<NamedParam> MlpLayer::parameters() const {
  std::vector<NamedParam> out;
  append_norm_params(out, "norm", params_.pre_norm);
  out.push_back({"weight", params_.weight});
  return out;
}

std::vector<NamedBuffer> MlpLayer::buffers() {
  std::vector<NamedBuffer> out;
  append_norm_buffers(out, "norm", params_.pre_norm);
  return out;
}

// ---- GRBF / RSWAF baseline ----

BasisKanLayer::BasisKanLayer(std::size_t in, std::size_t out, BasisKind basis,
                             std::size_t num_centers, NormKind norm, Rng& rng)
    : in_(in), out_(out), basis_(basis) {
  if (in_ == 0 || out_ == 0) throw ValueError("basis-KAN layer widths must be positive");
  if (num_centers < 2) throw ValueError("basis-KAN layer needs at least 2 centers");
  centers_ = linspace(-2.0, 2.0, num_centers);
  width_ = 4.0 / static_cast<double>(num_centers - 1);
  params_.pre_norm = NormParams::make(norm, in_);
  const std::size_t fan_in = in_ * num_centers;
  params_.weight = Var::parameter(kaiming_uniform(Shape{fan_in, out_}, fan_in, rng));
  params_.bias = Var::parameter(Tensor(Shape{out_}, 0.0));
}

Var BasisKanLayer::forward(const Var& x, bool training) {
  check_input(x, in_, "basis-KAN");
  const Var normed = apply_norm(x, params_.pre_norm, training);
  const Var expanded = basis_ == BasisKind::kGrbf ? grbf(normed, centers_, width_)
                                                  : rswaf(normed, centers_, width_);
  const Var flat = reshape(expanded, Shape{x.shape()[0], in_ * centers_.size()});
  return matmul(flat, params_.weight) + params_.bias;
}

std::vector<NamedParam> BasisKanLayer::parameters() const {
  std::vector<NamedParam> out;
  append_norm_params(out, "norm", params_.pre_norm);
  out.push_back({"weight", params_.weight});
  out.push_back({"bias", params_.bias});
  return out;
}

std::vector<NamedBuffer> BasisKanLayer::buffers() {
  std::vector<NamedBuffer> out;
  append_norm_buffers(out, "norm", params_.pre_norm);
  return out;
}

}  // namespace afkan
