#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "afkan/activations.hpp"
#include "afkan/autodiff.hpp"
#include "afkan/basis.hpp"
#include "afkan/normalization.hpp"
#include "afkan/random.hpp"

namespace afkan {

enum class Variant { kAfKan, kReluKan, kMlp, kBasisKan };
enum class ReductionMode { kGlobalAttn, kSpatialAttn, kMultistep };
enum class BasisKind { kGrbf, kRswaf };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
std::string_view reduction_mode_name(ReductionMode m);
ReductionMode parse_reduction_mode(std::string_view name);
std::string_view basis_kind_name(BasisKind b);
BasisKind parse_basis_kind(std::string_view name);

struct NamedParam {
  std::string name;
  Var var;
};

// Non-trainable state that still belongs in a checkpoint (running stats).
struct NamedBuffer {
  std::string name;
  Tensor* tensor;
};

// Uniform(-sqrt(6 / fan_in), +sqrt(6 / fan_in)).
Tensor kaiming_uniform(Shape shape, std::size_t fan_in, Rng& rng);
double kaiming_bound(std::size_t fan_in);

class Layer {
 public:
  virtual ~Layer() = default;

  virtual Var forward(const Var& x, bool training) = 0;
  // Trainable tensors in a fixed order, names relative to the layer.
  virtual std::vector<NamedParam> parameters() const = 0;
  virtual std::vector<NamedBuffer> buffers() { return {}; }

  virtual std::size_t in_features() const = 0;
  virtual std::size_t out_features() const = 0;
  virtual std::string_view kind() const = 0;
};

// Adds the norm-site parameters (gain, bias) under `prefix`.
void append_norm_params(std::vector<NamedParam>& out, const std::string& prefix,
                        const NormParams& p);
void append_norm_buffers(std::vector<NamedBuffer>& out, const std::string& prefix, NormParams& p);

struct AFKanConfig {
  std::size_t in = 0;
  std::size_t out = 0;
  GridSpec grid;
  ActivationKind act = ActivationKind::of(ActivationTag::kSiLU);
  FunctionType ftype = FunctionType::kQuad1;
  ReductionMode mode = ReductionMode::kGlobalAttn;
  NormKind pln = NormKind::kLayer;
  bool l2mm = true;
};

// All trainable state of one AF-KAN layer. Tensors unused by the configured
// mode are left empty and are not reported as parameters.
struct AFKanLayerParams {
  Var phase_low;    // (n)
  Var phase_high;   // (n)
  Var attn_weight;  // (n, 1)  global / multistep
  Var attn_bias;    // (1)     global / multistep
  Var conv_weight;  // (n, 1)  spatial, depthwise kernel size 1
  Var conv_bias;    // (n, 1)  spatial
  Var temperature;  // (1)     global / spatial, used as max(tau, 1)
  NormParams pln;   // over D
  Var w_out;        // (D, d_out)
  Var b_out;        // (d_out)
};

// Intermediates of one AF-KAN forward pass.
struct AFKanTrace {
  Var basis;        // X_A (B, D, n)
  Var normalized;   // X_N1 (B, D, n)
  Var attention;    // W_attn: (B, D, 1) global, (B, n, D) spatial; empty for multistep
  Var reduced;      // X'' (B, D)
  Var prelinear;    // X_N2 (B, D)
  Var output;       // X_out (B, d_out)
};

class AFKanLayer final : public Layer {
 public:
  AFKanLayer(const AFKanConfig& config, Rng& rng);

  Var forward(const Var& x, bool training) override;
  AFKanTrace trace(const Var& x, bool training);
  std::vector<NamedParam> parameters() const override;
  std::vector<NamedBuffer> buffers() override;
  std::size_t in_features() const override { return config_.in; }
  std::size_t out_features() const override { return config_.out; }
  std::string_view kind() const override { return "afkan"; }

  const AFKanConfig& config() const { return config_; }
  AFKanLayerParams& params() { return params_; }
  const AFKanLayerParams& params() const { return params_; }

 private:
  AFKanConfig config_;
  AFKanLayerParams params_;
};

struct ReluKanLayerParams {
  Var phase_low;    // (D, n)
  Var phase_high;   // (D, n)
  Var conv_weight;  // (d_out, D * n): a full (n, D) 2-D kernel per output channel
  Var conv_bias;    // (d_out)
};

// Multi-input ReLU-KAN: R (B, D, n) flattened and mapped by the full-kernel
// convolution, which is one dense product.
class ReluKanLayer final : public Layer {
 public:
  ReluKanLayer(std::size_t in, std::size_t out, const GridSpec& grid, Rng& rng);

  Var forward(const Var& x, bool training) override;
  std::vector<NamedParam> parameters() const override;
  std::size_t in_features() const override { return in_; }
  std::size_t out_features() const override { return out_; }
  std::string_view kind() const override { return "relukan"; }

  ReluKanLayerParams& params() { return params_; }
  const ReluKanLayerParams& params() const { return params_; }
  const GridSpec& grid() const { return grid_; }

 private:
  std::size_t in_;
  std::size_t out_;
  GridSpec grid_;
  ReluKanLayerParams params_;
};

struct MlpLayerParams {
  NormParams pre_norm;  // over d_in
  Var weight;           // (d_in, d_out), no bias
};

// norm -> x W -> activation (the activation is skipped on the last layer).
class MlpLayer final : public Layer {
 public:
  MlpLayer(std::size_t in, std::size_t out, NormKind norm, const ActivationKind& act,
           bool activate_output, Rng& rng);

  Var forward(const Var& x, bool training) override;
  std::vector<NamedParam> parameters() const override;
  std::vector<NamedBuffer> buffers() override;
  std::size_t in_features() const override { return in_; }
  std::size_t out_features() const override { return out_; }
  std::string_view kind() const override { return "mlp"; }

  MlpLayerParams& params() { return params_; }
  const MlpLayerParams& params() const { return params_; }
  bool activates_output() const { return activate_output_; }

 private:
  std::size_t in_;
  std::size_t out_;
  ActivationKind act_;
  bool activate_output_;
  MlpLayerParams params_;
};

struct BasisKanLayerParams {
  NormParams pre_norm;  // over d_in
  Var weight;           // (d_in * C, d_out)
  Var bias;             // (d_out)
};

// GRBF / RSWAF baseline: norm -> basis expansion (B, D, C) -> dense map.
class BasisKanLayer final : public Layer {
 public:
  BasisKanLayer(std::size_t in, std::size_t out, BasisKind basis, std::size_t num_centers,
                NormKind norm, Rng& rng);

  Var forward(const Var& x, bool training) override;
  std::vector<NamedParam> parameters() const override;
  std::vector<NamedBuffer> buffers() override;
  std::size_t in_features() const override { return in_; }
  std::size_t out_features() const override { return out_; }
  std::string_view kind() const override { return "basis_kan"; }

  BasisKanLayerParams& params() { return params_; }
  const BasisKanLayerParams& params() const { return params_; }
  BasisKind basis() const { return basis_; }
  const Tensor& centers() const { return centers_; }
  double width() const { return width_; }

 private:
  std::size_t in_;
  std::size_t out_;
  BasisKind basis_;
  Tensor centers_;
  double width_;
  BasisKanLayerParams params_;
};

}  // namespace afkan
