#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "afkan/layers.hpp"

namespace afkan {

// Declarative description of a network.
struct ModelSpec {
  std::vector<std::size_t> widths{784, 64, 10};
  Variant variant = Variant::kAfKan;
  GridSpec grid{3, 3};
  ActivationTag act = ActivationTag::kSiLU;
  FunctionType ftype = FunctionType::kQuad1;
  ReductionMode mode = ReductionMode::kGlobalAttn;
  NormKind pln = NormKind::kLayer;
  bool l2mm = true;
  BasisKind basis = BasisKind::kGrbf;
  std::size_t num_centers = 8;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  static ModelSpec from_json(const std::string& text);
  // "afkan:global_attn", "relukan", "mlp", "basis_kan:grbf".
  std::string label() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Stack of layers built from a spec. Owns its parameters; move-only so two
// models never alias the same tape leaves.
class Model {
 public:
  // init_model: phases from phase_init, dense/conv weights Kaiming-uniform
  // (fan-in), biases zero, tau = sqrt(D), norm gain 1 / bias 0. Fully
  // determined by spec.seed.
  explicit Model(ModelSpec spec);

  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  Var forward(const Var& x, bool training);
  // Inference-mode logits without recording a tape.
  Tensor predict(const Tensor& x);

  // "layers.<i>.<name>" in construction order.
  std::vector<NamedParam> parameters() const;
  std::vector<NamedBuffer> buffers();
  void zero_grad();

  const ModelSpec& spec() const { return spec_; }
  std::size_t layer_count() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

 private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

inline Model init_model(const ModelSpec& spec) { return Model(spec); }

// Binary checkpoint: magic "AFKANCKP", u32 version, spec JSON, then named
// tensors (parameters, then buffers) as rank, extents and raw little-endian
// doubles. Loading rebuilds the model from the spec and overwrites values.
void save_checkpoint(Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace afkan
