#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "afkan/afkan.hpp"

namespace afkan {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("afkan_model_test_" + name);
}

std::vector<Tensor> values(const Model& m) {
  std::vector<Tensor> out;
  for (const auto& p : m.parameters()) out.push_back(p.var.value());
  return out;
}

TEST(Model, InitIsDeterministicInSeed) {
  ModelSpec spec;
  spec.widths = {20, 6, 3};
  const Model a(spec), b(spec);
  EXPECT_EQ(values(a), values(b));
  spec.seed = 1;
  const Model c(spec);
  EXPECT_NE(values(a), values(c));
}

TEST(Model, DefaultInitialization) {
  ModelSpec spec;
  const Model m(spec);
  const auto& layer = dynamic_cast<const AFKanLayer&>(m.layer(0));
  EXPECT_EQ(layer.params().temperature.value()[0], 28.0);
  const double bound = kaiming_bound(784);
  EXPECT_LE(layer.params().w_out.value().max_value(), bound);
  EXPECT_GE(layer.params().w_out.value().min_value(), -bound);
  for (double v : layer.params().b_out.value().data()) EXPECT_EQ(v, 0.0);
  for (double v : layer.params().pln.gain.value().data()) EXPECT_EQ(v, 1.0);
  const PhasePair p = phase_init(GridSpec{3, 3}, PhaseLayout::kCompact);
  EXPECT_TRUE(layer.params().phase_low.value() == p.low);
  EXPECT_TRUE(layer.params().phase_high.value() == p.high);
}

TEST(Model, ParameterNamesArePrefixed) {
  ModelSpec spec;
  spec.widths = {4, 3, 2};
  spec.variant = Variant::kMlp;
  const Model m(spec);
  const auto params = m.parameters();
  ASSERT_FALSE(params.empty());
  EXPECT_EQ(params.front().name, "layers.0.norm.gain");
  EXPECT_EQ(params.back().name, "layers.1.weight");
}

TEST(Model, PredictMatchesInferenceForward) {
  ModelSpec spec;
  spec.widths = {10, 4, 3};
  spec.pln = NormKind::kBatch;
  Model m(spec);
  Tensor x(Shape{5, 10});
  Rng rng(3);
  for (auto& v : x.data()) v = rng.uniform();
  const Tensor a = m.predict(x);
  const Tensor b = m.forward(Var::constant(x), false).value();
  EXPECT_TRUE(a == b);
}

TEST(ModelSpec, JsonRoundTrip) {
  ModelSpec spec;
  spec.widths = {784, 9, 10};
  spec.variant = Variant::kReluKan;
  spec.grid = GridSpec{5, 2};
  spec.act = ActivationTag::kGELU;
  spec.ftype = FunctionType::kCubic1;
  spec.mode = ReductionMode::kSpatialAttn;
  spec.pln = NormKind::kNone;
  spec.l2mm = false;
  spec.basis = BasisKind::kRswaf;
  spec.num_centers = 5;
  spec.seed = 42;
  EXPECT_EQ(ModelSpec::from_json(spec.to_json()), spec);
}

TEST(ModelSpec, BadJsonIsDataError) {
  EXPECT_THROW(ModelSpec::from_json("{not json"), DataError);
  EXPECT_THROW(ModelSpec::from_json("{\"widths\": \"x\"}"), DataError);
}

TEST(ModelSpec, Labels) {
  ModelSpec spec;
  EXPECT_EQ(spec.label(), "afkan:global_attn");
  spec.variant = Variant::kBasisKan;
  EXPECT_EQ(spec.label(), "basis_kan:grbf");
  spec.variant = Variant::kMlp;
  EXPECT_EQ(spec.label(), "mlp");
}

TEST(ModelSpec, ValidateRejectsBadValues) {
  ModelSpec spec;
  spec.widths = {784, 0, 10};
  EXPECT_THROW(spec.validate(), ValueError);
  spec = ModelSpec{};
  spec.grid = GridSpec{0, 3};
  EXPECT_THROW(spec.validate(), ValueError);
  spec = ModelSpec{};
  spec.variant = Variant::kBasisKan;
  spec.num_centers = 1;
  EXPECT_THROW(spec.validate(), ValueError);
}

TEST(Checkpoint, RoundTripRestoresParametersAndBuffers) {
  ModelSpec spec;
  spec.widths = {12, 5, 3};
  spec.pln = NormKind::kBatch;
  spec.seed = 9;
  Model m(spec);
  for (const auto& p : m.parameters()) {
    for (auto& v : p.var.node()->value.data()) v += 0.125;
  }
  Tensor x(Shape{4, 12}, 0.3);
  m.forward(Var::constant(x), true);  // moves the running statistics
  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(m, path);
  Model back = load_checkpoint(path);
  EXPECT_EQ(back.spec(), spec);
  EXPECT_EQ(values(back), values(m));
  auto b1 = m.buffers();
  auto b2 = back.buffers();
  ASSERT_EQ(b1.size(), b2.size());
  for (std::size_t i = 0; i < b1.size(); ++i) EXPECT_TRUE(*b1[i].tensor == *b2[i].tensor);
  EXPECT_TRUE(back.predict(x) == m.predict(x));
  fs::remove(path);
}

TEST(Checkpoint, CorruptOrMissingFilesAreDataErrors) {
  ModelSpec spec;
  spec.widths = {6, 2};
  Model m(spec);
  const auto path = temp_path("corrupt.ckpt");
  save_checkpoint(m, path);
  const auto size = fs::file_size(path);
  fs::resize_file(path, size / 2);
  EXPECT_THROW(load_checkpoint(path), DataError);
  {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << "NOTACKPT-garbage";
  }
  EXPECT_THROW(load_checkpoint(path), DataError);
  fs::remove(path);
  EXPECT_THROW(load_checkpoint(path), DataError);
}

}  // namespace
}  // namespace afkan
