#include <gtest/gtest.h>

#include <cmath>

#include "afkan/afkan.hpp"

namespace afkan {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -2, double hi = 2) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

TEST(L2MinMax, PairMapsToUnitRange) {
  const Tensor y = l2_minmax(Var::constant(Tensor::vector({3, 4}))).value();
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 1.0);
}

TEST(L2MinMax, ConstantAndZeroTensorsMapToLow) {
  const Tensor c = l2_minmax(Var::constant(Tensor(Shape{2, 3}, 5.0))).value();
  for (double v : c.data()) EXPECT_EQ(v, 0.0);
  const Tensor z = l2_minmax(Var::constant(Tensor(Shape{4}))).value();
  for (double v : z.data()) EXPECT_EQ(v, 0.0);
  const Tensor s = l2_minmax(Var::constant(Tensor(Shape{3}, 2.0)), -1.0, 1.0).value();
  for (double v : s.data()) EXPECT_EQ(v, -1.0);
}

TEST(L2MinMax, CustomRange) {
  const Tensor y = l2_minmax(Var::constant(Tensor::vector({1, 2, 3})), -2, 3).value();
  EXPECT_EQ(y[0], -2.0);
  EXPECT_NEAR(y[1], 0.5, 1e-12);
  EXPECT_EQ(y[2], 3.0);
}

TEST(L2MinMax, ScaleInvariant) {
  Rng rng(1);
  const Tensor x = random_tensor(Shape{3, 5}, rng);
  Tensor x7 = x;
  for (auto& v : x7.data()) v *= 7.0;
  const Tensor a = l2_minmax(Var::constant(x)).value();
  const Tensor b = l2_minmax(Var::constant(x7)).value();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(L2MinMax, GradientMatchesDifferences) {
  Rng rng(2);
  Var x = Var::parameter(random_tensor(Shape{2, 3, 4}, rng));
  const Tensor w = random_tensor(Shape{2, 3, 4}, rng);
  const double err = grad_check([&] { return sum_all(l2_minmax(x) * Var::constant(w)); }, x, 1e-6);
  EXPECT_LT(err, 1e-6);
}

TEST(LayerNorm, StandardizesRow) {
  const Var g = Var::constant(Tensor(Shape{3}, 1.0));
  const Var b = Var::constant(Tensor(Shape{3}));
  const Tensor y = layer_norm(Var::constant(Tensor::matrix({{1, 2, 3}})), g, b).value();
  EXPECT_NEAR(y[0], -1.2247, 1e-4);
  EXPECT_NEAR(y[1], 0.0, 1e-15);
  EXPECT_NEAR(y[2], 1.2247, 1e-4);
  EXPECT_NEAR(y[2], std::sqrt(1.5) * 1.0 / std::sqrt(1.0 + 1.5e-5), 1e-12);
}

TEST(LayerNorm, RowMomentsAfterNormalization) {
  Rng rng(3);
  const Tensor x = random_tensor(Shape{16, 32}, rng, -10, 10);
  const Tensor y = layer_norm(Var::constant(x), Var::constant(Tensor(Shape{32}, 1.0)),
                              Var::constant(Tensor(Shape{32})))
                       .value();
  for (std::size_t r = 0; r < 16; ++r) {
    double m = 0, v = 0;
    for (std::size_t c = 0; c < 32; ++c) m += y[r * 32 + c];
    m /= 32;
    for (std::size_t c = 0; c < 32; ++c) v += (y[r * 32 + c] - m) * (y[r * 32 + c] - m);
    v /= 32;
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v, 1.0, 1e-4);
  }
}

TEST(LayerNorm, AffineAndGradients) {
  Rng rng(4);
  Var x = Var::parameter(random_tensor(Shape{4, 6}, rng));
  Var g = Var::parameter(random_tensor(Shape{6}, rng, 0.5, 1.5));
  Var b = Var::parameter(random_tensor(Shape{6}, rng));
  const Tensor w = random_tensor(Shape{4, 6}, rng);
  const double err =
      grad_check([&] { return sum_all(layer_norm(x, g, b) * Var::constant(w)); }, {x, g, b}, 1e-5);
  EXPECT_LT(err, 1e-7);
}

TEST(LayerNorm, RejectsWidthMismatch) {
  EXPECT_THROW(layer_norm(Var::constant(Tensor(Shape{2, 3})), Var::constant(Tensor(Shape{4}, 1.0)),
                          Var::constant(Tensor(Shape{4}))),
               ShapeError);
}

TEST(BatchNorm, TwoRowColumn) {
  Tensor rm(Shape{1}), rv(Shape{1}, 1.0);
  const Tensor y = batch_norm(Var::constant(Tensor::matrix({{0}, {2}})),
                              Var::constant(Tensor(Shape{1}, 1.0)), Var::constant(Tensor(Shape{1})),
                              rm, rv, true)
                       .value();
  EXPECT_NEAR(y[0], -1.0, 1e-5);
  EXPECT_NEAR(y[1], 1.0, 1e-5);
  EXPECT_NEAR(rm[0], 0.1, 1e-15);
  EXPECT_NEAR(rv[0], 0.9 + 0.1 * 2.0, 1e-15);
}

TEST(BatchNorm, InferenceUsesRunningStatistics) {
  Tensor rm = Tensor::vector({1.0, -1.0});
  Tensor rv = Tensor::vector({4.0, 0.25});
  const Tensor y = batch_norm(Var::constant(Tensor::matrix({{3, 0}})),
                              Var::constant(Tensor::vector({2, 1})), Var::constant(Tensor::vector({0.5, 0})),
                              rm, rv, false)
                       .value();
  EXPECT_NEAR(y[0], 2 * 2 / std::sqrt(4 + 1e-5) + 0.5, 1e-12);
  EXPECT_NEAR(y[1], 1 / std::sqrt(0.25 + 1e-5), 1e-12);
  EXPECT_EQ(rm[0], 1.0);
  EXPECT_EQ(rv[1], 0.25);
}

TEST(BatchNorm, SingleRowTrainingRejected) {
  Tensor rm(Shape{3}), rv(Shape{3}, 1.0);
  EXPECT_THROW(batch_norm(Var::constant(Tensor(Shape{1, 3})), Var::constant(Tensor(Shape{3}, 1.0)),
                          Var::constant(Tensor(Shape{3})), rm, rv, true),
               ShapeError);
}

TEST(BatchNorm, GradientsMatchDifferences) {
  Rng rng(5);
  Var x = Var::parameter(random_tensor(Shape{5, 3}, rng));
  Var g = Var::parameter(random_tensor(Shape{3}, rng, 0.5, 1.5));
  Var b = Var::parameter(random_tensor(Shape{3}, rng));
  const Tensor w = random_tensor(Shape{5, 3}, rng);
  const double err = grad_check(
      [&] {
        Tensor rm(Shape{3}), rv(Shape{3}, 1.0);
        return sum_all(batch_norm(x, g, b, rm, rv, true) * Var::constant(w));
      },
      {x, g, b}, 1e-5);
  EXPECT_LT(err, 1e-7);
}

TEST(ApplyNorm, NoneIsIdentity) {
  NormParams p = NormParams::make(NormKind::kNone, 4);
  const Var x = Var::constant(Tensor::matrix({{1, 2, 3, 4}}));
  const Tensor y = apply_norm(x, p, true).value();
  EXPECT_TRUE(y == x.value());
}

TEST(ApplyNorm, MakeInitializesAffineAndRunningStats) {
  const NormParams p = NormParams::make(NormKind::kBatch, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(p.gain.value()[i], 1.0);
    EXPECT_EQ(p.bias.value()[i], 0.0);
    EXPECT_EQ(p.running_mean[i], 0.0);
    EXPECT_EQ(p.running_var[i], 1.0);
  }
  EXPECT_TRUE(p.gain.requires_grad());
}

TEST(NormKind, NamesRoundTrip) {
  for (auto k : {NormKind::kLayer, NormKind::kBatch, NormKind::kNone}) {
    EXPECT_EQ(parse_norm_kind(norm_kind_name(k)), k);
  }
  EXPECT_THROW(parse_norm_kind("group"), ValueError);
}

}  // namespace
}  // namespace afkan
