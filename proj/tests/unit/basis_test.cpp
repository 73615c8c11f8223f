#include <gtest/gtest.h>

#include <cmath>

#include "afkan/afkan.hpp"

namespace afkan {
namespace {

const ActivationKind kRelu = ActivationKind::of(ActivationTag::kReLU);
const ActivationKind kSilu = ActivationKind::of(ActivationTag::kSiLU);

Var column(std::initializer_list<double> xs) {
  return Var::constant(Tensor(Shape{xs.size(), 1}, std::vector<double>(xs)));
}

TEST(PhaseInit, FiveThreeExample) {
  const PhasePair p = phase_init(GridSpec{5, 3}, PhaseLayout::kCompact);
  const double low[] = {-0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8};
  ASSERT_EQ(p.low.shape(), (Shape{8}));
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(p.low[i], low[i], 1e-15);
    EXPECT_NEAR(p.high[i], low[i] + 0.8, 1e-15);
  }
  EXPECT_NEAR(p.high[7], 1.6, 1e-15);
}

TEST(PhaseInit, ThreeThreeExample) {
  const PhasePair p = phase_init(GridSpec{3, 3}, PhaseLayout::kCompact);
  const double low[] = {-1, -2.0 / 3, -1.0 / 3, 0, 1.0 / 3, 2.0 / 3};
  const double high[] = {1.0 / 3, 2.0 / 3, 1, 4.0 / 3, 5.0 / 3, 2};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(p.low[i], low[i], 1e-15);
    EXPECT_NEAR(p.high[i], high[i], 1e-15);
  }
}

TEST(PhaseInit, PerInputRowsAreIdentical) {
  const PhasePair p = phase_init(GridSpec{3, 3}, PhaseLayout::kPerInput, 784);
  ASSERT_EQ(p.low.shape(), (Shape{784, 6}));
  ASSERT_EQ(p.high.shape(), (Shape{784, 6}));
  for (std::size_t r = 1; r < 784; ++r) {
    for (std::size_t i = 0; i < 6; ++i) {
      ASSERT_EQ(p.low[r * 6 + i], p.low[i]);
      ASSERT_EQ(p.high[r * 6 + i], p.high[i]);
    }
  }
}

TEST(PhaseInit, RejectsInvalidGrid) {
  EXPECT_THROW(phase_init(GridSpec{0, 3}, PhaseLayout::kCompact), ValueError);
  EXPECT_THROW(phase_init(GridSpec{3, -1}, PhaseLayout::kCompact), ValueError);
  EXPECT_THROW(phase_init(GridSpec{3, 3}, PhaseLayout::kPerInput, 0), ValueError);
}

TEST(Combine, SpecExamples) {
  EXPECT_NEAR(combine_scalar(FunctionType::kQuad1, 0.4, 0.4), 0.0256, 1e-16);
  EXPECT_EQ(combine_scalar(FunctionType::kSum, 0.7, 0.0), 0.7);
}

TEST(Combine, PartialsMatchDifferences) {
  for (auto type : kAllFunctionTypes) {
    const double p = 0.37, q = -0.81, h = 1e-6;
    double dp = 0, dq = 0;
    combine_partials(type, p, q, dp, dq);
    EXPECT_NEAR(dp, (combine_scalar(type, p + h, q) - combine_scalar(type, p - h, q)) / (2 * h), 1e-8)
        << function_type_name(type);
    EXPECT_NEAR(dq, (combine_scalar(type, p, q + h) - combine_scalar(type, p, q - h)) / (2 * h), 1e-8)
        << function_type_name(type);
  }
}

TEST(Combine, TensorAndTapeAgreeWithScalar) {
  const Tensor p = Tensor::matrix({{0.1, -0.5, 2.0}, {1.5, 0.0, -1.0}});
  const Tensor q = Tensor::matrix({{0.3, 0.2, -0.7}, {0.9, 1.1, 0.4}});
  for (auto type : kAllFunctionTypes) {
    const Tensor t = combine(type, p, q);
    const Tensor v = combine(type, Var::constant(p), Var::constant(q)).value();
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_EQ(t[i], combine_scalar(type, p[i], q[i]));
      EXPECT_NEAR(v[i], t[i], 1e-14);
    }
  }
}

TEST(Combine, ShapeMismatchAndNames) {
  EXPECT_THROW(combine(FunctionType::kSum, Tensor(Shape{2}), Tensor(Shape{3})), ShapeError);
  for (auto type : kAllFunctionTypes) EXPECT_EQ(parse_function_type(function_type_name(type)), type);
  EXPECT_THROW(parse_function_type("quad3"), ValueError);
}

TEST(BasisA, ReluQuad1PeakAtCellMidpoint) {
  const PhasePair p = phase_init(GridSpec{5, 3}, PhaseLayout::kCompact);
  const Tensor a = basis_A(column({-0.2}), Var::constant(p.low), Var::constant(p.high), kRelu,
                           FunctionType::kQuad1)
                       .value();
  EXPECT_NEAR(a[0], 0.0256, 1e-15);
}

TEST(BasisA, ReluVanishesOutsideSupport) {
  const PhasePair p = phase_init(GridSpec{5, 3}, PhaseLayout::kCompact);
  const Tensor a = basis_A(column({-0.7, 1.7, 0.5}), Var::constant(p.low), Var::constant(p.high),
                           kRelu, FunctionType::kQuad1)
                       .value();
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(a[i], 0.0);       // x = -0.7 lies left of every support
    EXPECT_EQ(a[8 + i], 0.0);   // x = 1.7 lies right of every support
  }
  // x = 0.5 is inside [l_i, h_i] only for i = 2..5.
  EXPECT_EQ(a[16 + 0], 0.0);
  EXPECT_EQ(a[16 + 1], 0.0);
  EXPECT_EQ(a[16 + 6], 0.0);
  EXPECT_EQ(a[16 + 7], 0.0);
  EXPECT_GT(a[16 + 4], 0.0);
}

TEST(BasisA, SiluNonzeroOutsideSupport) {
  const PhasePair p = phase_init(GridSpec{5, 3}, PhaseLayout::kCompact);
  const Tensor a = basis_A(column({-0.6 - 0.3}), Var::constant(p.low), Var::constant(p.high),
                           kSilu, FunctionType::kQuad1)
                       .value();
  EXPECT_GT(a[0], 1e-4);
}

TEST(BasisA, FusedMatchesComposedValuesAndGradients) {
  Rng rng(8);
  for (auto tag : kAllActivations) {
    for (auto type : kAllFunctionTypes) {
      const auto kind = ActivationKind::of(tag);
      Tensor xv(Shape{3, 4});
      for (auto& v : xv.data()) v = rng.uniform(-0.9, 1.9);
      PhasePair pp = phase_init(GridSpec{3, 3}, PhaseLayout::kCompact);
      Tensor w(Shape{3, 4, 6});
      for (auto& v : w.data()) v = rng.uniform(-1, 1);
      auto run = [&](bool fused) {
        Var x = Var::parameter(xv);
        Var lo = Var::parameter(pp.low);
        Var hi = Var::parameter(pp.high);
        const Var a = fused ? basis_A(x, lo, hi, kind, type) : basis_A_composed(x, lo, hi, kind, type);
        backward(sum_all(a * Var::constant(w)));
        return std::vector<Tensor>{a.value(), x.grad(), lo.grad(), hi.grad()};
      };
      const auto f = run(true);
      const auto c = run(false);
      for (std::size_t k = 0; k < f.size(); ++k) {
        ASSERT_EQ(f[k].shape(), c[k].shape());
        for (std::size_t i = 0; i < f[k].size(); ++i) {
          ASSERT_NEAR(f[k][i], c[k][i], 1e-12 * std::max(1.0, std::abs(c[k][i])))
              << activation_name(tag) << "/" << function_type_name(type) << " tensor " << k;
        }
      }
    }
  }
}

TEST(BasisA, AppendsBasisAxisAndRejectsPhaseMismatch) {
  const PhasePair p = phase_init(GridSpec{3, 3}, PhaseLayout::kCompact);
  EXPECT_EQ(basis_A(Var::constant(Tensor(Shape{4})), Var::constant(p.low), Var::constant(p.high),
                    kSilu, FunctionType::kQuad1)
                .shape(),
            (Shape{4, 6}));
  EXPECT_THROW(basis_A(Var::constant(Tensor(Shape{2, 2})), Var::constant(p.low),
                       Var::constant(Tensor(Shape{5})), kSilu, FunctionType::kQuad1),
               ShapeError);
}

TEST(ReluKanR, ConstantsForFiveThree) {
  const PhasePair p = phase_init(GridSpec{5, 3}, PhaseLayout::kPerInput, 1);
  const double gap = p.high[0] - p.low[0];
  EXPECT_NEAR(16.0 / std::pow(gap, 4), 39.0625, 1e-12);
  EXPECT_NEAR(std::pow(gap, 4) / 16.0, 0.0256, 1e-15);
}

TEST(ReluKanR, UnitPeakAndZeroAtEndpoints) {
  const PhasePair p = phase_init(GridSpec{5, 3}, PhaseLayout::kPerInput, 1);
  const Var lo = Var::constant(p.low);
  const Var hi = Var::constant(p.high);
  const Tensor mid = relu_kan_R(column({-0.2}), lo, hi).value();
  EXPECT_NEAR(mid[0], 1.0, 1e-12);
  const Tensor ends = relu_kan_R(column({p.low[3], p.high[3]}), lo, hi).value();
  EXPECT_EQ(ends[3], 0.0);
  EXPECT_EQ(ends[8 + 3], 0.0);
}

TEST(ReluKanR, EqualsScaledReluQuad1) {
  Rng rng(9);
  const PhasePair per = phase_init(GridSpec{4, 2}, PhaseLayout::kPerInput, 3);
  const PhasePair compact = phase_init(GridSpec{4, 2}, PhaseLayout::kCompact);
  Tensor xv(Shape{5, 3});
  for (auto& v : xv.data()) v = rng.uniform(-0.8, 1.8);
  const Tensor r = relu_kan_R(Var::constant(xv), Var::constant(per.low), Var::constant(per.high)).value();
  const Tensor a = basis_A(Var::constant(xv), Var::constant(compact.low),
                           Var::constant(compact.high), kRelu, FunctionType::kQuad1)
                       .value();
  const double gap4 = std::pow(compact.high[0] - compact.low[0], 4);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(a[i], r[i] * gap4 / 16.0, 1e-12);
}

TEST(ReluKanR, FusedMatchesComposed) {
  Rng rng(10);
  Tensor xv(Shape{4, 3});
  for (auto& v : xv.data()) v = rng.uniform(-0.5, 1.5);
  PhasePair pp = phase_init(GridSpec{3, 3}, PhaseLayout::kPerInput, 3);
  for (auto& v : pp.low.data()) v += rng.uniform(-0.05, 0.05);
  auto run = [&](bool fused) {
    Var x = Var::parameter(xv);
    Var lo = Var::parameter(pp.low);
    Var hi = Var::parameter(pp.high);
    const Var r = fused ? relu_kan_R(x, lo, hi) : relu_kan_R_composed(x, lo, hi);
    backward(sum_all(r * r));
    return std::vector<Tensor>{r.value(), x.grad(), lo.grad(), hi.grad()};
  };
  const auto f = run(true);
  const auto c = run(false);
  for (std::size_t k = 0; k < f.size(); ++k) {
    for (std::size_t i = 0; i < f[k].size(); ++i) {
      EXPECT_NEAR(f[k][i], c[k][i], 1e-11 * std::max(1.0, std::abs(c[k][i])));
    }
  }
}

TEST(ReluKanR, DegeneratePhasesRejected) {
  Tensor lo(Shape{1, 2}, std::vector<double>{0.0, 0.5});
  Tensor hi(Shape{1, 2}, std::vector<double>{1.0, 0.5});
  EXPECT_THROW(relu_kan_R(column({0.3}), Var::constant(lo), Var::constant(hi)), ValueError);
}

TEST(Rbf, GaussianExamples) {
  const Tensor c = Tensor::vector({0.0});
  EXPECT_EQ(grbf(Var::constant(Tensor::vector({0.0})), c, 0.5).value()[0], 1.0);
  EXPECT_NEAR(grbf(Var::constant(Tensor::vector({0.5})), c, 0.5).value()[0], 0.606531, 1e-6);
}

TEST(Rbf, GaussianScalarOracleOnEightCenters) {
  const Tensor centers = linspace(-2, 2, 8);
  const double h = 4.0 / 7.0;
  const Tensor y = grbf(Var::constant(Tensor::vector({0.3})), centers, h).value();
  ASSERT_EQ(y.shape(), (Shape{1, 8}));
  for (std::size_t j = 0; j < 8; ++j) {
    const double r = 0.3 - (-2.0 + 4.0 * j / 7.0);
    EXPECT_NEAR(y[j], std::exp(-r * r / (2 * h * h)), 1e-12);
  }
}

TEST(Rbf, ReflectionalSwitchExamples) {
  const Tensor c = Tensor::vector({0.25});
  EXPECT_EQ(rswaf(Var::constant(Tensor::vector({0.25})), c, 0.3).value()[0], 1.0);
  EXPECT_LT(rswaf(Var::constant(Tensor::vector({0.25 + 20 * 0.3})), c, 0.3).value()[0], 1e-16);
}

TEST(Rbf, SymmetricAboutCenter) {
  Rng rng(11);
  const Tensor c = Tensor::vector({0.4});
  for (int i = 0; i < 100; ++i) {
    const double d = rng.uniform(0, 2);
    const Var xs = Var::constant(Tensor::vector({0.4 + d, 0.4 - d}));
    const Tensor g = grbf(xs, c, 0.7).value();
    const Tensor r = rswaf(xs, c, 0.7).value();
    EXPECT_NEAR(g[0], g[1], 1e-12);
    EXPECT_NEAR(r[0], r[1], 1e-12);
  }
}

TEST(Rbf, RejectsNonPositiveWidth) {
  EXPECT_THROW(grbf(Var::constant(Tensor::vector({0})), Tensor::vector({0}), 0.0), ValueError);
  EXPECT_THROW(rswaf(Var::constant(Tensor::vector({0})), Tensor::vector({0}), -1.0), ValueError);
}

TEST(Linspace, Endpoints) {
  const Tensor t = linspace(-2, 2, 5);
  EXPECT_EQ(t[0], -2.0);
  EXPECT_EQ(t[4], 2.0);
  EXPECT_EQ(t[2], 0.0);
}

TEST(BSpline, WorkedExampleRows) {
  const Tensor b = bspline_basis(Tensor::vector({0.6, 0.4}), GridSpec{5, 3});
  const double row06[] = {0, 0, 0, 0, 1.0 / 6, 2.0 / 3, 1.0 / 6, 0};
  const double row04[] = {0, 0, 0, 0.0208, 0.4792, 0.4792, 0.0208, 0};
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(b[i], row06[i], 1e-12);
    EXPECT_NEAR(b[8 + i], row04[i], 5e-5);
  }
}

TEST(BSpline, PartitionOfUnity) {
  Rng rng(12);
  Tensor x(Shape{1000});
  for (auto& v : x.data()) v = rng.uniform(-1, 1);
  const Tensor b = bspline_basis(x, GridSpec{5, 3});
  for (std::size_t e = 0; e < 1000; ++e) {
    double s = 0;
    for (std::size_t i = 0; i < 8; ++i) s += b[e * 8 + i];
    ASSERT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(BSpline, RejectsEmptyRange) {
  EXPECT_THROW(bspline_basis(Tensor::vector({0}), GridSpec{5, 3}, 1.0, 1.0), ValueError);
}

}  // namespace
}  // namespace afkan
