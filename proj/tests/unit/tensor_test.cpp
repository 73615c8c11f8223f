#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "afkan/tensor.hpp"

namespace afkan {
namespace {

TEST(Tensor, ConstructsZeroFilledRowMajor) {
  Tensor t(Shape{2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  for (double v : t.data()) EXPECT_EQ(v, 0.0);
  t[4] = 7.0;
  EXPECT_EQ(t.at({1, 1}), 7.0);
}

TEST(Tensor, FactoriesAndItem) {
  EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_EQ(Tensor::scalar(2.5).rank(), 0u);
  const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.shape(), (Shape{2, 3}));
  EXPECT_EQ(m.at({1, 2}), 6.0);
  EXPECT_THROW(Tensor::matrix({{1, 2}, {3}}), ShapeError);
  EXPECT_THROW(m.item(), ShapeError);
}

TEST(Tensor, DataSizeMustMatchShape) {
  EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Tensor, DimAcceptsNegativeAxes) {
  const Tensor t(Shape{2, 3, 4});
  EXPECT_EQ(t.dim(-1), 4u);
  EXPECT_EQ(t.dim(0), 2u);
  EXPECT_THROW(t.dim(3), ShapeError);
  EXPECT_THROW(t.dim(-4), ShapeError);
}

TEST(Tensor, ReshapeKeepsDataAndChecksCount) {
  const Tensor v = Tensor::vector({1, 2, 3, 4, 5, 6});
  const Tensor r = v.reshaped(Shape{3, 2});
  EXPECT_EQ(r.at({2, 1}), 6.0);
  EXPECT_THROW(v.reshaped(Shape{4, 2}), ShapeError);
}

TEST(Tensor, CopiesAreDeep) {
  Tensor a = Tensor::vector({1, 2});
  Tensor b = a;
  b[0] = 9;
  EXPECT_EQ(a[0], 1.0);
  EXPECT_FALSE(a == b);
}

TEST(Tensor, ExtremaAndFiniteness) {
  Tensor t = Tensor::vector({3, -1, 2});
  EXPECT_EQ(t.max_value(), 3.0);
  EXPECT_EQ(t.min_value(), -1.0);
  EXPECT_TRUE(t.all_finite());
  t[1] = std::nan("");
  EXPECT_FALSE(t.all_finite());
}

TEST(Shape, NumelAndFormatting) {
  EXPECT_EQ(shape_numel(Shape{2, 3, 4}), 24u);
  EXPECT_EQ(shape_numel(Shape{}), 1u);
  EXPECT_EQ(shape_str(Shape{2, 3}), "(2, 3)");
}

TEST(Broadcast, TrailingDimensionRule) {
  EXPECT_EQ(broadcast_shape({2, 3, 1}, {3, 6}), (Shape{2, 3, 6}));
  EXPECT_EQ(broadcast_shape({4}, {2, 1}), (Shape{2, 4}));
  EXPECT_EQ(broadcast_shape({}, {2, 2}), (Shape{2, 2}));
  EXPECT_THROW(broadcast_shape({2, 3}, {4}), ShapeError);
}

TEST(Broadcast, ErrorNamesBothShapes) {
  try {
    broadcast_shape({2, 3, 1}, {4, 6});
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(2, 3, 1)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(4, 6)"), std::string::npos) << msg;
  }
}

TEST(Broadcast, AssociativeOnSmallShapes) {
  std::vector<Shape> shapes{{}};
  for (std::size_t rank = 1; rank <= 3; ++rank) {
    const std::size_t before = shapes.size();
    for (std::size_t i = 0; i < before; ++i) {
      if (shapes[i].size() != rank - 1) continue;
      for (std::size_t e = 1; e <= 3; ++e) {
        Shape s = shapes[i];
        s.push_back(e);
        shapes.push_back(s);
      }
    }
  }
  ASSERT_EQ(shapes.size(), 1u + 3u + 9u + 27u);
  auto try_bc = [](const Shape& a, const Shape& b) -> std::optional<Shape> {
    try {
      return broadcast_shape(a, b);
    } catch (const ShapeError&) {
      return std::nullopt;
    }
  };
  std::size_t checked = 0;
  for (const auto& a : shapes) {
    for (const auto& b : shapes) {
      for (const auto& c : shapes) {
        const auto ab = try_bc(a, b);
        const auto bc = try_bc(b, c);
        const auto left = ab ? try_bc(*ab, c) : std::nullopt;
        const auto right = bc ? try_bc(a, *bc) : std::nullopt;
        ASSERT_EQ(left, right) << shape_str(a) << shape_str(b) << shape_str(c);
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 40u * 40u * 40u);
}

TEST(Axis, NormalizesNegativeAndRejectsOutOfRange) {
  EXPECT_EQ(normalize_axis(-1, 3), 2u);
  EXPECT_EQ(normalize_axis(1, 3), 1u);
  EXPECT_THROW(normalize_axis(3, 3), ShapeError);
  EXPECT_THROW(normalize_axis(-4, 3), ShapeError);
}

}  // namespace
}  // namespace afkan
