#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "cerebellum/encoding.hpp"
#include "cerebellum/errors.hpp"

using namespace cerebellum;

namespace {

SparseActivation enc(const BasisLayout& l, std::vector<double> x) { return encode_position(l, x); }

std::size_t shared(const SparseActivation& a, const SparseActivation& b) {
  std::vector<std::uint32_t> out;
  std::set_intersection(a.indices.begin(), a.indices.end(), b.indices.begin(), b.indices.end(),
                        std::back_inserter(out));
  return out.size();
}

}  // namespace

TEST(Encoding, SingleTilingCellCenter) {
  const auto l = BasisLayout::uniform({0.0}, {4.0}, 1, {5});
  const auto a = enc(l, {1.5});  // cell width 1, u = 1.5 -> cell 1
  ASSERT_EQ(a.active(), 1u);
  EXPECT_EQ(a.indices[0], 1u);
  EXPECT_DOUBLE_EQ(a.values[0], 1.0);
}

TEST(Encoding, BoundaryTieGoesToLowerCell) {
  const auto l = BasisLayout::uniform({0.0}, {4.0}, 1, {5});
  EXPECT_EQ(enc(l, {2.0}).indices[0], 1u);
  EXPECT_EQ(enc(l, {2.0 + 1e-12}).indices[0], 2u);
  EXPECT_EQ(enc(l, {0.0}).indices[0], 0u);
  EXPECT_EQ(enc(l, {4.0}).indices[0], 3u);
}

TEST(Encoding, OneCellPerTilingRectangular) {
  const auto l = BasisLayout::uniform({-1.0, -2.0}, {1.0, 2.0}, 16, {7, 9});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto a = enc(l, {-1.0 + 2.0 * u(rng), -2.0 + 4.0 * u(rng)});
    ASSERT_EQ(a.active(), 16u);
    for (std::size_t s = 0; s < a.active(); ++s) {
      EXPECT_EQ(a.indices[s] / l.cells_per_tiling(), s);
      EXPECT_DOUBLE_EQ(a.values[s], 1.0);
    }
    EXPECT_TRUE(std::is_sorted(a.indices.begin(), a.indices.end()));
  }
}

class Shapes : public ::testing::TestWithParam<std::pair<FieldShape, Combine>> {};

TEST_P(Shapes, PartitionOfUnityPerTiling) {
  const auto [shape, combine] = GetParam();
  const auto l = BasisLayout::uniform({-1.0, 0.0}, {1.0, 3.0}, 8, {6, 5}, shape, combine);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto a = enc(l, {-1.0 + 2.0 * u(rng), 3.0 * u(rng)});
    std::vector<double> per(8, 0.0);
    for (std::size_t s = 0; s < a.active(); ++s) {
      EXPECT_GT(a.values[s], 0.0);
      per[a.indices[s] / l.cells_per_tiling()] += a.values[s];
    }
    for (double p : per) EXPECT_NEAR(p, 1.0, 1e-12);
    EXPECT_NEAR(a.sum(), 8.0, 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(All, Shapes,
                         ::testing::Values(std::pair{FieldShape::rectangular, Combine::product},
                                           std::pair{FieldShape::triangular, Combine::product},
                                           std::pair{FieldShape::triangular, Combine::and_min},
                                           std::pair{FieldShape::smooth, Combine::product}));

TEST(Encoding, TriangularAtCellCenterIsOneCell) {
  const auto l = BasisLayout::uniform({0.0}, {4.0}, 1, {5}, FieldShape::triangular);
  const auto a = enc(l, {1.5});
  ASSERT_EQ(a.active(), 1u);
  EXPECT_DOUBLE_EQ(a.values[0], 1.0);
}

TEST(Encoding, LocalGeneralization) {
  const auto l = BasisLayout::uniform({-1.0, -1.0}, {1.0, 1.0}, 13, {8, 8});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double x = u(rng), y = u(rng);
    const int dim = i % 2;
    std::vector<double> near{x, y}, far{x, y};
    near[dim] += 0.999 * frac(rng) * l.resolution(dim);
    far[dim] += l.cell_width(dim) * (1.0 + 1e-9 + frac(rng));
    far[dim] = std::min(far[dim], 1.0);
    const auto a = enc(l, {x, y});
    EXPECT_GE(shared(a, enc(l, near)), 12u);
    if (far[dim] - (dim == 0 ? x : y) > l.cell_width(dim)) EXPECT_EQ(shared(a, enc(l, far)), 0u);
  }
}

TEST(Encoding, OutOfRangeClamps) {
  const auto l = BasisLayout::uniform({0.0}, {1.0}, 4, {5});
  bool clamped = false;
  const auto a = encode_position(l, std::vector<double>{1.7}, &clamped);
  EXPECT_TRUE(clamped);
  EXPECT_EQ(a.indices, enc(l, {1.0}).indices);
  encode_position(l, std::vector<double>{0.5}, &clamped);
  EXPECT_FALSE(clamped);
}

TEST(Encoding, DimensionMismatchAndNaN) {
  const auto l = BasisLayout::uniform({0.0}, {1.0}, 4, {5});
  EXPECT_THROW(enc(l, {0.1, 0.2}), InputError);
  EXPECT_THROW(enc(l, {std::nan("")}), InputError);
}

TEST(Encoding, LayoutValidation) {
  EXPECT_THROW(validate(BasisLayout::uniform({0.0}, {1.0}, 0, {5})), ConfigError);
  EXPECT_THROW(validate(BasisLayout::uniform({0.0}, {1.0}, 2, {1})), ConfigError);
  EXPECT_THROW(validate(BasisLayout::uniform({1.0}, {1.0}, 2, {3})), ConfigError);
  auto l = BasisLayout::uniform({0.0}, {1.0}, 2, {3});
  l.offsets[1] = l.offsets[0];
  EXPECT_THROW(validate(l), ConfigError);
  const auto ok = BasisLayout::uniform({0.0, 0.0}, {1.0, 1.0}, 4, {3, 5});
  EXPECT_NO_THROW(validate(ok));
  EXPECT_EQ(ok.cell_count(), 60u);
}

TEST(Encoding, ModulateExamples) {
  const auto l = BasisLayout::uniform({0.0, 0.0}, {1.0, 1.0}, 4, {3, 5}, FieldShape::triangular);
  const auto b = enc(l, {0.3, 0.8});
  const auto zero = modulate(b, 0.0);
  EXPECT_EQ(zero.indices, b.indices);
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(modulate(b, 1.0).values, b.values);
  const auto r = modulate(b, 0.37), r2 = modulate(b, 0.74);
  for (std::size_t s = 0; s < b.active(); ++s) EXPECT_EQ(r2.values[s], 2.0 * r.values[s]);
}

TEST(Encoding, ModulationLinearity) {
  const auto l = BasisLayout::uniform({0.0}, {1.0}, 8, {6}, FieldShape::smooth);
  const auto b = enc(l, {0.42});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), c = u(rng), r = u(rng), s = u(rng);
    const auto lhs = modulate(b, a * r + c * s);
    const auto x = modulate(b, r), y = modulate(b, s);
    for (std::size_t k = 0; k < b.active(); ++k) {
      EXPECT_NEAR(lhs.values[k], a * x.values[k] + c * y.values[k], 1e-14 * (1 + std::abs(lhs.values[k])));
    }
  }
}

TEST(Encoding, DualRail) {
  const auto l = BasisLayout::uniform({0.0}, {1.0}, 4, {5});
  const auto b = enc(l, {0.3});
  const auto d = modulate_dual_rail(b, -2.0);
  for (std::size_t k = 0; k < b.active(); ++k) {
    EXPECT_EQ(d.positive.values[k], 0.0);
    EXPECT_EQ(d.negative.values[k], 2.0);
    EXPECT_EQ(d.positive.values[k] - d.negative.values[k], modulate(b, -2.0).values[k]);
  }
}

TEST(Encoding, MossySumsCountMatchingDimensions) {
  const auto l = BasisLayout::uniform({0.0, 0.0}, {1.0, 1.0}, 3, {4, 4});
  const std::vector<double> x{0.31, 0.77};
  const auto m = mossy_sums(l, x);
  ASSERT_EQ(m.size(), l.cell_count());
  const auto a = enc(l, {0.31, 0.77});
  std::size_t twos = 0, ones = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 2.0) ++twos;
    if (m[i] == 1.0) ++ones;
  }
  EXPECT_EQ(twos, 3u);
  EXPECT_EQ(ones, 3u * (3 + 3));
  for (auto i : a.indices) EXPECT_EQ(m[i], 2.0);
}

TEST(Encoding, FieldShapeNames) {
  EXPECT_EQ(parse_field_shape("smooth-product"), FieldShape::smooth);
  EXPECT_EQ(parse_combine("and-min"), Combine::and_min);
  EXPECT_THROW(parse_field_shape("hexagonal"), InputError);
}
