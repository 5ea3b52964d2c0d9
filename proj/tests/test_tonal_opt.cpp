#include "gim/tonal_opt.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace gim {
namespace {

PixelGrid smooth_image(int w, int h, int channels) {
  PixelGrid f(w, h, channels);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        f.at(x, y, c) = 128 + 60 * std::sin(0.4 * x + c) * std::cos(0.3 * y) + 0.2 * x * y;
  return f;
}

ConstraintSet sampled(const MaskSet& masks, const PixelGrid& f) {
  ConstraintSet b;
  for (int c = 0; c < f.channels(); ++c) b.push_back(build_b(masks, f.channel(c)));
  return b;
}

// Random masks whose constraint rows are independent, so R is defined for
// any stored values.
MaskSet full_rank_masks(int w, int h, int points, std::mt19937& rng) {
  for (;;) {
    MaskSet masks = oracle::random_masks(w, h, oracle::all_features(), points, rng);
    Eigen::MatrixXd a(points, Eigen::Index(w) * h);
    const Eigen::MatrixXd stacked = oracle::stacked(masks);
    Eigen::Index row = 0;
    for (const MaskPoint& p : masks.points())
      a.row(row++) = stacked.row(Eigen::Index(p.feature) * w * h + p.pixel);
    if (Eigen::FullPivLU<Eigen::MatrixXd>(a).rank() == points) return masks;
  }
}

Eigen::MatrixXd dense_R(const MaskSet& masks) {
  const Eigen::Index k = masks.total_points();
  Eigen::MatrixXd r(masks.geometry().size(), k);
  for (Eigen::Index q = 0; q < k; ++q) {
    Vector e = Vector::Zero(k);
    e[q] = 1.0;
    r.col(q) = oracle::inpaint(masks, expand(masks, e));
  }
  return r;
}

TEST(Tonal, FullDirichletMaskIsAlreadyOptimal) {
  const PixelGrid f = smooth_image(6, 5, 1);
  MaskSet masks(GridGeometry(6, 5), {FeatureKind::kDirichlet});
  for (Eigen::Index j = 0; j < 30; ++j) masks.insert(0, j);
  const auto result = tonal_optimise(f, masks, sampled(masks, f));
  EXPECT_LE(result.mse_after, 1e-10);
  EXPECT_LE((result.b[0] - f.channel(0)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Tonal, NeverDegradesAndKeepsSupport) {
  std::mt19937 rng(3);
  const PixelGrid f = smooth_image(12, 10, 3);
  const MaskSet masks = full_rank_masks(12, 10, 14, rng);
  const ConstraintSet b0 = sampled(masks, f);
  const auto result = tonal_optimise(f, masks, b0);
  EXPECT_LE(result.mse_after, result.mse_before);
  EXPECT_NEAR(result.mse_after, mse(result.u, f).mse, 1e-9 * std::max(1.0, result.mse_after));
  ASSERT_EQ(result.b.size(), 3u);
  for (const ConstraintVector& b : result.b) {
    ASSERT_EQ(b.size(), masks.geometry().size() * masks.feature_count());
    for (Eigen::Index s = 0; s < b.size(); ++s) {
      const int feature = int(s / masks.geometry().size());
      if (!masks.contains(feature, s % masks.geometry().size())) EXPECT_EQ(b[s], 0.0);
    }
  }

  // Starting from the optimum changes nothing of substance.
  const auto again = tonal_optimise(f, masks, result.b);
  EXPECT_LE(again.mse_after, again.mse_before);
  EXPECT_NEAR(again.mse_before, result.mse_after, 1e-6 * result.mse_after);
}

TEST(Tonal, MatchesDenseLeastSquares) {
  std::mt19937 rng(4);
  const PixelGrid f = smooth_image(16, 16, 1);
  const MaskSet masks = full_rank_masks(16, 16, 20, rng);
  const Eigen::MatrixXd r = dense_R(masks);
  const Vector best = r.colPivHouseholderQr().solve(f.channel(0));
  const double oracle_mse = (r * best - f.channel(0)).squaredNorm() / 256.0;

  TonalConfig cfg;
  cfg.outer = {1e-10, 500};
  cfg.inner = {1e-12, 50000};
  cfg.reconstruction = {1e-12, 50000};
  const auto tight = tonal_optimise(f, masks, sampled(masks, f), cfg);
  EXPECT_NEAR(tight.mse_after, oracle_mse, 1e-4 * oracle_mse);
  EXPECT_LE(oracle::relative_error(compress(masks, tight.b[0]), best), 1e-4);

  // Default tolerances still land close to the optimum.
  const auto loose = tonal_optimise(f, masks, sampled(masks, f));
  EXPECT_LE(loose.mse_after, 1.05 * oracle_mse);
  EXPECT_GE(loose.mse_after, oracle_mse * (1 - 1e-6));

  // Optimality: the gradient R^T (R b - f) vanishes.
  const Vector grad = r.transpose() * (r * compress(masks, tight.b[0]) - f.channel(0));
  EXPECT_LE(grad.norm(), 1e-6 * (r.transpose() * f.channel(0)).norm());
}

TEST(Tonal, OptimisedValuesDifferFromSamplesAndImprove) {
  const PixelGrid f = smooth_image(16, 16, 1);
  MaskSet masks(GridGeometry(16, 16), {FeatureKind::kDirichlet});
  for (Eigen::Index j : {17, 30, 120, 135, 200, 226}) masks.insert(0, j);
  const ConstraintSet b0 = sampled(masks, f);
  const auto result = tonal_optimise(f, masks, b0);
  EXPECT_LT(result.mse_after, 0.9 * result.mse_before);
  EXPECT_GT((result.b[0] - b0[0]).cwiseAbs().maxCoeff(), 1.0);
}

TEST(Tonal, RejectsMismatchedInputs) {
  const PixelGrid f = smooth_image(6, 5, 1);
  MaskSet masks(GridGeometry(6, 5), {FeatureKind::kDirichlet});
  EXPECT_THROW(tonal_optimise(f, masks, {ConstraintVector::Zero(30)}), ValidationError);
  masks.insert(0, 3);
  EXPECT_THROW(tonal_optimise(f, masks, {}), ValidationError);
  EXPECT_THROW(tonal_optimise(smooth_image(5, 5, 1), masks, {ConstraintVector::Zero(30)}), ValidationError);
}

}  // namespace
}  // namespace gim
