#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "specan/baselines.hpp"
#include "specan/rng.hpp"

using namespace specan;

namespace {

VaeConfig small_cfg() {
  VaeConfig cfg;
  cfg.widths = {10, 8, 6};
  cfg.latent_dim = 3;
  return cfg;
}

Mat random_inputs(std::size_t n, std::size_t d, std::uint64_t seed) {
  Mat x(n, d);
  rng::SplitMix64 g(seed);
  for (auto& v : x.a) v = g.uniform(0.05, 0.95);
  return x;
}

}  // namespace

TEST(Autoencoder, DefaultArchitectureShapes) {
  const MlpAutoencoder m = init_autoencoder(1);
  ASSERT_EQ(m.layers.size(), 8u);
  EXPECT_EQ(m.layers[0].fan_in(), 4096u);
  EXPECT_EQ(m.layers[2].fan_out(), 64u);
  EXPECT_EQ(m.layers[3].fan_in(), 64u);
  EXPECT_EQ(m.layers[3].fan_out(), 8u);
  EXPECT_EQ(m.layers[3].act, Activation::identity);  // deterministic bottleneck
  EXPECT_EQ(m.layers[4].fan_in(), 8u);
  EXPECT_EQ(m.layers[7].fan_out(), 4096u);
  EXPECT_EQ(m.layers[7].act, Activation::tanh01);
  EXPECT_EQ(m.input_dim(), 4096u);
}

TEST(Autoencoder, ReconstructionStaysInUnitInterval) {
  const MlpAutoencoder m = init_autoencoder(3, small_cfg());
  rng::SplitMix64 g(4);
  std::vector<double> x(10);
  for (auto& v : x) v = g.next_double();
  const auto y = ae_reconstruct(m, x);
  ASSERT_EQ(y.size(), 10u);
  for (double v : y) {
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
  EXPECT_THROW(ae_reconstruct(m, std::vector<double>(9, 0.5)), std::invalid_argument);
}

TEST(Autoencoder, ScoreIsMeanSquaredError) {
  const MlpAutoencoder m = init_autoencoder(3, small_cfg());
  std::vector<double> x(10, 0.4);
  const auto y = ae_reconstruct(m, x);
  double want = 0;
  for (std::size_t i = 0; i < x.size(); ++i) want += (x[i] - y[i]) * (x[i] - y[i]);
  want /= 10.0;
  EXPECT_DOUBLE_EQ(autoencoder_score(m, x), want);
}

TEST(Autoencoder, TrainingIsDeterministicAndConverges) {
  VaeConfig cfg;
  cfg.widths = {16, 12};
  cfg.latent_dim = 2;
  const Mat data = random_inputs(1, 16, 8);
  const AeTrainResult a = train_autoencoder(data, 400, 1, 5, cfg);
  const AeTrainResult b = train_autoencoder(data, 400, 1, 5, cfg);
  ASSERT_EQ(a.history.size(), 400u);
  EXPECT_EQ(a.history, b.history);
  for (std::size_t li = 0; li < a.model.layers.size(); ++li)
    EXPECT_EQ(a.model.layers[li].w.a, b.model.layers[li].w.a);
  EXPECT_LT(a.history.back(), a.history.front() * 0.2);

  const AeTrainResult c = train_autoencoder(data, 10, 1, 6, cfg);
  EXPECT_NE(a.model.layers[0].w.a, c.model.layers[0].w.a);
}

TEST(PoolFeatures, AveragesFourByFourBlocks) {
  Mat pixels(2, 64 * 64);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t r = 0; r < 64; ++r)
      for (std::size_t c = 0; c < 64; ++c)
        pixels.row(s)[r * 64 + c] = static_cast<double>(s * 7 + r) + static_cast<double>(c) / 100.0;
  const Mat f = pool_features_16x16(pixels);
  ASSERT_EQ(f.rows, 2u);
  ASSERT_EQ(f.cols, 256u);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t r : {std::size_t{0}, std::size_t{9}, std::size_t{15}})
      for (std::size_t c : {std::size_t{0}, std::size_t{15}}) {
        double want = 0;
        for (std::size_t dr = 0; dr < 4; ++dr)
          for (std::size_t dc = 0; dc < 4; ++dc)
            want += pixels.row(s)[(r * 4 + dr) * 64 + (c * 4 + dc)];
        want /= 16.0;
        ASSERT_NEAR(f.row(s)[r * 16 + c], want, 1e-12);
      }
  EXPECT_THROW(pool_features_16x16(Mat(2, 100)), std::invalid_argument);
}

namespace {

// Straight-from-the-definitions LOF, written independently of the library
// implementation: nested maps, no shared distance matrix.
std::vector<double> reference_lof(const Mat& train, const Mat& test, std::size_t k) {
  const std::size_t n = train.rows;
  const std::size_t d = train.cols;
  auto dist = [&](const double* a, const double* b) {
    double acc = 0;
    for (std::size_t i = 0; i < d; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
  };

  // k-distance and neighborhood (ties included) of every training point.
  std::vector<double> kdist(n);
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> ds;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) ds.push_back(dist(train.row(i), train.row(j)));
    std::vector<double> sorted = ds;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     sorted.end());
    kdist[i] = sorted[k - 1];
    for (std::size_t j = 0, c = 0; j < n; ++j) {
      if (j == i) continue;
      if (ds[c++] <= kdist[i]) nbrs[i].push_back(j);
    }
  }

  auto lrd_of = [&](const std::vector<std::size_t>& nb, const double* p) {
    double sum = 0;
    for (std::size_t o : nb) sum += std::max(kdist[o], dist(p, train.row(o)));
    sum = std::max(sum, 1e-12 * static_cast<double>(nb.size()));
    return static_cast<double>(nb.size()) / sum;
  };

  std::vector<double> train_lrd(n);
  for (std::size_t i = 0; i < n; ++i) train_lrd[i] = lrd_of(nbrs[i], train.row(i));

  std::vector<double> out(test.rows);
  for (std::size_t t = 0; t < test.rows; ++t) {
    const double* p = test.row(t);
    std::vector<double> ds(n);
    for (std::size_t j = 0; j < n; ++j) ds[j] = dist(p, train.row(j));
    std::vector<double> sorted = ds;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     sorted.end());
    const double kd = sorted[k - 1];
    std::vector<std::size_t> nb;
    for (std::size_t j = 0; j < n; ++j)
      if (ds[j] <= kd) nb.push_back(j);
    double reach_sum = 0, lrd_sum = 0;
    for (std::size_t o : nb) {
      reach_sum += std::max(kdist[o], ds[o]);
      lrd_sum += train_lrd[o];
    }
    reach_sum = std::max(reach_sum, 1e-12 * static_cast<double>(nb.size()));
    const double lrd_p = static_cast<double>(nb.size()) / reach_sum;
    out[t] = lrd_sum / (static_cast<double>(nb.size()) * lrd_p);
  }
  return out;
}

}  // namespace

TEST(Lof, UniformGridInteriorScoresNearOne) {
  // 9x9 unit grid; interior points are locally as dense as their neighbors.
  Mat train(81, 2);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) {
      train.at(static_cast<std::size_t>(r * 9 + c), 0) = r;
      train.at(static_cast<std::size_t>(r * 9 + c), 1) = c;
    }
  Mat test(2, 2);
  test.at(0, 0) = 4.5;
  test.at(0, 1) = 4.5;   // cell center, well inside
  test.at(1, 0) = 30.0;
  test.at(1, 1) = 30.0;  // far outside
  LofConfig cfg;
  cfg.k = 8;
  cfg.feature_mode = LofFeatureMode::raw_pixels;
  const auto s = lof_scores(train, test, cfg);
  EXPECT_NEAR(s[0], 1.0, 0.25);
  EXPECT_GT(s[1], 2.0);
}

TEST(Lof, DuplicatePointsStayFinite) {
  Mat train(12, 2);
  for (std::size_t i = 0; i < 6; ++i) {
    train.at(i, 0) = 1.0;  // six identical points
    train.at(i, 1) = 1.0;
    train.at(6 + i, 0) = static_cast<double>(i) * 2.0 + 5.0;
    train.at(6 + i, 1) = 0.0;
  }
  Mat test(1, 2);
  test.at(0, 0) = 1.0;
  test.at(0, 1) = 1.0;
  LofConfig cfg;
  cfg.k = 3;
  cfg.feature_mode = LofFeatureMode::raw_pixels;
  const auto s = lof_scores(train, test, cfg);
  ASSERT_TRUE(std::isfinite(s[0]));
  EXPECT_NEAR(s[0], 1.0, 1e-6);
}

TEST(Lof, MatchesIndependentReference) {
  rng::SplitMix64 g(71);
  for (std::size_t trial = 0; trial < 20; ++trial) {
    const std::size_t n = 30 + static_cast<std::size_t>(g.uniform_int(0, 50));
    const std::size_t d = 2 + static_cast<std::size_t>(g.uniform_int(0, 3));
    Mat train(n, d), test(10, d);
    for (auto& v : train.a) v = g.uniform(-3.0, 3.0);
    for (auto& v : test.a) v = g.uniform(-4.0, 4.0);
    // A couple of duplicates to exercise the tie handling.
    std::copy_n(train.row(0), d, train.row(1));
    std::copy_n(train.row(2), d, test.row(0));
    for (std::size_t k : {std::size_t{3}, std::size_t{10}, std::size_t{20}}) {
      LofConfig cfg;
      cfg.k = k;
      cfg.feature_mode = LofFeatureMode::raw_pixels;
      const auto got = lof_scores(train, test, cfg);
      const auto want = reference_lof(train, test, k);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i)
        ASSERT_NEAR(got[i], want[i], 1e-9 * std::max(1.0, std::abs(want[i])))
            << "trial " << trial << " k " << k << " i " << i;
    }
  }
}

TEST(Lof, DeterministicAndValidated) {
  Mat train = random_inputs(25, 3, 2);
  Mat test = random_inputs(5, 3, 3);
  LofConfig cfg;
  cfg.k = 5;
  cfg.feature_mode = LofFeatureMode::raw_pixels;
  EXPECT_EQ(lof_scores(train, test, cfg), lof_scores(train, test, cfg));
  cfg.k = 25;
  EXPECT_THROW(lof_scores(train, test, cfg), std::invalid_argument);
  cfg.k = 0;
  EXPECT_THROW(lof_scores(train, test, cfg), std::invalid_argument);
  cfg.k = 5;
  EXPECT_THROW(lof_scores(train, random_inputs(5, 4, 4), cfg), std::invalid_argument);
}
