#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"

using namespace cdsproxy;
using fixtures::to_dataset;
using fixtures::to_vector;

namespace {

Dataset one_d(const std::vector<double>& xs, const std::vector<std::size_t>& ys, std::size_t classes) {
  oracle::Labeled l;
  for (double v : xs) l.x.push_back({v});
  l.y = ys;
  l.classes = classes;
  return to_dataset(l);
}

Vector vec1(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST(Lda, SymmetricMidpoint) {
  const auto data = one_d({-1.5, -0.5, 0.5, 1.5}, {0, 0, 1, 1}, 2);
  const auto model = fit_lda(data);
  EXPECT_EQ(model->classify(vec1(0.5)), 1u);
  EXPECT_EQ(model->classify(vec1(-0.5)), 0u);
  const Vector s = model->scores(vec1(0.0));
  EXPECT_NEAR(s(0), s(1), 1e-12);
}

TEST(Lda, ScoresMatchOracle) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto l = fixtures::blobs(seed, 3, 15, 3);
    const auto data = to_dataset(l);
    for (bool diagonal : {false, true}) {
      const auto model = fit_lda(data, {diagonal ? CovarianceMode::Diagonal : CovarianceMode::Full});
      Rng rng(seed + 100);
      for (int t = 0; t < 5; ++t) {
        const auto x = fixtures::random_point(rng, 3);
        const auto ref = oracle::lda_scores(l, diagonal, x);
        const Vector got = model->scores(to_vector(x));
        for (std::size_t j = 0; j < 3; ++j) EXPECT_LE(oracle::rel_diff(got(static_cast<Eigen::Index>(j)), ref[j]), 1e-8);
      }
    }
  }
}

TEST(Lda, OwnMeanDominates) {
  Matrix means(3, 2);
  means << 0, 0, 4, 0, 0, 4;
  LinearDiscriminant model(means, Matrix::Identity(2, 2), uniform_priors(3));
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_EQ(model.classify(means.row(j).transpose()), static_cast<std::size_t>(j));
}

TEST(Lda, EqualMeansSeparateOnlyByPriors) {
  Matrix means = Matrix::Zero(3, 2);
  Vector priors(3);
  priors << 0.2, 0.5, 0.3;
  LinearDiscriminant model(means, Matrix::Identity(2, 2), priors);
  Vector x(2);
  x << 1.3, -0.4;
  const Vector s = model.scores(x);
  EXPECT_NEAR(s(1) - s(0), std::log(0.5 / 0.2), 1e-12);
  EXPECT_NEAR(s(2) - s(0), std::log(0.3 / 0.2), 1e-12);
  EXPECT_EQ(model.classify(x), 1u);
}

TEST(Lda, BoundaryOnGridMatchesOracle) {
  const auto l = fixtures::blobs(3, 2, 25, 2, 1.5);
  const auto model = fit_lda(to_dataset(l));
  for (const auto& p : fixtures::grid(-6, 6, 60)) {
    const auto ref = oracle::lda_scores(l, false, p);
    EXPECT_EQ(model->classify(to_vector(p)), ref[1] > ref[0] ? 1u : 0u);
  }
}

TEST(Qda, ScoresMatchOracle) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto l = fixtures::blobs(seed, 3, 12, 3);
    const auto data = to_dataset(l);
    for (bool diagonal : {false, true}) {
      const auto model = fit_qda(data, {diagonal ? CovarianceMode::Diagonal : CovarianceMode::Full});
      Rng rng(seed + 200);
      for (int t = 0; t < 5; ++t) {
        const auto x = fixtures::random_point(rng, 3);
        const auto ref = oracle::qda_scores(l, diagonal, x);
        const Vector got = model->scores(to_vector(x));
        for (std::size_t j = 0; j < 3; ++j) EXPECT_LE(oracle::rel_diff(got(static_cast<Eigen::Index>(j)), ref[j]), 1e-8);
      }
    }
  }
}

TEST(Qda, EqualCovariancesReduceToLda) {
  Rng rng(4);
  Matrix means(3, 2);
  for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = 2.0 * rng.normal();
  Matrix b(2, 2);
  b << 1.0, 0.3, -0.2, 0.8;
  const Matrix v = b * b.transpose();
  Vector priors(3);
  priors << 0.3, 0.3, 0.4;
  LinearDiscriminant lda(means, v, priors);
  QuadraticDiscriminant qda(means, {v, v, v}, priors);
  for (const auto& p : fixtures::grid(-6, 6, 80)) EXPECT_EQ(lda.classify(to_vector(p)), qda.classify(to_vector(p)));
}

TEST(Qda, SameMeanDifferentVariance) {
  Matrix means = Matrix::Zero(2, 1);
  QuadraticDiscriminant model(means, {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 4.0)}, uniform_priors(2));
  // d1 = d2 at x^2 = 8 ln 2 / 3 for variances 1 and 4
  const double root = std::sqrt(8.0 * std::log(2.0) / 3.0);
  EXPECT_EQ(model.classify(vec1(0.0)), 0u);
  EXPECT_EQ(model.classify(vec1(root * 0.99)), 0u);
  EXPECT_EQ(model.classify(vec1(-root * 0.99)), 0u);
  EXPECT_EQ(model.classify(vec1(root * 1.01)), 1u);
  EXPECT_EQ(model.classify(vec1(-root * 1.01)), 1u);
}

TEST(Qda, ClassTooSmall) {
  const auto data = one_d({0.0, 1.0, 2.0}, {0, 0, 1}, 2);
  try {
    fit_qda(data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ClassTooSmall);
  }
}

TEST(Kde, StandardNormalAtZero) {
  const std::vector<double> one = {0.0};
  EXPECT_NEAR(kde_log_density(one, KdeKernel::Normal, 1.0, 0.0), std::log(1.0 / std::sqrt(2.0 * std::numbers::pi)), 1e-14);
}

TEST(Kde, CompactSupportFloors) {
  const std::vector<double> s = {0.0, 0.5};
  EXPECT_EQ(kde_log_density(s, KdeKernel::Epanechnikov, 1.0, 2.0), kLogDensityFloor);
  EXPECT_EQ(kde_log_density(s, KdeKernel::Triangular, 1.0, -1.5), kLogDensityFloor);
}

TEST(Kde, MatchesDirectSummation) {
  Rng rng(13);
  for (int t = 0; t < 30; ++t) {
    std::vector<double> s(20);
    for (auto& v : s) v = rng.normal();
    const double b = 0.1 + rng.uniform();
    const double x = 2.0 * rng.normal();
    for (auto [k, ko] : {std::pair{KdeKernel::Normal, oracle::Kernel::Normal},
                         std::pair{KdeKernel::Triangular, oracle::Kernel::Triangular},
                         std::pair{KdeKernel::Epanechnikov, oracle::Kernel::Epanechnikov}}) {
      EXPECT_LE(oracle::rel_diff(kde_log_density(s, k, b, x), oracle::kde_log_density(s, ko, b, x)), 1e-10);
    }
  }
}

TEST(Kde, KernelsIntegrateToOne) {
  for (auto k : {KdeKernel::Normal, KdeKernel::Triangular, KdeKernel::Epanechnikov}) {
    double sum = 0.0;
    const double h = 1e-4;
    for (double u = -10.0; u < 10.0; u += h) sum += kernel_value(k, u + h / 2) * h;
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Kde, Errors) {
  const std::vector<double> none;
  const std::vector<double> one = {1.0};
  try {
    kde_log_density(none, KdeKernel::Normal, 1.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySample);
  }
  try {
    kde_log_density(one, KdeKernel::Normal, 0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonpositiveBandwidth);
  }
}

TEST(NaiveBayes, ScoresMatchProductOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto l = fixtures::blobs(seed, 2, 15, 3, 1.0);
    for (auto [k, ko] : {std::pair{KdeKernel::Normal, oracle::Kernel::Normal},
                         std::pair{KdeKernel::Triangular, oracle::Kernel::Triangular},
                         std::pair{KdeKernel::Epanechnikov, oracle::Kernel::Epanechnikov}}) {
      NbOptions opt;
      opt.kernel = k;
      opt.bandwidth = 0.7;
      const auto model = fit_nb(to_dataset(l), opt);
      Rng rng(seed + 300);
      for (int t = 0; t < 3; ++t) {
        const auto x = fixtures::random_point(rng, 3, 1.5);
        const auto ref = oracle::nb_scores(l, ko, 0.7, x);
        const Vector got = model->scores(to_vector(x));
        for (std::size_t j = 0; j < 2; ++j) EXPECT_LE(oracle::rel_diff(got(static_cast<Eigen::Index>(j)), ref[j]), 1e-8);
      }
    }
  }
}

TEST(NaiveBayes, OneFeatureIsKdeBayes) {
  const auto data = one_d({-1.0, -0.7, -0.2, 0.4, 0.9, 1.3}, {0, 0, 0, 1, 1, 1}, 2);
  const auto model = fit_nb(data, {NbDensity::Kernel, KdeKernel::Normal, 0.5, false});
  for (double x = -2.0; x <= 2.0; x += 0.05) {
    const std::vector<double> a = {-1.0, -0.7, -0.2}, b = {0.4, 0.9, 1.3};
    const double d0 = kde_log_density(a, KdeKernel::Normal, 0.5, x), d1 = kde_log_density(b, KdeKernel::Normal, 0.5, x);
    EXPECT_EQ(model->classify(vec1(x)), d1 > d0 ? 1u : 0u);
  }
}

TEST(NaiveBayes, GaussianVariantEqualsDiagonalQda) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto data = to_dataset(fixtures::blobs(seed, 3, 20, 2, 2.0));
    const auto nb = fit_nb(data, {NbDensity::Gaussian});
    const auto qda = fit_qda(data, {CovarianceMode::Diagonal});
    for (const auto& p : fixtures::grid(-8, 8, 60)) EXPECT_EQ(nb->classify(to_vector(p)), qda->classify(to_vector(p)));
  }
}

TEST(NaiveBayes, FarPointsStayFinite) {
  const auto data = to_dataset(fixtures::blobs(2, 2, 10, 2));
  NbOptions opt;
  opt.kernel = KdeKernel::Epanechnikov;
  const auto model = fit_nb(data, opt);
  Vector x(2);
  x << 1e6, -1e6;
  EXPECT_TRUE(model->scores(x).allFinite());
}
