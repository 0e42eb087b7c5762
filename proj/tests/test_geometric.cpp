#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace cdsproxy;
using fixtures::to_dataset;
using fixtures::to_matrix;
using fixtures::to_vector;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Distance, Pythagorean) {
  EXPECT_DOUBLE_EQ(euclidean_distance(v2(0, 0), v2(3, 4)), 5.0);
  EXPECT_DOUBLE_EQ(cityblock_distance(v2(0, 0), v2(3, 4)), 7.0);
}

TEST(Distance, MahalanobisIdentityIsEuclidean) {
  Cholesky id(Matrix::Identity(2, 2));
  EXPECT_NEAR(mahalanobis_distance(v2(0, 0), v2(3, 4), id), 5.0, 1e-14);
}

TEST(Distance, MatchOracles) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto a = fixtures::random_point(rng, 4), b = fixtures::random_point(rng, 4);
    const auto m = oracle::random_matrix(rng, 4, 4);
    oracle::Mat v(4, oracle::Vec(4, 0.0));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) v[i][j] += m[i][k] * m[j][k];
        if (i == j) v[i][j] += 0.5;
      }
    EXPECT_LE(oracle::rel_diff(euclidean_distance(to_vector(a), to_vector(b)), oracle::euclidean(a, b)), 1e-12);
    EXPECT_LE(oracle::rel_diff(cityblock_distance(to_vector(a), to_vector(b)), oracle::cityblock(a, b)), 1e-12);
    Cholesky c(to_matrix(v));
    EXPECT_LE(oracle::rel_diff(mahalanobis_distance(to_vector(a), to_vector(b), c), oracle::mahalanobis(a, b, v)), 1e-10);
  }
}

TEST(Knn, WorkedExampleMajority) {
  // red = 0, blue = 1
  oracle::Labeled l{{{0.0, 0.1}, {0.1, 0.0}, {0.2, 0.2}, {3.0, 3.0}, {3.1, 3.0}}, {0, 0, 1, 1, 1}, 2};
  const auto model = fit_knn(to_dataset(l), {3, Metric::Euclidean});
  EXPECT_EQ(model->classify(v2(0.0, 0.0)), 0u);
}

TEST(Knn, OneNeighbourMemorizes) {
  const auto l = fixtures::blobs(2, 3, 10, 2);
  const auto model = fit_knn(to_dataset(l), {1, Metric::Euclidean});
  for (std::size_t i = 0; i < l.x.size(); ++i) EXPECT_EQ(model->classify(to_vector(l.x[i])), l.y[i]);
}

TEST(Knn, DistanceTiesByTrainingIndex) {
  oracle::Labeled l{{{1.0}, {-1.0}, {5.0}}, {1, 0, 0}, 2};
  const auto model = fit_knn(to_dataset(l), {1, Metric::Euclidean});
  EXPECT_EQ(model->neighbours(Vector::Zero(1)), std::vector<std::size_t>{0});
  EXPECT_EQ(model->classify(Vector::Zero(1)), 1u);
}

TEST(Knn, MatchesFullSortOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto l = fixtures::blobs(seed, 3, 9, 3, 1.0);
    const auto data = to_dataset(l);
    const auto v = oracle::ridged(oracle::covariance_of(l.x));
    Rng rng(seed + 50);
    std::vector<oracle::Vec> queries;
    for (int t = 0; t < 20; ++t) queries.push_back(fixtures::random_point(rng, 3, 2.0));
    for (std::size_t k = 1; k <= data.size(); k += 2) {
      for (auto metric : {Metric::Euclidean, Metric::CityBlock, Metric::Mahalanobis}) {
        const auto model = fit_knn(data, {k, metric});
        for (const auto& q : queries) {
          std::size_t ref = 0;
          switch (metric) {
            case Metric::Euclidean: ref = oracle::knn_classify(l, k, q, oracle::euclidean); break;
            case Metric::CityBlock: ref = oracle::knn_classify(l, k, q, oracle::cityblock); break;
            case Metric::Mahalanobis:
              ref = oracle::knn_classify(l, k, q, [&](const auto& a, const auto& b) { return oracle::mahalanobis(a, b, v); });
              break;
          }
          EXPECT_EQ(model->classify(to_vector(q)), ref);
        }
      }
    }
  }
}

TEST(Knn, AllPointsGivesMajority) {
  const auto l = fixtures::blobs(3, 3, 5, 2);
  auto data = to_dataset(l);
  data.y[0] = 2;  // class 2 now has 6 members
  const auto model = fit_knn(data, {15, Metric::CityBlock});
  Rng rng(4);
  for (int t = 0; t < 20; ++t) EXPECT_EQ(model->classify(to_vector(fixtures::random_point(rng, 2, 10.0))), 2u);
}

TEST(Knn, MahalanobisAffineInvariant) {
  const auto l = fixtures::blobs(5, 3, 12, 3, 1.0);
  const auto data = to_dataset(l);
  Matrix a(3, 3);
  a << 2, 0.5, 0, -1, 1, 0.3, 0.2, 0, 3;
  Vector shift(3);
  shift << 1, -2, 5;
  Dataset moved = data;
  moved.x = (data.x * a.transpose()).rowwise() + shift.transpose();
  const auto m1 = fit_knn(data, {5, Metric::Mahalanobis});
  const auto m2 = fit_knn(moved, {5, Metric::Mahalanobis});
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const Vector x = to_vector(fixtures::random_point(rng, 3, 2.0));
    EXPECT_EQ(m1->classify(x), m2->classify(a * x + shift));
  }
}

TEST(Knn, BadK) {
  const auto data = to_dataset(fixtures::blobs(1, 2, 3, 2));
  for (std::size_t k : {0, 2, 7}) {
    try {
      fit_knn(data, {k, Metric::Euclidean});
      FAIL() << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadK);
    }
  }
}

TEST(Svm, SymmetricPairHardMargin) {
  SampleMatrix x(2, 1);
  x << -1, 1;
  SvmOptions opt;
  opt.cost = 1e6;
  const auto svm = fit_svm_binary(x, {-1, 1}, opt);
  EXPECT_EQ(svm.support.size(), 2u);
  EXPECT_NEAR(svm.decision(Vector::Constant(1, 0.0)), 0.0, 1e-6);
  EXPECT_NEAR(svm.decision(Vector::Constant(1, 1.0)), 1.0, 1e-4);
  EXPECT_NEAR(svm.decision(Vector::Constant(1, -1.0)), -1.0, 1e-4);
  EXPECT_NEAR(svm.decision(Vector::Constant(1, 0.37)), 0.37, 1e-4);
}

TEST(Svm, XorWithPolynomialKernel) {
  SampleMatrix x(4, 2);
  x << 1, 1, -1, -1, 1, -1, -1, 1;
  SvmOptions opt;
  opt.kernel = {KernelKind::Polynomial, std::nullopt, 2};
  opt.cost = 100.0;
  const auto svm = fit_svm_binary(x, {1, 1, -1, -1}, opt);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(svm.decision(x.row(i).transpose()) > 0.0, i < 2);
}

TEST(Svm, DecisionIsSumOverSupports) {
  const auto l = fixtures::blobs(7, 2, 15, 2, 1.0);
  const auto data = to_dataset(l);
  const auto y = fixtures::signs_for(data.y, 0);
  SvmOptions opt;
  opt.kernel.kind = KernelKind::Gaussian;
  const auto svm = fit_svm_binary(data.x, y, opt);
  const double c = 1.0 / 4.0;
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto q = fixtures::random_point(rng, 2);
    double f = svm.bias;
    for (std::size_t i = 0; i < l.x.size(); ++i) {
      const double d = oracle::euclidean(q, l.x[i]);
      f += svm.alpha(static_cast<Eigen::Index>(i)) * y[i] * std::exp(-c * d * d);
    }
    EXPECT_NEAR(svm.decision(to_vector(q)), f, 1e-10);
  }
}

TEST(Svm, DualFeasibilityAndOptimality) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto l = fixtures::blobs(seed, 2, 20, 2, 0.8, 0.7);
    const auto data = to_dataset(l);
    const auto y = fixtures::signs_for(data.y, 0);
    for (auto kind : {KernelKind::Linear, KernelKind::Gaussian, KernelKind::Polynomial}) {
      SvmOptions opt;
      opt.kernel.kind = kind;
      const double c = resolve_gaussian_c(opt.kernel, 2);
      const Matrix gram = gram_matrix(opt.kernel, c, data.x);
      const auto svm = fit_svm_binary(data.x, y, opt);
      double balance = 0.0;
      for (Eigen::Index i = 0; i < svm.alpha.size(); ++i) {
        EXPECT_GE(svm.alpha(i), -1e-12);
        EXPECT_LE(svm.alpha(i), opt.cost + 1e-12);
        balance += svm.alpha(i) * y[static_cast<std::size_t>(i)];
      }
      EXPECT_LE(std::abs(balance), 1e-6);
      const double ref = oracle::svm_dual_reference(fixtures::to_mat(gram), y, opt.cost);
      EXPECT_LE(std::abs(svm_dual_objective(svm, gram) - ref), 1e-4 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(Svm, GramIsPsd) {
  Rng rng(9);
  const auto x = to_matrix(oracle::random_matrix(rng, 25, 3));
  for (auto kind : {KernelKind::Linear, KernelKind::Gaussian, KernelKind::Polynomial}) {
    KernelSpec spec{kind, std::nullopt, 3};
    const Matrix k = gram_matrix(spec, resolve_gaussian_c(spec, 3), x);
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * k.trace());
  }
}

TEST(Svm, ScalingCostInSeparableRegime) {
  const auto data = to_dataset(fixtures::blobs(10, 2, 15, 2, 6.0, 0.3));
  const auto y = fixtures::signs_for(data.y, 0);
  SvmOptions a, b;
  a.cost = 100.0;
  b.cost = 1000.0;
  const auto s1 = fit_svm_binary(data.x, y, a), s2 = fit_svm_binary(data.x, y, b);
  for (const auto& p : fixtures::grid(-12, 12, 40))
    EXPECT_EQ(s1.decision(to_vector(p)) > 0.0, s2.decision(to_vector(p)) > 0.0);
}

TEST(Svm, SingleClassRejected) {
  SampleMatrix x(2, 1);
  x << 0, 1;
  try {
    fit_svm_binary(x, {1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClassInput);
  }
}

TEST(SvmMulticlass, TwoClassesReduceToBinary) {
  const auto data = to_dataset(fixtures::blobs(11, 2, 20, 2, 1.0));
  const auto binary = fit_svm_binary(data.x, fixtures::signs_for(data.y, 0));
  for (auto strategy : {SvmStrategy::OneVsRest, SvmStrategy::OneVsOne}) {
    SvmMulticlassOptions opt;
    opt.strategy = strategy;
    const auto model = fit_svm(data, opt);
    EXPECT_EQ(model->machines().size(), 1u);
    for (const auto& p : fixtures::grid(-6, 6, 80))
      EXPECT_EQ(model->classify(to_vector(p)), binary.decision(to_vector(p)) > 0.0 ? 0u : 1u);
  }
}

TEST(SvmMulticlass, SeparatedBlobsGaussian) {
  const auto data = to_dataset(fixtures::blobs(12, 3, 15, 2, 5.0, 0.3));
  SvmMulticlassOptions opt;
  opt.binary.kernel.kind = KernelKind::Gaussian;
  opt.binary.cost = 10.0;
  for (auto strategy : {SvmStrategy::OneVsRest, SvmStrategy::OneVsOne}) {
    opt.strategy = strategy;
    const auto model = fit_svm(data, opt);
    EXPECT_EQ(predict(*model, data.x), data.y);
  }
}

TEST(SvmMulticlass, OneVsOneMachineCount) {
  const auto data = to_dataset(fixtures::blobs(13, 5, 6, 2, 5.0, 0.3));
  SvmMulticlassOptions opt;
  opt.strategy = SvmStrategy::OneVsOne;
  EXPECT_EQ(fit_svm(data, opt)->machines().size(), 10u);
  opt.strategy = SvmStrategy::OneVsRest;
  EXPECT_EQ(fit_svm(data, opt)->machines().size(), 5u);
}
