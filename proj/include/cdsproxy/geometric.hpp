#pragma once

// k-nearest neighbours and soft-margin kernel support vector machines.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "cdsproxy/core.hpp"
#include "cdsproxy/numerics.hpp"

namespace cdsproxy {

// ---------------------------------------------------------------------------
// Distances

enum class Metric { Euclidean, CityBlock, Mahalanobis };

inline double euclidean_distance(const VectorRef& x, const VectorRef& y) {
  require_dimension(x.size(), y.size(), "distance");
  return (x - y).norm();
}

inline double cityblock_distance(const VectorRef& x, const VectorRef& y) {
  require_dimension(x.size(), y.size(), "distance");
  return (x - y).cwiseAbs().sum();
}

/// sqrt((x - y)' V^-1 (x - y)) with V given by its Cholesky factor.
inline double mahalanobis_distance(const VectorRef& x, const VectorRef& y, const Cholesky& cov) {
  require_dimension(x.size(), y.size(), "distance");
  require_dimension(cov.dimension(), x.size(), "distance");
  return std::sqrt(cov.inverse_quadratic(x - y));
}

// ---------------------------------------------------------------------------
// k-NN

inline constexpr std::size_t kDefaultNeighbours = 9;

struct KnnOptions {
  std::size_t k = kDefaultNeighbours;
  Metric metric = Metric::Euclidean;
};

class KnnClassifier final : public Classifier {
 public:
  KnnClassifier(const Dataset& train, KnnOptions options) : options_(options) {
    validate_dataset(train);
    if (train.size() == 0) fail(ErrorCode::EmptyTrainingSet, "k-NN needs training points");
    if (options.k == 0 || options.k % 2 == 0 || options.k > train.size()) {
      fail(ErrorCode::BadK, "k must be odd and at most the training size, got " + std::to_string(options.k));
    }
    x_ = train.x;
    y_ = train.y;
    classes_ = train.class_count();
    if (options.metric == Metric::Mahalanobis) {
      const auto cov = sample_mean_covariance(train.x, CovarianceMode::Full);
      try {
        cov_.emplace(regularize(cov.matrix));
      } catch (const Error&) {
        fail(ErrorCode::SingularCovariance, "training covariance not positive definite");
      }
    }
  }

  double distance(const VectorRef& a, const VectorRef& b) const {
    switch (options_.metric) {
      case Metric::Euclidean:
        return euclidean_distance(a, b);
      case Metric::CityBlock:
        return cityblock_distance(a, b);
      case Metric::Mahalanobis:
        return mahalanobis_distance(a, b, *cov_);
    }
    return 0.0;
  }

  /// Training indices of the k nearest points, nearest first, ties by index.
  std::vector<std::size_t> neighbours(const VectorRef& x) const {
    require_dimension(dimension(), x.size(), "knn");
    std::vector<std::pair<double, std::size_t>> d(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) {
      d[i] = {distance(x, x_.row(static_cast<Eigen::Index>(i)).transpose()), i};
    }
    const auto k = static_cast<std::ptrdiff_t>(options_.k);
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    std::vector<std::size_t> out;
    out.reserve(options_.k);
    for (std::ptrdiff_t i = 0; i < k; ++i) out.push_back(d[static_cast<std::size_t>(i)].second);
    return out;
  }

  // Vote counts; the argmax picks the smallest class on ties.
  Vector scores(const VectorRef& x) const override {
    Vector votes = Vector::Zero(static_cast<Eigen::Index>(classes_));
    for (auto i : neighbours(x)) votes(static_cast<Eigen::Index>(y_[i])) += 1.0;
    return votes;
  }
  Eigen::Index dimension() const override { return x_.cols(); }
  std::size_t class_count() const override { return classes_; }
  std::string family() const override { return "kNN"; }
  const KnnOptions& options() const { return options_; }

 private:
  KnnOptions options_;
  SampleMatrix x_;
  std::vector<std::size_t> y_;
  std::size_t classes_ = 0;
  std::optional<Cholesky> cov_;
};

inline std::unique_ptr<KnnClassifier> fit_knn(const Dataset& train, KnnOptions options = {}) {
  return std::make_unique<KnnClassifier>(train, options);
}

// ---------------------------------------------------------------------------
// Kernels

enum class KernelKind { Linear, Gaussian, Polynomial };

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  std::optional<double> gaussian_c;  // unset: 1 / (2d) at fit time
  int degree = 3;
};

inline double kernel(const KernelSpec& spec, double c, const VectorRef& x, const VectorRef& y) {
  switch (spec.kind) {
    case KernelKind::Linear:
      return x.dot(y);
    case KernelKind::Gaussian:
      return std::exp(-c * (x - y).squaredNorm());
    case KernelKind::Polynomial:
      return std::pow(1.0 + x.dot(y), spec.degree);
  }
  return 0.0;
}

inline double resolve_gaussian_c(const KernelSpec& spec, Eigen::Index dimension) {
  const double c = spec.gaussian_c.value_or(1.0 / (2.0 * static_cast<double>(dimension)));
  if (!(c > 0.0)) fail(ErrorCode::BadArgument, "Gaussian kernel constant must be positive");
  if (spec.kind == KernelKind::Polynomial && spec.degree < 1) {
    fail(ErrorCode::BadArgument, "polynomial degree must be at least 1");
  }
  return c;
}

inline Matrix gram_matrix(const KernelSpec& spec, double c, const SampleMatrix& x) {
  const auto n = x.rows();
  Matrix k(n, n);
  if (spec.kind != KernelKind::Gaussian) {
    k.noalias() = x * x.transpose();
    if (spec.kind == KernelKind::Polynomial) {
      k = (k.array() + 1.0).pow(static_cast<double>(spec.degree)).matrix();
    }
    return k;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      k(i, j) = k(j, i) = std::exp(-c * (x.row(i) - x.row(j)).squaredNorm());
    }
  }
  return k;
}

// ---------------------------------------------------------------------------
// Binary SVM

struct SvmOptions {
  KernelSpec kernel;
  double cost = 1.0;
  double tolerance = 1e-4;
  std::size_t max_iterations = 1000000;
};

struct BinarySvm {
  Vector alpha;                 // one entry per training point
  std::vector<int> labels;      // +1 / -1 per training point
  double bias = 0.0;
  std::vector<std::size_t> support;
  SampleMatrix support_vectors;
  Vector support_weights;       // alpha_j y_j on the support set
  KernelSpec kernel;
  double gaussian_c = 0.0;
  double cost = 1.0;
  std::size_t iterations = 0;

  // yhat(x) = sum_j alpha_j y_j k(x, x_j) + alpha_0
  double decision(const VectorRef& x) const {
    require_dimension(support_vectors.cols(), x.size(), "svm_decision");
    double f = bias;
    for (Eigen::Index s = 0; s < support_vectors.rows(); ++s) {
      f += support_weights(s) * cdsproxy::kernel(kernel, gaussian_c, x, support_vectors.row(s).transpose());
    }
    return f;
  }
};

namespace detail {

// Pairwise coordinate ascent on the dual
//   min 1/2 a'Qa - e'a,  0 <= a <= C,  y'a = 0,  Q_ij = y_i y_j K_ij
// with second-order working-set selection.
inline BinarySvm solve_svm_dual(const Matrix& gram, const std::vector<int>& y, const SvmOptions& options) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const double cost = options.cost;
  constexpr double tau = 1e-12;
  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);
  auto q = [&](Eigen::Index i, Eigen::Index j) { return y[i] * y[j] * gram(i, j); };
  auto in_up = [&](Eigen::Index t) { return (y[t] > 0 && alpha(t) < cost) || (y[t] < 0 && alpha(t) > 0.0); };
  auto in_low = [&](Eigen::Index t) { return (y[t] > 0 && alpha(t) > 0.0) || (y[t] < 0 && alpha(t) < cost); };

  std::size_t iter = 0;
  for (;; ++iter) {
    Eigen::Index i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad(t) > gmax) {
        gmax = -y[t] * grad(t);
        i = t;
      }
    }
    Eigen::Index j = -1;
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y[t] * grad(t);
      gmin = std::min(gmin, v);
      if (i < 0) continue;
      const double b = gmax - v;
      if (b > 0.0) {
        double a = gram(i, i) + gram(t, t) - 2.0 * gram(i, t);
        if (a <= 0.0) a = tau;
        if (-(b * b) / a < best) {
          best = -(b * b) / a;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < options.tolerance) break;
    if (iter >= options.max_iterations) {
      fail(ErrorCode::NoConvergence, "SVM dual did not reach the KKT tolerance within the iteration cap");
    }

    const double ai = alpha(i), aj = alpha(j);
    if (y[i] != y[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = tau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = ai - aj;
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0.0) {
        if (alpha(j) < 0.0) {
          alpha(j) = 0.0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = -diff;
      }
      if (diff > 0.0) {
        if (alpha(i) > cost) {
          alpha(i) = cost;
          alpha(j) = cost - diff;
        }
      } else if (alpha(j) > cost) {
        alpha(j) = cost;
        alpha(i) = cost + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = tau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = ai + aj;
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > cost) {
        if (alpha(i) > cost) {
          alpha(i) = cost;
          alpha(j) = sum - cost;
        }
      } else if (alpha(j) < 0.0) {
        alpha(j) = 0.0;
        alpha(i) = sum;
      }
      if (sum > cost) {
        if (alpha(j) > cost) {
          alpha(j) = cost;
          alpha(i) = sum - cost;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = sum;
      }
    }
    const double di = alpha(i) - ai, dj = alpha(j) - aj;
    for (Eigen::Index t = 0; t < n; ++t) grad(t) += q(t, i) * di + q(t, j) * dj;
  }

  // Bias from the free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad(t);
    if (alpha(t) >= cost) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha(t) <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : (ub + lb) / 2.0;

  BinarySvm out;
  out.alpha = alpha;
  out.labels = y;
  out.bias = -rho;
  out.cost = cost;
  out.iterations = iter;
  return out;
}

inline void attach_supports(BinarySvm& svm, const SampleMatrix& x, const KernelSpec& spec, double c) {
  svm.kernel = spec;
  svm.gaussian_c = c;
  for (std::size_t i = 0; i < svm.labels.size(); ++i) {
    if (svm.alpha(static_cast<Eigen::Index>(i)) > 0.0) svm.support.push_back(i);
  }
  svm.support_vectors.resize(static_cast<Eigen::Index>(svm.support.size()), x.cols());
  svm.support_weights.resize(static_cast<Eigen::Index>(svm.support.size()));
  for (std::size_t s = 0; s < svm.support.size(); ++s) {
    const auto i = static_cast<Eigen::Index>(svm.support[s]);
    svm.support_vectors.row(static_cast<Eigen::Index>(s)) = x.row(i);
    svm.support_weights(static_cast<Eigen::Index>(s)) = svm.alpha(i) * svm.labels[svm.support[s]];
  }
}

inline void check_labels(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else fail(ErrorCode::BadArgument, "binary SVM labels must be +1 or -1");
  }
  if (!pos || !neg) fail(ErrorCode::SingleClassInput, "binary SVM needs both labels");
}

}  // namespace detail

/// Solves the soft-margin dual on a precomputed Gram matrix.
inline BinarySvm fit_svm_binary_gram(const Matrix& gram, const SampleMatrix& x, const std::vector<int>& y,
                                     const SvmOptions& options, double gaussian_c) {
  detail::check_labels(y);
  if (!(options.cost > 0.0)) fail(ErrorCode::BadArgument, "SVM cost must be positive");
  auto svm = detail::solve_svm_dual(gram, y, options);
  detail::attach_supports(svm, x, options.kernel, gaussian_c);
  return svm;
}

inline BinarySvm fit_svm_binary(const SampleMatrix& x, const std::vector<int>& y, const SvmOptions& options = {}) {
  require_dimension(x.rows(), static_cast<Eigen::Index>(y.size()), "fit_svm_binary");
  const double c = resolve_gaussian_c(options.kernel, x.cols());
  return fit_svm_binary_gram(gram_matrix(options.kernel, c, x), x, y, options, c);
}

/// 1/2 a'Qa - e'a evaluated on a Gram matrix.
inline double svm_dual_objective(const BinarySvm& svm, const Matrix& gram) {
  Vector ya(svm.alpha.size());
  for (Eigen::Index i = 0; i < ya.size(); ++i) ya(i) = svm.alpha(i) * svm.labels[static_cast<std::size_t>(i)];
  return 0.5 * ya.dot(gram * ya) - svm.alpha.sum();
}

// ---------------------------------------------------------------------------
// Multiclass SVM

enum class SvmStrategy { OneVsRest, OneVsOne };

struct SvmMulticlassOptions {
  SvmOptions binary;
  SvmStrategy strategy = SvmStrategy::OneVsRest;
};

class SvmClassifier final : public Classifier {
 public:
  struct Machine {
    std::size_t positive;
    std::optional<std::size_t> negative;  // empty: one-vs-rest
    BinarySvm svm;
  };

  SvmClassifier(const Dataset& train, const SvmMulticlassOptions& options) : strategy_(options.strategy) {
    validate_dataset(train);
    classes_ = train.class_count();
    dimension_ = train.dimension();
    const double c = resolve_gaussian_c(options.binary.kernel, dimension_);
    const Matrix gram = gram_matrix(options.binary.kernel, c, train.x);
    if (strategy_ == SvmStrategy::OneVsRest && classes_ > 2) {
      for (std::size_t j = 0; j < classes_; ++j) {
        std::vector<int> y(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) y[i] = train.y[i] == j ? 1 : -1;
        machines_.push_back({j, std::nullopt, fit_svm_binary_gram(gram, train.x, y, options.binary, c)});
      }
      return;
    }
    for (std::size_t a = 0; a < classes_; ++a) {
      for (std::size_t b = a + 1; b < classes_; ++b) {
        std::vector<Eigen::Index> idx;
        std::vector<int> y;
        for (std::size_t i = 0; i < train.size(); ++i) {
          if (train.y[i] == a || train.y[i] == b) {
            idx.push_back(static_cast<Eigen::Index>(i));
            y.push_back(train.y[i] == a ? 1 : -1);
          }
        }
        const auto m = static_cast<Eigen::Index>(idx.size());
        Matrix sub(m, m);
        SampleMatrix xs(m, dimension_);
        for (Eigen::Index r = 0; r < m; ++r) {
          xs.row(r) = train.x.row(idx[static_cast<std::size_t>(r)]);
          for (Eigen::Index s = 0; s < m; ++s) sub(r, s) = gram(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(s)]);
        }
        machines_.push_back({a, b, fit_svm_binary_gram(sub, xs, y, options.binary, c)});
      }
    }
  }

  // Two classes always use one machine. One-vs-rest: decision values. One-vs-one: vote counts plus a tie-break
  // in (-1/2, 1/2) from the summed decision values.
  Vector scores(const VectorRef& x) const override {
    require_dimension(dimension_, x.size(), "svm_scores");
    const auto n = static_cast<Eigen::Index>(classes_);
    if (strategy_ == SvmStrategy::OneVsRest) {
      Vector out(n);
      for (const auto& m : machines_) {
        const double f = m.svm.decision(x);
        out(static_cast<Eigen::Index>(m.positive)) = f;
        if (m.negative) out(static_cast<Eigen::Index>(*m.negative)) = -f;
      }
      return out;
    }
    Vector votes = Vector::Zero(n), sums = Vector::Zero(n);
    for (const auto& m : machines_) {
      const double f = m.svm.decision(x);
      const auto a = static_cast<Eigen::Index>(m.positive), b = static_cast<Eigen::Index>(*m.negative);
      votes(f > 0.0 ? a : b) += 1.0;
      sums(a) += f;
      sums(b) -= f;
    }
    return votes + (sums.array().atan() / std::numbers::pi).matrix();
  }
  Eigen::Index dimension() const override { return dimension_; }
  std::size_t class_count() const override { return classes_; }
  std::string family() const override { return "SVM"; }
  const std::vector<Machine>& machines() const { return machines_; }
  SvmStrategy strategy() const { return strategy_; }

 private:
  SvmStrategy strategy_;
  std::size_t classes_ = 0;
  Eigen::Index dimension_ = 0;
  std::vector<Machine> machines_;
};

inline std::unique_ptr<SvmClassifier> fit_svm(const Dataset& train, const SvmMulticlassOptions& options = {}) {
  return std::make_unique<SvmClassifier>(train, options);
}

}  // namespace cdsproxy
