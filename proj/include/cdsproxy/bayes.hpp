#pragma once

// Bayes-rule classifiers: linear and quadratic Gaussian discriminant analysis
// and kernel-density naive Bayes.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cdsproxy/core.hpp"
#include "cdsproxy/numerics.hpp"

namespace cdsproxy {

struct DiscriminantOptions {
  CovarianceMode mode = CovarianceMode::Full;
  bool uniform_priors = false;
};

namespace detail {

inline Vector fit_priors(const Dataset& train, bool uniform) {
  return uniform ? uniform_priors(train.class_count()) : empirical_priors(train.y, train.class_count());
}

inline void require_class_sizes(const Dataset& train, std::size_t minimum) {
  validate_dataset(train);
  const auto counts = train.class_counts();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < minimum) {
      fail(ErrorCode::ClassTooSmall, "class '" + train.class_names[j] + "' has " +
                                         std::to_string(counts[j]) + " samples, need " +
                                         std::to_string(minimum));
    }
  }
}

inline Cholesky factor_covariance(const Matrix& cov) {
  try {
    return Cholesky(regularize(cov));
  } catch (const Error&) {
    fail(ErrorCode::SingularCovariance, "covariance not positive definite after ridge");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LDA

class LinearDiscriminant final : public Classifier {
 public:
  /// `means` holds one class mean per row. The covariance is regularized
  /// before factorization.
  LinearDiscriminant(Matrix means, const Matrix& covariance, Vector priors)
      : means_(std::move(means)), chol_(detail::factor_covariance(covariance)), log_priors_(priors.array().log()) {
    const auto classes = means_.rows();
    weights_.resize(means_.cols(), classes);
    offsets_.resize(classes);
    for (Eigen::Index j = 0; j < classes; ++j) {
      const Vector mu = means_.row(j).transpose();
      weights_.col(j) = chol_.solve(mu);
      offsets_(j) = -0.5 * mu.dot(weights_.col(j)) + log_priors_(j);
    }
  }

  // d_j(x) = x' V^-1 mu_j - mu_j' V^-1 mu_j / 2 + log pi_j
  Vector scores(const VectorRef& x) const override {
    require_dimension(dimension(), x.size(), "lda_scores");
    return weights_.transpose() * x + offsets_;
  }
  Eigen::Index dimension() const override { return means_.cols(); }
  std::size_t class_count() const override { return static_cast<std::size_t>(means_.rows()); }
  std::string family() const override { return "LDA"; }

  const Matrix& means() const { return means_; }

 private:
  Matrix means_;
  Cholesky chol_;
  Vector log_priors_;
  Matrix weights_;  // column j = V^-1 mu_j
  Vector offsets_;
};

inline Matrix class_means(const Dataset& train) {
  Matrix means = Matrix::Zero(static_cast<Eigen::Index>(train.class_count()), train.dimension());
  const auto counts = train.class_counts();
  for (std::size_t i = 0; i < train.size(); ++i) {
    means.row(static_cast<Eigen::Index>(train.y[i])) += train.x.row(static_cast<Eigen::Index>(i));
  }
  for (std::size_t j = 0; j < counts.size(); ++j) {
    means.row(static_cast<Eigen::Index>(j)) /= static_cast<double>(counts[j]);
  }
  return means;
}

/// Class means with one covariance estimated from all training vectors.
inline std::unique_ptr<LinearDiscriminant> fit_lda(const Dataset& train, DiscriminantOptions options = {}) {
  detail::require_class_sizes(train, 2);
  const auto cov = sample_mean_covariance(train.x, options.mode);
  return std::make_unique<LinearDiscriminant>(class_means(train), cov.matrix,
                                              detail::fit_priors(train, options.uniform_priors));
}

inline Vector lda_scores(const LinearDiscriminant& model, const VectorRef& x) { return model.scores(x); }

// ---------------------------------------------------------------------------
// QDA

class QuadraticDiscriminant final : public Classifier {
 public:
  QuadraticDiscriminant(Matrix means, const std::vector<Matrix>& covariances, Vector priors)
      : means_(std::move(means)), log_priors_(priors.array().log()) {
    if (covariances.size() != static_cast<std::size_t>(means_.rows())) {
      fail(ErrorCode::DimensionMismatch, "one covariance per class required");
    }
    chols_.reserve(covariances.size());
    half_log_dets_.resize(means_.rows());
    for (std::size_t j = 0; j < covariances.size(); ++j) {
      chols_.push_back(detail::factor_covariance(covariances[j]));
      half_log_dets_(static_cast<Eigen::Index>(j)) = 0.5 * chols_.back().log_determinant();
    }
  }

  // d_j(x) = -log|V_j| / 2 - (x - mu_j)' V_j^-1 (x - mu_j) / 2 + log pi_j
  Vector scores(const VectorRef& x) const override {
    require_dimension(dimension(), x.size(), "qda_scores");
    Vector out(means_.rows());
    for (Eigen::Index j = 0; j < means_.rows(); ++j) {
      const Vector diff = x - means_.row(j).transpose();
      out(j) = -half_log_dets_(j) - 0.5 * chols_[static_cast<std::size_t>(j)].inverse_quadratic(diff) +
               log_priors_(j);
    }
    return out;
  }
  Eigen::Index dimension() const override { return means_.cols(); }
  std::size_t class_count() const override { return static_cast<std::size_t>(means_.rows()); }
  std::string family() const override { return "QDA"; }

 private:
  Matrix means_;
  Vector log_priors_;
  std::vector<Cholesky> chols_;
  Vector half_log_dets_;
};

/// Per-class sample mean and covariance. Full mode with fewer than d + 1
/// samples in a class relies on the ridge to stay definite.
inline std::unique_ptr<QuadraticDiscriminant> fit_qda(const Dataset& train, DiscriminantOptions options = {}) {
  detail::require_class_sizes(train, 2);
  std::vector<Matrix> covariances;
  for (std::size_t j = 0; j < train.class_count(); ++j) {
    covariances.push_back(sample_mean_covariance(train.class_samples(j), options.mode).matrix);
  }
  return std::make_unique<QuadraticDiscriminant>(class_means(train), covariances,
                                                 detail::fit_priors(train, options.uniform_priors));
}

// ---------------------------------------------------------------------------
// Kernel density estimation

enum class KdeKernel { Normal, Triangular, Epanechnikov };

// Per-feature log-density floor; keeps compact kernels from producing -inf.
inline constexpr double kLogDensityFloor = -745.0;

// Unit-integral kernels; the compact ones are supported on [-1, 1].
inline double kernel_value(KdeKernel kernel, double u) {
  switch (kernel) {
    case KdeKernel::Normal:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case KdeKernel::Triangular:
      return std::abs(u) < 1.0 ? 1.0 - std::abs(u) : 0.0;
    case KdeKernel::Epanechnikov:
      return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

/// log( (1/(n b)) sum_i K((x - x_i) / b) ), floored at kLogDensityFloor.
inline double kde_log_density(std::span<const double> samples, KdeKernel kernel, double bandwidth, double x) {
  if (samples.empty()) fail(ErrorCode::EmptySample, "kernel density needs at least one sample");
  if (!(bandwidth > 0.0)) fail(ErrorCode::NonpositiveBandwidth, "bandwidth must be positive");
  const double log_norm = std::log(static_cast<double>(samples.size()) * bandwidth);
  double log_density;
  if (kernel == KdeKernel::Normal) {
    // log-sum-exp so far-away points still rank by distance
    double max_exponent = -std::numeric_limits<double>::infinity();
    for (double xi : samples) {
      const double u = (x - xi) / bandwidth;
      max_exponent = std::max(max_exponent, -0.5 * u * u);
    }
    double sum = 0.0;
    for (double xi : samples) {
      const double u = (x - xi) / bandwidth;
      sum += std::exp(-0.5 * u * u - max_exponent);
    }
    log_density = max_exponent + std::log(sum) - 0.5 * std::log(2.0 * std::numbers::pi) - log_norm;
  } else {
    double sum = 0.0;
    for (double xi : samples) sum += kernel_value(kernel, (x - xi) / bandwidth);
    log_density = sum > 0.0 ? std::log(sum) - log_norm : kLogDensityFloor;
  }
  return std::max(log_density, kLogDensityFloor);
}

// ---------------------------------------------------------------------------
// Naive Bayes

// Per-feature class-conditional density: a kernel estimate, or the normal
// parametric fit (which coincides with diagonal QDA).
enum class NbDensity { Kernel, Gaussian };

struct NbOptions {
  NbDensity density = NbDensity::Kernel;
  KdeKernel kernel = KdeKernel::Normal;
  double bandwidth = 0.2;
  bool uniform_priors = false;
};

class NaiveBayes final : public Classifier {
 public:
  NaiveBayes(const Dataset& train, NbOptions options) : options_(options) {
    validate_dataset(train);
    if (!(options.bandwidth > 0.0)) fail(ErrorCode::NonpositiveBandwidth, "bandwidth must be positive");
    const auto counts = train.class_counts();
    const std::size_t minimum = options.density == NbDensity::Gaussian ? 2 : 1;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] < minimum) {
        fail(ErrorCode::ClassTooSmall, "class '" + train.class_names[j] + "' has too few samples");
      }
    }
    dimension_ = train.dimension();
    log_priors_ = detail::fit_priors(train, options.uniform_priors).array().log();
    const auto d = static_cast<std::size_t>(dimension_);
    columns_.assign(train.class_count(), std::vector<std::vector<double>>(d));
    for (std::size_t i = 0; i < train.size(); ++i) {
      for (std::size_t v = 0; v < d; ++v) {
        columns_[train.y[i]][v].push_back(train.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)));
      }
    }
    if (options.density == NbDensity::Gaussian) {
      // Same estimates and ridge as diagonal QDA.
      for (std::size_t j = 0; j < train.class_count(); ++j) {
        const auto cov = sample_mean_covariance(train.class_samples(j), CovarianceMode::Diagonal);
        gauss_means_.push_back(cov.mean);
        gauss_vars_.push_back(regularize(cov.matrix).diagonal());
      }
    }
  }

  double feature_log_density(std::size_t label, std::size_t feature, double value) const {
    if (options_.density == NbDensity::Kernel) {
      return kde_log_density(columns_[label][feature], options_.kernel, options_.bandwidth, value);
    }
    const auto v = static_cast<Eigen::Index>(feature);
    const double var = gauss_vars_[label](v);
    const double diff = value - gauss_means_[label](v);
    const double log_pdf = -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * diff * diff / var;
    return std::max(log_pdf, kLogDensityFloor);
  }

  // d_j(x) = log pi_j + sum_v log f_{j,v}(x_v)
  Vector scores(const VectorRef& x) const override {
    require_dimension(dimension_, x.size(), "nb_scores");
    Vector out(static_cast<Eigen::Index>(columns_.size()));
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      double s = log_priors_(static_cast<Eigen::Index>(j));
      for (Eigen::Index v = 0; v < dimension_; ++v) s += feature_log_density(j, static_cast<std::size_t>(v), x(v));
      out(static_cast<Eigen::Index>(j)) = s;
    }
    return out;
  }
  Eigen::Index dimension() const override { return dimension_; }
  std::size_t class_count() const override { return columns_.size(); }
  std::string family() const override { return "NB"; }
  const NbOptions& options() const { return options_; }

 private:
  NbOptions options_;
  Eigen::Index dimension_ = 0;
  Vector log_priors_;
  std::vector<std::vector<std::vector<double>>> columns_;  // [class][feature] -> samples
  std::vector<Vector> gauss_means_;
  std::vector<Vector> gauss_vars_;
};

inline std::unique_ptr<NaiveBayes> fit_nb(const Dataset& train, NbOptions options = {}) {
  return std::make_unique<NaiveBayes>(train, options);
}

}  // namespace cdsproxy
