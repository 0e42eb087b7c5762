#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "cdsproxy/error.hpp"

namespace cdsproxy {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Samples are stored one per row, contiguous.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorRef = Eigen::Ref<const Vector>;

inline void require_dimension(Eigen::Index expected, Eigen::Index actual, const char* what) {
  if (expected != actual) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": expected dimension " +
                                           std::to_string(expected) + ", got " +
                                           std::to_string(actual));
  }
}

// ---------------------------------------------------------------------------
// Covariance

enum class CovarianceMode { Full, Diagonal };

struct CovarianceEstimate {
  Vector mean;
  Matrix matrix;
  CovarianceMode mode = CovarianceMode::Full;
  std::size_t count = 0;
};

/// Arithmetic mean and unbiased (n - 1) sample covariance of the rows of
/// `samples`. Diagonal mode keeps only the variances.
inline CovarianceEstimate sample_mean_covariance(const SampleMatrix& samples,
                                                 CovarianceMode mode = CovarianceMode::Full) {
  const auto n = samples.rows();
  if (n < 2) fail(ErrorCode::FewerThanTwoSamples, "covariance needs at least 2 samples");
  if (samples.cols() < 1) fail(ErrorCode::DimensionMismatch, "covariance needs dimension >= 1");

  CovarianceEstimate est;
  est.mode = mode;
  est.count = static_cast<std::size_t>(n);
  est.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - est.mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose()).eval();
  if (mode == CovarianceMode::Diagonal) {
    est.matrix = cov.diagonal().asDiagonal();
  } else {
    est.matrix = std::move(cov);
  }
  return est;
}

inline CovarianceEstimate sample_mean_covariance(const std::vector<Vector>& vectors,
                                                 CovarianceMode mode = CovarianceMode::Full) {
  if (vectors.size() < 2) fail(ErrorCode::FewerThanTwoSamples, "covariance needs at least 2 samples");
  const auto d = vectors.front().size();
  SampleMatrix samples(static_cast<Eigen::Index>(vectors.size()), d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    require_dimension(d, vectors[i].size(), "sample_mean_covariance");
    samples.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
  }
  return sample_mean_covariance(samples, mode);
}

inline constexpr double kRidgeFactor = 1e-8;

// Adds 1e-8 * trace / d to the diagonal.
inline Matrix regularize(const Matrix& matrix) {
  const double d = static_cast<double>(matrix.rows());
  double eps = kRidgeFactor * matrix.trace() / d;
  if (!(eps > 0.0)) eps = kRidgeFactor;
  Matrix out = matrix;
  out.diagonal().array() += eps;
  return out;
}

// ---------------------------------------------------------------------------
// Cholesky

class Cholesky {
 public:
  explicit Cholesky(const Matrix& spd) : lower_(Matrix::Zero(spd.rows(), spd.cols())) {
    const auto d = spd.rows();
    if (spd.cols() != d) fail(ErrorCode::DimensionMismatch, "Cholesky needs a square matrix");
    for (Eigen::Index j = 0; j < d; ++j) {
      double pivot = spd(j, j);
      for (Eigen::Index k = 0; k < j; ++k) pivot -= lower_(j, k) * lower_(j, k);
      if (!(pivot > 0.0)) {
        fail(ErrorCode::NotPositiveDefinite,
             "non-positive pivot at index " + std::to_string(j));
      }
      const double root = std::sqrt(pivot);
      lower_(j, j) = root;
      for (Eigen::Index i = j + 1; i < d; ++i) {
        double v = spd(i, j);
        for (Eigen::Index k = 0; k < j; ++k) v -= lower_(i, k) * lower_(j, k);
        lower_(i, j) = v / root;
      }
    }
  }

  const Matrix& lower() const { return lower_; }
  Eigen::Index dimension() const { return lower_.rows(); }

  // L y = b
  Vector forward(const VectorRef& b) const {
    const auto d = dimension();
    Vector y(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      double v = b(i);
      for (Eigen::Index k = 0; k < i; ++k) v -= lower_(i, k) * y(k);
      y(i) = v / lower_(i, i);
    }
    return y;
  }

  Vector solve(const VectorRef& b) const {
    require_dimension(dimension(), b.size(), "Cholesky::solve");
    Vector y = forward(b);
    const auto d = dimension();
    for (Eigen::Index i = d - 1; i >= 0; --i) {
      double v = y(i);
      for (Eigen::Index k = i + 1; k < d; ++k) v -= lower_(k, i) * y(k);
      y(i) = v / lower_(i, i);
    }
    return y;
  }

  // v^T A^{-1} v
  double inverse_quadratic(const VectorRef& v) const { return forward(v).squaredNorm(); }

  double log_determinant() const { return 2.0 * lower_.diagonal().array().log().sum(); }

 private:
  Matrix lower_;
};

/// Solves A x = b for symmetric positive definite A. No regularization is
/// applied here; callers that need a ridge use regularize() first.
inline Vector solve_spd(const Matrix& matrix, const VectorRef& rhs) {
  require_dimension(matrix.rows(), rhs.size(), "solve_spd");
  return Cholesky(matrix).solve(rhs);
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)

struct EigenDecomposition {
  Vector values;   // non-increasing
  Matrix vectors;  // column i pairs with values(i)
};

inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kJacobiTolerance = 1e-12;

inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

inline EigenDecomposition eigen_symmetric(const Matrix& matrix) {
  if (!is_symmetric(matrix)) fail(ErrorCode::NotSymmetric, "eigen_symmetric needs a symmetric matrix");
  const auto d = matrix.rows();
  Matrix a = 0.5 * (matrix + matrix.transpose());
  Matrix v = Matrix::Identity(d, d);
  const double norm = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < d; ++p)
      for (Eigen::Index q = p + 1; q < d; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  bool converged = false;
  for (int sweep = 0; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (off_norm() <= kJacobiTolerance * norm) {
      converged = true;
      break;
    }
    if (sweep == kJacobiMaxSweeps) break;
    for (Eigen::Index p = 0; p < d; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < d; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < d; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) fail(ErrorCode::NoConvergence, "Jacobi sweep cap reached");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  EigenDecomposition out{Vector(d), Matrix(d, d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PCA

struct PrincipalComponentBasis {
  Vector center;
  Matrix components;           // columns are PCs, descending eigenvalue
  Vector eigenvalues;          // clipped at 0
  Vector variance_explained;   // cumulative fractions

  Eigen::Index dimension() const { return center.size(); }
};

inline PrincipalComponentBasis pca_fit(const SampleMatrix& samples) {
  const auto cov = sample_mean_covariance(samples, CovarianceMode::Full);
  auto eig = eigen_symmetric(cov.matrix);
  const auto d = cov.matrix.rows();

  PrincipalComponentBasis basis;
  basis.center = cov.mean;
  basis.components = eig.vectors;
  basis.eigenvalues = eig.values.cwiseMax(0.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index arg = 0;
    basis.components.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis.components(arg, j) < 0.0) basis.components.col(j) *= -1.0;
  }
  basis.variance_explained.resize(d);
  const double total = basis.eigenvalues.sum();
  double running = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    running += basis.eigenvalues(j);
    basis.variance_explained(j) = total > 0.0 ? std::min(1.0, running / total) : 1.0;
  }
  return basis;
}

inline void check_component_count(const PrincipalComponentBasis& basis, Eigen::Index m) {
  if (m < 1 || m > basis.dimension()) {
    fail(ErrorCode::BadComponentCount, "component count " + std::to_string(m) +
                                           " outside [1, " + std::to_string(basis.dimension()) + "]");
  }
}

inline Vector pca_transform(const PrincipalComponentBasis& basis, const VectorRef& x, Eigen::Index m) {
  check_component_count(basis, m);
  require_dimension(basis.dimension(), x.size(), "pca_transform");
  return basis.components.leftCols(m).transpose() * (x - basis.center);
}

inline SampleMatrix pca_transform_rows(const PrincipalComponentBasis& basis, const SampleMatrix& samples,
                                  Eigen::Index m) {
  check_component_count(basis, m);
  require_dimension(basis.dimension(), samples.cols(), "pca_transform");
  return (samples.rowwise() - basis.center.transpose()) * basis.components.leftCols(m);
}

// ---------------------------------------------------------------------------
// Standardization

inline constexpr double kMinScale = 1e-12;

struct Standardizer {
  Vector means;
  Vector scales;

  Vector apply(const VectorRef& x) const {
    require_dimension(means.size(), x.size(), "Standardizer::apply");
    return ((x - means).array() / scales.array()).matrix();
  }

  SampleMatrix apply_rows(const SampleMatrix& samples) const {
    require_dimension(means.size(), samples.cols(), "Standardizer::apply");
    SampleMatrix out = samples.rowwise() - means.transpose();
    out.array().rowwise() /= scales.transpose().array();
    return out;
  }

  Vector invert(const VectorRef& z) const {
    require_dimension(means.size(), z.size(), "Standardizer::invert");
    return (z.array() * scales.array()).matrix() + means;
  }
};

inline Standardizer standardizer_fit(const SampleMatrix& samples) {
  if (samples.rows() < 2) fail(ErrorCode::FewerThanTwoSamples, "standardizer needs at least 2 samples");
  Standardizer s;
  s.means = samples.colwise().mean().transpose();
  const SampleMatrix centered = samples.rowwise() - s.means.transpose();
  s.scales = (centered.colwise().squaredNorm().transpose() / static_cast<double>(samples.rows() - 1))
                 .cwiseSqrt()
                 .cwiseMax(kMinScale);
  return s;
}

// ---------------------------------------------------------------------------
// Least squares

/// Ordinary least squares by column-pivoted Householder QR. Throws
/// RankDeficientDesign when the design does not have full column rank.
inline Vector least_squares(const Matrix& design, const VectorRef& response) {
  require_dimension(design.rows(), response.size(), "least_squares");
  if (design.rows() < design.cols()) {
    fail(ErrorCode::RankDeficientDesign, "fewer observations than coefficients");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    fail(ErrorCode::RankDeficientDesign,
         "design rank " + std::to_string(qr.rank()) + " < " + std::to_string(design.cols()));
  }
  return qr.solve(response);
}

}  // namespace cdsproxy
