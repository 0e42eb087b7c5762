#pragma once

// Brute-force reference implementations. Nothing here calls into the library
// beyond plain data types, so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include "cdsproxy/random.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

inline Mat random_matrix(cdsproxy::Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
  Mat m(n, Vec(d));
  for (auto& row : m)
    for (auto& v : row) v = scale * rng.normal();
  return m;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// ---------------------------------------------------------------------------
// Dense linear algebra by Gaussian elimination with partial pivoting

inline Vec gauss_solve(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

inline double log_abs_det(Mat a) {
  const std::size_t n = a.size();
  double out = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    out += std::log(std::abs(a[c][c]));
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return out;
}

inline Vec mean_of(const Mat& rows) {
  Vec m(rows.front().size(), 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += r[j];
  for (auto& v : m) v /= static_cast<double>(rows.size());
  return m;
}

// Two-pass unbiased covariance, element by element.
inline Mat covariance_of(const Mat& rows) {
  const auto m = mean_of(rows);
  const std::size_t d = m.size();
  Mat c(d, Vec(d, 0.0));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      double s = 0.0;
      for (const auto& r : rows) s += (r[a] - m[a]) * (r[b] - m[b]);
      c[a][b] = s / static_cast<double>(rows.size() - 1);
    }
  return c;
}

inline Mat diagonal_only(Mat c) {
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = 0; b < c.size(); ++b)
      if (a != b) c[a][b] = 0.0;
  return c;
}

// Same ridge as the library's declared regularization: 1e-8 * trace / d.
inline Mat ridged(Mat c) {
  double tr = 0.0;
  for (std::size_t a = 0; a < c.size(); ++a) tr += c[a][a];
  double eps = 1e-8 * tr / static_cast<double>(c.size());
  if (!(eps > 0.0)) eps = 1e-8;
  for (std::size_t a = 0; a < c.size(); ++a) c[a][a] += eps;
  return c;
}

inline double quad_inverse(const Mat& v, const Vec& x) { return dot(x, gauss_solve(v, x)); }

// ---------------------------------------------------------------------------
// Gaussian discriminants

struct Labeled {
  Mat x;
  std::vector<std::size_t> y;
  std::size_t classes = 0;

  Mat rows_of(std::size_t j) const {
    Mat out;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == j) out.push_back(x[i]);
    return out;
  }
  double prior(std::size_t j) const {
    return static_cast<double>(std::count(y.begin(), y.end(), j)) / static_cast<double>(y.size());
  }
};

// x' V^-1 mu - mu' V^-1 mu / 2 + log pi with the pooled-sample covariance.
inline Vec lda_scores(const Labeled& data, bool diagonal, const Vec& x) {
  Mat v = covariance_of(data.x);
  if (diagonal) v = diagonal_only(v);
  v = ridged(v);
  Vec out;
  for (std::size_t j = 0; j < data.classes; ++j) {
    const auto mu = mean_of(data.rows_of(j));
    const auto w = gauss_solve(v, mu);
    out.push_back(dot(x, w) - 0.5 * dot(mu, w) + std::log(data.prior(j)));
  }
  return out;
}

inline Vec qda_scores(const Labeled& data, bool diagonal, const Vec& x) {
  Vec out;
  for (std::size_t j = 0; j < data.classes; ++j) {
    const auto rows = data.rows_of(j);
    Mat v = covariance_of(rows);
    if (diagonal) v = diagonal_only(v);
    v = ridged(v);
    const auto diff = sub(x, mean_of(rows));
    out.push_back(-0.5 * log_abs_det(v) - 0.5 * quad_inverse(v, diff) + std::log(data.prior(j)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel densities

enum class Kernel { Normal, Triangular, Epanechnikov };

inline double kernel(Kernel k, double u) {
  switch (k) {
    case Kernel::Normal: return std::exp(-u * u / 2.0) / std::sqrt(2.0 * std::numbers::pi);
    case Kernel::Triangular: return std::max(0.0, 1.0 - std::abs(u));
    case Kernel::Epanechnikov: return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

// Direct summation, then log with the -745 floor.
inline double kde_log_density(const Vec& samples, Kernel k, double b, double x) {
  double s = 0.0;
  for (double xi : samples) s += kernel(k, (x - xi) / b);
  s /= static_cast<double>(samples.size()) * b;
  return s > 0.0 ? std::max(std::log(s), -745.0) : -745.0;
}

inline Vec nb_scores(const Labeled& data, Kernel k, double b, const Vec& x) {
  Vec out;
  for (std::size_t j = 0; j < data.classes; ++j) {
    const auto rows = data.rows_of(j);
    double s = std::log(data.prior(j));
    for (std::size_t v = 0; v < x.size(); ++v) {
      Vec column;
      for (const auto& r : rows) column.push_back(r[v]);
      s += kde_log_density(column, k, b, x[v]);
    }
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trees

inline double gini(const Vec& p) {
  double s = 1.0;
  for (double v : p) s -= v * v;
  return s;
}

inline double entropy(const Vec& p) {
  double s = 0.0;
  for (double v : p)
    if (v > 0.0) s -= v * std::log(v);
  return s;
}

inline Vec proportions(const std::vector<std::size_t>& labels, std::size_t classes) {
  Vec p(classes, 0.0);
  for (auto l : labels) p[l] += 1.0;
  for (auto& v : p) v /= static_cast<double>(labels.size());
  return p;
}

enum class Criterion { Gini, Entropy, Twoing };

inline double split_score(Criterion c, const std::vector<std::size_t>& left, const std::vector<std::size_t>& right,
                          std::size_t classes) {
  const double n = static_cast<double>(left.size() + right.size());
  const double pl = static_cast<double>(left.size()) / n, pr = static_cast<double>(right.size()) / n;
  const auto ql = proportions(left, classes), qr = proportions(right, classes);
  if (c == Criterion::Twoing) {
    double s = 0.0;
    for (std::size_t j = 0; j < classes; ++j) s += std::abs(ql[j] - qr[j]);
    return pl * pr * s * s;
  }
  std::vector<std::size_t> all = left;
  all.insert(all.end(), right.begin(), right.end());
  auto g = c == Criterion::Gini ? gini : entropy;
  return g(proportions(all, classes)) - pl * g(ql) - pr * g(qr);
}

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = -1.0;
  bool found = false;
};

// Every feature, every midpoint between consecutive distinct values.
inline Split best_split(const Mat& x, const std::vector<std::size_t>& y, std::size_t classes, Criterion c) {
  Split best;
  for (std::size_t f = 0; f < x.front().size(); ++f) {
    Vec values;
    for (const auto& r : x) values.push_back(r[f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double t = values[i] + (values[i + 1] - values[i]) / 2.0;
      std::vector<std::size_t> left, right;
      for (std::size_t r = 0; r < x.size(); ++r) (x[r][f] < t ? left : right).push_back(y[r]);
      const double s = split_score(c, left, right, classes);
      if (!best.found || s > best.score + 1e-12) best = {f, t, s, true};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Distances and nearest neighbours

inline double euclidean(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double cityblock(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double mahalanobis(const Vec& a, const Vec& b, const Mat& v) { return std::sqrt(quad_inverse(v, sub(a, b))); }

// Full sort by (distance, index), majority vote, ties to the smallest class.
template <typename Distance>
std::size_t knn_classify(const Labeled& data, std::size_t k, const Vec& x, Distance dist) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < data.x.size(); ++i) d.emplace_back(dist(x, data.x[i]), i);
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> votes(data.classes, 0);
  for (std::size_t i = 0; i < k; ++i) ++votes[data.y[d[i].second]];
  return static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

// ---------------------------------------------------------------------------
// Activations

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline Vec softmax(const Vec& z) {
  Vec e;
  double s = 0.0;
  for (double v : z) {
    e.push_back(std::exp(v));
    s += e.back();
  }
  for (auto& v : e) v /= s;
  return e;
}

// ---------------------------------------------------------------------------
// SVM dual by accelerated projected gradient:
//   min 1/2 a'Qa - e'a  s.t.  0 <= a <= C, y'a = 0

// Euclidean projection onto the box intersected with the hyperplane, by
// bisection on the multiplier of y'a = 0.
inline Vec project(const Vec& v, const std::vector<int>& y, double cost) {
  auto at = [&](double nu) {
    Vec a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::clamp(v[i] - nu * y[i], 0.0, cost);
    return a;
  };
  auto balance = [&](double nu) {
    const auto a = at(nu);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += y[i] * a[i];
    return s;
  };
  double lo = -1.0, hi = 1.0;
  while (balance(lo) < 0.0) lo *= 2.0;
  while (balance(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (balance(mid) > 0.0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

inline double dual_objective(const Mat& q, const Vec& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += 0.5 * a[i] * dot(q[i], a) - a[i];
  return s;
}

inline double svm_dual_reference(const Mat& gram, const std::vector<int>& y, double cost,
                                 std::size_t iterations = 200000) {
  const std::size_t n = y.size();
  Mat q(n, Vec(n));
  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      q[i][j] = y[i] * y[j] * gram[i][j];
      frob += q[i][j] * q[i][j];
    }
  // Lipschitz bound from power iteration, padded.
  Vec p(n, 1.0);
  double lambda = std::sqrt(frob);
  for (int it = 0; it < 500; ++it) {
    Vec next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = dot(q[i], p);
    const double norm = std::sqrt(dot(next, next));
    if (norm == 0.0) break;
    lambda = norm / std::sqrt(dot(p, p));
    for (auto& v : next) v /= norm;
    p = next;
  }
  const double step = 1.0 / (1.01 * lambda + 1e-12);
  Vec a(n, 0.0), z = a;
  double t = 1.0, best = dual_objective(q, a);
  for (std::size_t it = 0; it < iterations; ++it) {
    Vec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = dot(q[i], z) - 1.0;
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = z[i] - step * g[i];
    const auto next = project(v, y, cost);
    const double f = dual_objective(q, next);
    if (f > best) {
      // restart the momentum when the objective goes up
      z = a;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = next[i] + (t - 1.0) / t_next * (next[i] - a[i]);
      change = std::max(change, std::abs(next[i] - a[i]));
    }
    a = next;
    t = t_next;
    best = f;
    if (change < 1e-13 && it > 100) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Logistic regression by fixed-step gradient ascent on
//   sum_i [y log p + (1 - y) log(1 - p)] - lambda |slopes|^2

inline Vec logistic_ascent(const Mat& x, const std::vector<int>& y, double lambda, std::size_t iterations) {
  const std::size_t n = x.size(), d = x.front().size();
  // step from a bound on the Hessian: (n/4) * max row norm^2 with the intercept
  double r2 = 0.0;
  for (const auto& r : x) r2 = std::max(r2, 1.0 + dot(r, r));
  const double step = 1.0 / (0.25 * static_cast<double>(n) * r2 + 2.0 * lambda);
  Vec beta(d + 1, 0.0);
  for (std::size_t it = 0; it < iterations; ++it) {
    Vec g(d + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double z = beta[0];
      for (std::size_t j = 0; j < d; ++j) z += beta[j + 1] * x[i][j];
      const double r = y[i] - sigmoid(z);
      g[0] += r;
      for (std::size_t j = 0; j < d; ++j) g[j + 1] += r * x[i][j];
    }
    for (std::size_t j = 1; j <= d; ++j) g[j] -= 2.0 * lambda * beta[j];
    for (std::size_t j = 0; j <= d; ++j) beta[j] += step * g[j];
  }
  return beta;
}

// ---------------------------------------------------------------------------
// Least squares by normal equations

inline Vec normal_equations(const Mat& design, const Vec& response) {
  const std::size_t p = design.front().size();
  Mat xtx(p, Vec(p, 0.0));
  Vec xty(p, 0.0);
  for (std::size_t i = 0; i < design.size(); ++i)
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += design[i][a] * response[i];
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += design[i][a] * design[i][b];
    }
  return gauss_solve(xtx, xty);
}

}  // namespace oracle
