#pragma once

#include <string>
#include <vector>

#include "cdsproxy/cdsproxy.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace cdsproxy;

inline SampleMatrix to_matrix(const oracle::Mat& m) {
  SampleMatrix out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.front().size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
  return out;
}

inline Vector to_vector(const oracle::Vec& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline oracle::Vec to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Dataset to_dataset(const oracle::Labeled& l) {
  Dataset d;
  d.x = to_matrix(l.x);
  d.y = l.y;
  for (std::size_t j = 0; j < l.classes; ++j) d.class_names.push_back("C" + std::to_string(j));
  return d;
}

// `per_class` Gaussian points around class centres drawn with spread `separation`.
inline oracle::Labeled blobs(std::uint64_t seed, std::size_t classes, std::size_t per_class, std::size_t d,
                             double separation = 3.0, double noise = 1.0) {
  Rng rng(seed);
  oracle::Labeled out;
  out.classes = classes;
  for (std::size_t j = 0; j < classes; ++j) {
    oracle::Vec centre(d);
    for (auto& c : centre) c = separation * rng.normal();
    // class-specific anisotropy so QDA and LDA differ
    oracle::Vec scale(d);
    for (auto& s : scale) s = noise * (0.5 + rng.uniform());
    for (std::size_t i = 0; i < per_class; ++i) {
      oracle::Vec p(d);
      for (std::size_t v = 0; v < d; ++v) p[v] = centre[v] + scale[v] * rng.normal();
      out.x.push_back(p);
      out.y.push_back(j);
    }
  }
  return out;
}

inline oracle::Vec random_point(Rng& rng, std::size_t d, double scale = 3.0) {
  oracle::Vec p(d);
  for (auto& v : p) v = scale * rng.normal();
  return p;
}

inline std::vector<oracle::Vec> grid(double lo, double hi, std::size_t steps) {
  std::vector<oracle::Vec> out;
  for (std::size_t i = 0; i <= steps; ++i)
    for (std::size_t j = 0; j <= steps; ++j)
      out.push_back({lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps),
                     lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(steps)});
  return out;
}

inline double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max({1e-300, a.norm(), b.norm()});
}

inline std::vector<int> signs_for(const std::vector<std::size_t>& y, std::size_t positive) {
  std::vector<int> out;
  for (auto v : y) out.push_back(v == positive ? 1 : -1);
  return out;
}

inline oracle::Mat to_mat(const Matrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

}  // namespace fixtures
