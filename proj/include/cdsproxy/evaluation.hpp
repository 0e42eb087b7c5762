#pragma once

// Stratified K-fold cross validation, ranking tables, the PCA study and the
// feature-correlation histogram.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdsproxy/classifiers.hpp"
#include "cdsproxy/core.hpp"
#include "cdsproxy/numerics.hpp"
#include "cdsproxy/parallel.hpp"
#include "cdsproxy/random.hpp"

namespace cdsproxy {

inline constexpr std::size_t kDefaultFolds = 10;

// ---------------------------------------------------------------------------
// Fold plans

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // sample -> fold in [0, k)

  std::vector<std::size_t> holdout(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> training(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] != fold) out.push_back(i);
    return out;
  }
};

inline void check_fold_count(std::size_t k, std::size_t n) {
  if (k < 2 || k > n) {
    fail(ErrorCode::BadK, "fold count must lie in [2, " + std::to_string(n) + "], got " + std::to_string(k));
  }
}

/// Each class is shuffled with its own seeded stream, then dealt round-robin
/// to the folds, continuing where the previous class stopped.
inline FoldPlan stratified_folds(const std::vector<std::size_t>& labels, std::size_t classes, std::size_t k,
                                 std::uint64_t seed) {
  check_fold_count(k, labels.size());
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) fail(ErrorCode::BadArgument, "class index out of range");
    members[labels[i]].push_back(i);
  }
  FoldPlan plan{k, seed, std::vector<std::size_t>(labels.size(), 0)};
  std::size_t next = 0;
  for (std::size_t j = 0; j < classes; ++j) {
    if (members[j].empty()) fail(ErrorCode::EmptyClass, "class " + std::to_string(j) + " has no samples");
    auto rng = Rng::stream(seed, j);
    rng.shuffle(members[j]);
    for (auto i : members[j]) {
      plan.assignment[i] = next;
      next = (next + 1) % k;
    }
  }
  return plan;
}

inline FoldPlan stratified_folds(const Dataset& data, std::size_t k, std::uint64_t seed) {
  return stratified_folds(data.y, data.class_count(), k, seed);
}

// ---------------------------------------------------------------------------
// Cross validation

struct CvResult {
  std::string label;
  std::string features;
  std::vector<double> errors;  // holdout misclassification rate per fold
  double mean = 0.0;           // u_K
  double sd = 0.0;             // S_K, population form

  double accuracy() const { return 1.0 - mean; }
};

/// u_K = mean(e), S_K = sqrt(mean((e - u_K)^2)).
inline std::pair<double, double> error_statistics(const std::vector<double>& errors) {
  if (errors.empty()) fail(ErrorCode::EmptySample, "no fold errors");
  const double k = static_cast<double>(errors.size());
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= k;
  double residual = 0.0;
  for (double e : errors) residual += e - mean;
  mean += residual / k;
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  return {mean, std::sqrt(ss / k)};
}

// Fits a model on a training fold; the fold index lets fitters derive seeds.
using Fitter = std::function<ClassifierPtr(const Dataset& train, std::size_t fold)>;

inline CvResult cross_validate(const Fitter& fit, const Dataset& data, const FoldPlan& plan, std::string label = {}) {
  validate_dataset(data);
  if (plan.assignment.size() != data.size()) fail(ErrorCode::DimensionMismatch, "fold plan does not match dataset");
  CvResult result;
  result.label = std::move(label);
  if (data.features) result.features = to_string(*data.features);
  for (std::size_t fold = 0; fold < plan.k; ++fold) {
    const auto train_rows = plan.training(fold);
    const auto test_rows = plan.holdout(fold);
    const auto train = data.subset(train_rows);
    std::size_t wrong = 0;
    try {
      const auto model = fit(train, fold);
      for (auto i : test_rows) {
        if (model->classify(data.x.row(static_cast<Eigen::Index>(i)).transpose()) != data.y[i]) ++wrong;
      }
    } catch (const Error& e) {
      Error wrapped(ErrorCode::FitFailure, "fold " + std::to_string(fold + 1) + ": " + e.what());
      wrapped.fold = fold;
      throw wrapped;
    }
    result.errors.push_back(static_cast<double>(wrong) / static_cast<double>(test_rows.size()));
  }
  std::tie(result.mean, result.sd) = error_statistics(result.errors);
  return result;
}

inline CvResult cross_validate(const Fitter& fit, const Dataset& data, std::size_t k, std::uint64_t seed,
                               std::string label = {}) {
  check_fold_count(k, data.size());
  return cross_validate(fit, data, stratified_folds(data, k, seed), std::move(label));
}

/// Per-fold seed for stochastic fitters.
inline std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) { return Rng::stream(seed, fold).next(); }

inline Fitter make_fitter(const ClassifierSpec& spec, const Overrides& overrides, std::uint64_t seed) {
  return [spec, overrides, seed](const Dataset& train, std::size_t fold) {
    return fit_classifier(spec, train, overrides, fold_seed(seed, fold));
  };
}

inline CvResult cross_validate(const ClassifierSpec& spec, const Dataset& data, std::size_t k, std::uint64_t seed,
                               const Overrides& overrides = {}) {
  return cross_validate(make_fitter(spec, overrides, seed), data, k, seed, spec.label);
}

// ---------------------------------------------------------------------------
// Classifier x feature-selection grid

struct GridRequest {
  std::vector<std::string> labels;
  std::vector<FeatureSet> feature_sets;
  std::size_t folds = kDefaultFolds;
  std::uint64_t seed = 0;
  Overrides overrides;
  std::size_t jobs = 1;
};

/// One CvResult per (label, feature set), label-major. `datasets` maps each
/// requested feature set to its dataset.
inline std::vector<CvResult> run_grid(const GridRequest& request, const std::map<FeatureSet, Dataset>& datasets) {
  std::vector<const ClassifierSpec*> specs;
  for (const auto& l : request.labels) specs.push_back(&find_classifier(l));
  for (auto fs : request.feature_sets) {
    const auto it = datasets.find(fs);
    if (it == datasets.end()) fail(ErrorCode::MissingCell, "no dataset for " + to_string(fs));
    check_fold_count(request.folds, it->second.size());
  }
  const std::size_t cols = request.feature_sets.size();
  std::vector<CvResult> results(specs.size() * cols);
  parallel_for(results.size(), request.jobs, [&](std::size_t cell) {
    const auto& spec = *specs[cell / cols];
    const auto& data = datasets.at(request.feature_sets[cell % cols]);
    results[cell] = cross_validate(spec, data, request.folds, request.seed, request.overrides);
  });
  return results;
}

// ---------------------------------------------------------------------------
// Ranking

struct RankingRow {
  std::string label;
  std::vector<double> accuracies;  // per feature set, in table column order
  double mean = 0.0;
  double sd = 0.0;  // population form, as for the fold statistics
};

struct RankingTable {
  std::vector<std::string> feature_sets;
  std::vector<RankingRow> rows;  // best first

  std::optional<std::size_t> position(std::string_view label) const {
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].label == label) return i;
    return std::nullopt;
  }
};

/// Accuracy 1 - u_K per cell; rows by descending mean accuracy, ties by
/// lower sd, then label.
inline RankingTable rank_classifiers(const std::vector<CvResult>& results, const std::vector<std::string>& feature_sets) {
  RankingTable table{feature_sets, {}};
  std::vector<std::string> labels;
  for (const auto& r : results)
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
  for (const auto& label : labels) {
    RankingRow row{label, {}, 0.0, 0.0};
    for (const auto& fs : feature_sets) {
      const auto it = std::find_if(results.begin(), results.end(),
                                   [&](const CvResult& r) { return r.label == label && r.features == fs; });
      if (it == results.end()) fail(ErrorCode::MissingCell, "no result for " + label + " on " + fs);
      row.accuracies.push_back(it->accuracy());
    }
    std::tie(row.mean, row.sd) = error_statistics(row.accuracies);
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const RankingRow& a, const RankingRow& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    if (a.sd != b.sd) return a.sd < b.sd;
    return a.label < b.label;
  });
  return table;
}

// ---------------------------------------------------------------------------
// PCA study

struct PcaStudy {
  std::vector<double> accuracy_by_components;  // entry m-1 uses the first m PCs
  double raw_accuracy = 0.0;

  double difference(std::size_t m) const { return accuracy_by_components.at(m - 1) - raw_accuracy; }
};

/// Wraps a fitter so that each training fold gets its own PCA basis and the
/// model sees the first m component scores.
inline Fitter with_pca(Fitter inner, Eigen::Index m) {
  return [inner = std::move(inner), m](const Dataset& train, std::size_t fold) -> ClassifierPtr {
    const auto basis = pca_fit(train.x);
    check_component_count(basis, m);
    auto model = inner(train.with_features(pca_transform_rows(basis, train.x, m)), fold);
    return std::make_unique<PreprocessedClassifier>(
        train.dimension(), [basis, m](const VectorRef& x) { return pca_transform(basis, x, m); }, std::move(model));
  };
}

inline PcaStudy pca_study(const Fitter& fit, const Dataset& data, std::size_t k, std::uint64_t seed,
                          std::size_t jobs = 1) {
  if (data.dimension() < 2) fail(ErrorCode::BadArgument, "PCA study needs at least 2 features");
  const auto plan = stratified_folds(data, k, seed);
  const auto d = static_cast<std::size_t>(data.dimension());
  PcaStudy study;
  study.accuracy_by_components.resize(d);
  parallel_for(d + 1, jobs, [&](std::size_t i) {
    if (i == d) {
      study.raw_accuracy = cross_validate(fit, data, plan).accuracy();
    } else {
      study.accuracy_by_components[i] =
          cross_validate(with_pca(fit, static_cast<Eigen::Index>(i + 1)), data, plan).accuracy();
    }
  });
  return study;
}

// ---------------------------------------------------------------------------
// Correlation histogram

inline constexpr std::size_t kCorrelationBins = 20;

struct CorrelationHistogram {
  std::vector<double> correlations;  // defined pairs, (0,1), (0,2), ... order
  std::array<std::size_t, kCorrelationBins> counts{};  // bin b covers [-1 + b/10, -1 + (b+1)/10)
  std::size_t undefined = 0;  // pairs involving a constant column

  double fraction_above(double threshold) const {
    if (correlations.empty()) return 0.0;
    const auto n = std::count_if(correlations.begin(), correlations.end(), [&](double r) { return r > threshold; });
    return static_cast<double>(n) / static_cast<double>(correlations.size());
  }

  double median_absolute() const {
    if (correlations.empty()) return 0.0;
    std::vector<double> a;
    for (double r : correlations) a.push_back(std::abs(r));
    std::sort(a.begin(), a.end());
    const auto n = a.size();
    return n % 2 ? a[n / 2] : (a[n / 2 - 1] + a[n / 2]) / 2.0;
  }
};

inline std::size_t correlation_bin(double r) {
  const auto b = static_cast<long>(std::floor((r + 1.0) * 10.0 + 1e-9));
  return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(kCorrelationBins) - 1));
}

/// Pearson correlations of all column pairs.
inline CorrelationHistogram correlation_histogram(const SampleMatrix& x) {
  if (x.cols() < 2) fail(ErrorCode::BadArgument, "need at least 2 features");
  if (x.rows() < 3) fail(ErrorCode::TooFewSamples, "need at least 3 samples");
  const SampleMatrix c = x.rowwise() - x.colwise().mean();
  const Vector norms = c.colwise().norm().transpose();
  CorrelationHistogram h;
  for (Eigen::Index a = 0; a < x.cols(); ++a) {
    for (Eigen::Index b = a + 1; b < x.cols(); ++b) {
      if (norms(a) == 0.0 || norms(b) == 0.0) {
        ++h.undefined;
        continue;
      }
      const double r = std::clamp(c.col(a).dot(c.col(b)) / (norms(a) * norms(b)), -1.0, 1.0);
      h.correlations.push_back(r);
      ++h.counts[correlation_bin(r)];
    }
  }
  return h;
}

}  // namespace cdsproxy
