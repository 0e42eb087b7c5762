#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdsproxy/error.hpp"
#include "cdsproxy/numerics.hpp"

namespace cdsproxy {

// ---------------------------------------------------------------------------
// Market panel

// Raw panel columns, in the order of the full 16-feature selection.
enum class Column : std::size_t {
  Rate,  // 5-year CDS rate, basis points
  Pd6m, Pd1y, Pd2y, Pd3y, Pd4y, Pd5y,
  Iv3m, Iv6m, Iv12m, Iv18m,
  Hv1m, Hv2m, Hv3m, Hv4m, Hv6m,
};

inline constexpr std::size_t kColumnCount = 16;

inline constexpr std::array<std::string_view, kColumnCount> kColumnNames = {
    "s",     "pd_6m", "pd_1y", "pd_2y",  "pd_3y",  "pd_4y", "pd_5y", "iv_3m",
    "iv_6m", "iv_12m", "iv_18m", "hv_1m", "hv_2m", "hv_3m", "hv_4m", "hv_6m"};

inline constexpr std::size_t index_of(Column c) { return static_cast<std::size_t>(c); }
inline constexpr std::string_view column_name(Column c) { return kColumnNames[index_of(c)]; }

inline constexpr bool is_probability(Column c) {
  return index_of(c) >= index_of(Column::Pd6m) && index_of(c) <= index_of(Column::Pd5y);
}

// Categorical descriptors used by the incumbent proxy methods.
struct Categories {
  std::string region;
  std::string sector;
  std::string rating;
  std::string seniority;

  auto operator<=>(const Categories&) const = default;
};

struct PanelRow {
  std::string counterparty;
  std::string date;  // ISO-8601
  std::array<double, kColumnCount> values{};
  bool rate_observed = true;

  double value(Column c) const { return values[index_of(c)]; }
};

inline bool operator==(const PanelRow& a, const PanelRow& b) {
  if (a.counterparty != b.counterparty || a.date != b.date || a.rate_observed != b.rate_observed)
    return false;
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    if (c == index_of(Column::Rate) && !a.rate_observed) continue;
    if (a.values[c] != b.values[c]) return false;
  }
  return true;
}

struct MarketPanel {
  std::vector<PanelRow> rows;
  std::map<std::string, Categories> categories;  // optional, keyed by counterparty

  // Sorted lexicographically; this is the class order of every dataset.
  std::vector<std::string> counterparties() const {
    std::vector<std::string> names;
    for (const auto& r : rows) names.push_back(r.counterparty);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
  }

  bool has_missing_rates() const {
    return std::any_of(rows.begin(), rows.end(), [](const PanelRow& r) { return !r.rate_observed; });
  }

  bool operator==(const MarketPanel&) const = default;
};

inline Error range_error(std::size_t row, Column c, const std::string& what) {
  Error e(ErrorCode::RangeViolation,
          "row " + std::to_string(row) + ", column " + std::string(column_name(c)) + ": " + what);
  e.row = row;
  e.column = std::string(column_name(c));
  return e;
}

/// Checks PDs in [0,1], vols >= 0, s >= 0 where observed, everything finite.
inline void validate_panel(const MarketPanel& panel) {
  for (std::size_t i = 0; i < panel.rows.size(); ++i) {
    const auto& row = panel.rows[i];
    for (std::size_t c = 0; c < kColumnCount; ++c) {
      const auto col = static_cast<Column>(c);
      if (col == Column::Rate && !row.rate_observed) continue;
      const double v = row.values[c];
      if (!std::isfinite(v)) throw range_error(i, col, "value is not finite");
      if (is_probability(col) && (v < 0.0 || v > 1.0)) {
        throw range_error(i, col, "probability " + std::to_string(v) + " outside [0,1]");
      }
      if (!is_probability(col) && v < 0.0) {
        throw range_error(i, col, "negative value " + std::to_string(v));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Feature selections

enum class FeatureSet { FS1, FS2, FS3, FS4, FS5, FS6 };

inline constexpr std::array<FeatureSet, 6> kAllFeatureSets = {
    FeatureSet::FS1, FeatureSet::FS2, FeatureSet::FS3,
    FeatureSet::FS4, FeatureSet::FS5, FeatureSet::FS6};

inline std::span<const Column> feature_columns(FeatureSet fs) {
  using C = Column;
  static constexpr std::array<C, 16> fs1 = {C::Rate, C::Pd6m, C::Pd1y, C::Pd2y, C::Pd3y, C::Pd4y,
                                            C::Pd5y, C::Iv3m, C::Iv6m, C::Iv12m, C::Iv18m, C::Hv1m,
                                            C::Hv2m, C::Hv3m, C::Hv4m, C::Hv6m};
  static constexpr std::array<C, 4> fs2 = {C::Rate, C::Pd5y, C::Iv6m, C::Hv4m};
  static constexpr std::array<C, 2> fs3 = {C::Rate, C::Pd5y};
  static constexpr std::array<C, 15> fs4 = {C::Pd6m, C::Pd1y, C::Pd2y, C::Pd3y, C::Pd4y,
                                            C::Pd5y, C::Iv3m, C::Iv6m, C::Iv12m, C::Iv18m,
                                            C::Hv1m, C::Hv2m, C::Hv3m, C::Hv4m, C::Hv6m};
  static constexpr std::array<C, 3> fs5 = {C::Pd5y, C::Iv6m, C::Hv4m};
  static constexpr std::array<C, 2> fs6 = {C::Pd1y, C::Pd5y};
  switch (fs) {
    case FeatureSet::FS1: return fs1;
    case FeatureSet::FS2: return fs2;
    case FeatureSet::FS3: return fs3;
    case FeatureSet::FS4: return fs4;
    case FeatureSet::FS5: return fs5;
    case FeatureSet::FS6: return fs6;
  }
  return {};
}

inline std::string to_string(FeatureSet fs) {
  return "FS" + std::to_string(static_cast<int>(fs) + 1);
}

inline FeatureSet parse_feature_set(std::string_view text) {
  for (auto fs : kAllFeatureSets) {
    if (text == to_string(fs)) return fs;
  }
  fail(ErrorCode::BadArgument, "unknown feature selection '" + std::string(text) + "'");
}

inline bool requires_rate(FeatureSet fs) {
  return fs == FeatureSet::FS1 || fs == FeatureSet::FS2 || fs == FeatureSet::FS3;
}

// ---------------------------------------------------------------------------
// Dataset

struct Dataset {
  SampleMatrix x;                    // one sample per row
  std::vector<std::size_t> y;        // class index in [0, N)
  std::vector<std::string> class_names;
  std::optional<FeatureSet> features;

  std::size_t size() const { return y.size(); }
  Eigen::Index dimension() const { return x.cols(); }
  std::size_t class_count() const { return class_names.size(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(class_count(), 0);
    for (auto label : y) ++counts[label];
    return counts;
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.class_names = class_names;
    out.features = features;
    out.x.resize(static_cast<Eigen::Index>(indices.size()), x.cols());
    out.y.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(indices[i]));
      out.y.push_back(y[indices[i]]);
    }
    return out;
  }

  // Rows of one class.
  SampleMatrix class_samples(std::size_t label) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == label) idx.push_back(i);
    SampleMatrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
      out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
    return out;
  }

  // Same labels, different feature matrix.
  Dataset with_features(SampleMatrix transformed) const {
    Dataset out;
    out.x = std::move(transformed);
    out.y = y;
    out.class_names = class_names;
    return out;
  }
};

inline void validate_dataset(const Dataset& data) {
  if (static_cast<std::size_t>(data.x.rows()) != data.y.size()) {
    fail(ErrorCode::DimensionMismatch, "feature rows and labels differ in count");
  }
  if (data.class_count() < 2) fail(ErrorCode::BadArgument, "a dataset needs at least 2 classes");
  for (auto label : data.y) {
    if (label >= data.class_count()) fail(ErrorCode::BadArgument, "class index out of range");
  }
}

/// One sample per panel row, label = position of the counterparty in the
/// sorted name list, columns in feature-selection order.
inline Dataset build_dataset(const MarketPanel& panel, FeatureSet fs) {
  const auto cols = feature_columns(fs);
  Dataset data;
  data.features = fs;
  data.class_names = panel.counterparties();
  data.x.resize(static_cast<Eigen::Index>(panel.rows.size()), static_cast<Eigen::Index>(cols.size()));
  data.y.reserve(panel.rows.size());
  for (std::size_t i = 0; i < panel.rows.size(); ++i) {
    const auto& row = panel.rows[i];
    if (requires_rate(fs) && !row.rate_observed) {
      Error e(ErrorCode::MissingFiveYearRate,
              to_string(fs) + " needs the 5-year rate, missing for " + row.counterparty + " on " +
                  row.date);
      e.row = i;
      e.column = "s";
      throw e;
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double v = row.value(cols[c]);
      if (std::isnan(v)) {
        Error e(ErrorCode::MissingColumn, std::string(column_name(cols[c])) + " missing");
        e.row = i;
        e.column = std::string(column_name(cols[c]));
        throw e;
      }
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
    }
    const auto it = std::lower_bound(data.class_names.begin(), data.class_names.end(), row.counterparty);
    data.y.push_back(static_cast<std::size_t>(it - data.class_names.begin()));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Priors

inline Vector empirical_priors(const std::vector<std::size_t>& labels, std::size_t classes) {
  Vector pi = Vector::Zero(static_cast<Eigen::Index>(classes));
  for (auto label : labels) pi(static_cast<Eigen::Index>(label)) += 1.0;
  return pi / static_cast<double>(labels.size());
}

inline Vector uniform_priors(std::size_t classes) {
  return Vector::Constant(static_cast<Eigen::Index>(classes), 1.0 / static_cast<double>(classes));
}

// ---------------------------------------------------------------------------
// Classifier contract

/// Lowest index among the maximal entries.
inline std::size_t argmax_lowest(const VectorRef& scores) {
  std::size_t best = 0;
  for (Eigen::Index j = 1; j < scores.size(); ++j) {
    if (scores(j) > scores(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(j);
  }
  return best;
}

// A fitted model. Scores are per class; the decision is the MAP rule with
// ties going to the lowest class index.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual Vector scores(const VectorRef& x) const = 0;
  virtual Eigen::Index dimension() const = 0;
  virtual std::size_t class_count() const = 0;
  virtual std::string family() const = 0;

  virtual std::size_t classify(const VectorRef& x) const {
    require_dimension(dimension(), x.size(), "classify");
    return argmax_lowest(scores(x));
  }
};

using ClassifierPtr = std::unique_ptr<Classifier>;

inline std::size_t classify(const Classifier& model, const VectorRef& x) { return model.classify(x); }

inline std::vector<std::size_t> predict(const Classifier& model, const SampleMatrix& samples) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) out.push_back(model.classify(samples.row(i).transpose()));
  return out;
}

// Applies a fitted feature map (standardizer, PCA projection) before the inner model.
class PreprocessedClassifier final : public Classifier {
 public:
  using Transform = std::function<Vector(const VectorRef&)>;

  PreprocessedClassifier(Eigen::Index input_dimension, Transform transform, ClassifierPtr inner)
      : input_dimension_(input_dimension), transform_(std::move(transform)), inner_(std::move(inner)) {}

  Vector scores(const VectorRef& x) const override {
    require_dimension(input_dimension_, x.size(), "PreprocessedClassifier");
    return inner_->scores(transform_(x));
  }
  std::size_t classify(const VectorRef& x) const override {
    require_dimension(input_dimension_, x.size(), "PreprocessedClassifier");
    return inner_->classify(transform_(x));
  }
  Eigen::Index dimension() const override { return input_dimension_; }
  std::size_t class_count() const override { return inner_->class_count(); }
  std::string family() const override { return inner_->family(); }
  const Classifier& inner() const { return *inner_; }

 private:
  Eigen::Index input_dimension_;
  Transform transform_;
  ClassifierPtr inner_;
};

/// Fits a standardizer on the training set only, then the inner model on the
/// standardized features.
template <typename Fit>
ClassifierPtr fit_standardized(const Dataset& train, Fit&& fit) {
  auto scaler = standardizer_fit(train.x);
  ClassifierPtr inner = fit(train.with_features(scaler.apply_rows(train.x)));
  return std::make_unique<PreprocessedClassifier>(
      train.dimension(), [scaler](const VectorRef& x) { return scaler.apply(x); }, std::move(inner));
}

// ---------------------------------------------------------------------------
// Two-stage 5-year-rate imputation

// Regression of log(s) on one of the rate-free feature selections.
struct RateImputationModel {
  FeatureSet basis = FeatureSet::FS6;
  Standardizer scaler;
  double intercept = 0.0;
  Vector slopes;

  Vector features(const PanelRow& row) const {
    const auto cols = feature_columns(basis);
    Vector x(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) x(static_cast<Eigen::Index>(c)) = row.value(cols[c]);
    return x;
  }

  double predict_log_rate(const PanelRow& row) const {
    return intercept + slopes.dot(scaler.apply(features(row)));
  }

  double predict_rate(const PanelRow& row) const { return std::exp(predict_log_rate(row)); }
};

/// Least squares of log(s) on the standardized basis features over rows with
/// an observed rate. A ridge of 1e-8 * (n - 1) on the slopes keeps the
/// normal equations definite for collinear bases; the intercept is free.
inline RateImputationModel fit_rate_imputation(const MarketPanel& panel, FeatureSet basis) {
  if (requires_rate(basis)) {
    fail(ErrorCode::BadArgument, "imputation basis must be FS4, FS5 or FS6, got " + to_string(basis));
  }
  const auto cols = feature_columns(basis);
  const auto d = static_cast<Eigen::Index>(cols.size());
  std::vector<std::size_t> observed;
  for (std::size_t i = 0; i < panel.rows.size(); ++i) {
    if (panel.rows[i].rate_observed) observed.push_back(i);
  }
  if (observed.size() < static_cast<std::size_t>(d) + 2) {
    fail(ErrorCode::InsufficientObservedRates,
         std::to_string(observed.size()) + " observed rates, need " + std::to_string(d + 2));
  }

  RateImputationModel model;
  model.basis = basis;
  const auto n = static_cast<Eigen::Index>(observed.size());
  SampleMatrix x(n, d);
  Vector logs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = panel.rows[observed[static_cast<std::size_t>(i)]];
    if (!(row.value(Column::Rate) > 0.0)) {
      fail(ErrorCode::BadArgument, "non-positive 5-year rate cannot be log-regressed (" +
                                       row.counterparty + ", " + row.date + ")");
    }
    for (Eigen::Index c = 0; c < d; ++c) x(i, c) = row.value(cols[static_cast<std::size_t>(c)]);
    logs(i) = std::log(row.value(Column::Rate));
  }
  model.scaler = standardizer_fit(x);
  const SampleMatrix z = model.scaler.apply_rows(x);
  model.intercept = logs.mean();
  Matrix gram = z.transpose() * z;
  gram.diagonal().array() += kRidgeFactor * static_cast<double>(n - 1);
  const Vector rhs = z.transpose() * (logs.array() - model.intercept).matrix();
  try {
    model.slopes = solve_spd(gram, rhs);
  } catch (const Error&) {
    fail(ErrorCode::SingularDesign, "imputation normal equations are singular");
  }
  return model;
}

/// Fills every missing 5-year rate with exp(predicted log rate); observed
/// rates are left untouched. A panel without gaps is returned as is.
inline MarketPanel impute_five_year_rate(const MarketPanel& panel, FeatureSet basis) {
  if (!panel.has_missing_rates()) return panel;
  const auto model = fit_rate_imputation(panel, basis);
  MarketPanel out = panel;
  for (auto& row : out.rows) {
    if (row.rate_observed) continue;
    row.values[index_of(Column::Rate)] = model.predict_rate(row);
    row.rate_observed = true;
  }
  return out;
}

}  // namespace cdsproxy
