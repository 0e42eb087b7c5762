#pragma once

// Incumbent proxy methods: bucket curve mapping and the cross-sectional
// log-linear regression on categorical dummies.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cdsproxy/core.hpp"

namespace cdsproxy {

enum class BucketStatistic { Mean, Median };

/// Mean or median of a bucket of spreads; an even count averages the middle pair.
inline double curve_mapping_proxy(std::span<const double> spreads, BucketStatistic statistic) {
  if (spreads.empty()) fail(ErrorCode::EmptyBucket, "curve mapping needs at least one spread");
  if (statistic == BucketStatistic::Mean) {
    double sum = 0.0;
    for (double s : spreads) sum += s;
    return sum / static_cast<double>(spreads.size());
  }
  std::vector<double> sorted(spreads.begin(), spreads.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return sorted[m];
  return 0.5 * (sorted[m - 1] + sorted[m]);
}

struct CdsContractRecord {
  double spread = 0.0;  // basis points
  Categories categories;
};

enum class CategoryFactor { Region, Sector, Rating, Seniority };

inline constexpr std::array<CategoryFactor, 4> kAllCategoryFactors = {
    CategoryFactor::Region, CategoryFactor::Sector, CategoryFactor::Rating, CategoryFactor::Seniority};

inline std::string to_string(CategoryFactor f) {
  switch (f) {
    case CategoryFactor::Region: return "region";
    case CategoryFactor::Sector: return "sector";
    case CategoryFactor::Rating: return "rating";
    case CategoryFactor::Seniority: return "seniority";
  }
  return "?";
}

inline const std::string& category_level(const Categories& c, CategoryFactor f) {
  switch (f) {
    case CategoryFactor::Region: return c.region;
    case CategoryFactor::Sector: return c.sector;
    case CategoryFactor::Rating: return c.rating;
    case CategoryFactor::Seniority: return c.seniority;
  }
  return c.region;
}

struct CrossSectionalModel {
  struct Factor {
    CategoryFactor factor;
    std::vector<std::string> levels;  // sorted; levels[0] is the reference
    Vector coefficients;              // one per non-reference level
  };

  double intercept = 0.0;
  std::vector<Factor> factors;

  double log_spread(const Categories& c) const {
    double v = intercept;
    for (const auto& f : factors) {
      const auto& level = category_level(c, f.factor);
      const auto it = std::find(f.levels.begin(), f.levels.end(), level);
      if (it == f.levels.end())
        fail(ErrorCode::UnknownCategoryLevel, to_string(f.factor) + " level '" + level + "' was not in the fit");
      const auto pos = static_cast<Eigen::Index>(it - f.levels.begin());
      if (pos > 0) v += f.coefficients(pos - 1);
    }
    return v;
  }

  double predict(const Categories& c) const { return std::exp(log_spread(c)); }
};

/// OLS of log spread on dummies, dropping the first (sorted) level of every factor.
inline CrossSectionalModel fit_cross_sectional(std::span<const CdsContractRecord> records,
                                               std::span<const CategoryFactor> factors = kAllCategoryFactors) {
  if (records.empty()) fail(ErrorCode::RankDeficientDesign, "no records");
  CrossSectionalModel model;
  Eigen::Index cols = 1;
  for (auto f : factors) {
    std::set<std::string> levels;
    for (const auto& r : records) levels.insert(category_level(r.categories, f));
    model.factors.push_back({f, {levels.begin(), levels.end()}, {}});
    cols += static_cast<Eigen::Index>(levels.size()) - 1;
  }
  const auto n = static_cast<Eigen::Index>(records.size());
  Matrix design = Matrix::Zero(n, cols);
  Vector target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    if (!(r.spread > 0.0) || !std::isfinite(r.spread))
      fail(ErrorCode::RangeViolation, "spreads must be positive and finite");
    target(i) = std::log(r.spread);
    design(i, 0) = 1.0;
    Eigen::Index offset = 1;
    for (const auto& f : model.factors) {
      const auto pos = std::find(f.levels.begin(), f.levels.end(), category_level(r.categories, f.factor)) -
                       f.levels.begin();
      if (pos > 0) design(i, offset + pos - 1) = 1.0;
      offset += static_cast<Eigen::Index>(f.levels.size()) - 1;
    }
  }
  const Vector beta = least_squares(design, target);
  model.intercept = beta(0);
  Eigen::Index offset = 1;
  for (auto& f : model.factors) {
    const auto m = static_cast<Eigen::Index>(f.levels.size()) - 1;
    f.coefficients = beta.segment(offset, m);
    offset += m;
  }
  return model;
}

/// Adds factors in order and keeps each one only if the design stays full
/// rank. The intercept-only model always fits.
inline CrossSectionalModel fit_cross_sectional_nested(std::span<const CdsContractRecord> records,
                                                      std::span<const CategoryFactor> factors) {
  std::vector<CategoryFactor> kept;
  CrossSectionalModel model = fit_cross_sectional(records, kept);
  for (auto f : factors) {
    kept.push_back(f);
    try {
      model = fit_cross_sectional(records, kept);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficientDesign) throw;
      kept.pop_back();
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Panel-level baseline proxies

/// Curve-mapping bucket key: region, sector and rating.
inline std::string bucket_key(const Categories& c) { return c.region + "/" + c.sector + "/" + c.rating; }

/// Full category cell, seniority included.
inline std::string cell_key(const Categories& c) { return bucket_key(c) + "/" + c.seniority; }

struct BaselineRow {
  std::string counterparty;
  std::string date;
  std::optional<double> observed;  // market spread when quoted
  std::optional<double> curve_mean;
  std::optional<double> curve_median;
  std::optional<double> cross_sectional;
};

struct BaselineOptions {
  std::vector<CategoryFactor> factors{kAllCategoryFactors.begin(), kAllCategoryFactors.end()};
};

/// Per-date curve mapping over observed bucket members and a per-date
/// cross-sectional regression over all observed names. Buckets without a
/// quoted member are left empty.
inline std::vector<BaselineRow> baseline_proxies(const MarketPanel& panel, const BaselineOptions& options = {}) {
  if (panel.categories.empty()) fail(ErrorCode::MissingColumn, "baselines need category columns");
  std::map<std::string, std::vector<const PanelRow*>> by_date;
  for (const auto& r : panel.rows) by_date[r.date].push_back(&r);
  auto categories_of = [&](const std::string& name) -> const Categories& {
    const auto it = panel.categories.find(name);
    if (it == panel.categories.end()) fail(ErrorCode::MissingColumn, "no categories for " + name);
    return it->second;
  };

  std::vector<BaselineRow> out;
  for (const auto& [date, rows] : by_date) {
    std::map<std::string, std::vector<double>> buckets;
    std::vector<CdsContractRecord> records;
    for (const auto* r : rows) {
      if (!r->rate_observed) continue;
      const auto& cat = categories_of(r->counterparty);
      buckets[bucket_key(cat)].push_back(r->value(Column::Rate));
      records.push_back({r->value(Column::Rate), cat});
    }
    std::optional<CrossSectionalModel> model;
    if (!records.empty()) model = fit_cross_sectional_nested(records, options.factors);
    for (const auto* r : rows) {
      const auto& cat = categories_of(r->counterparty);
      BaselineRow row{r->counterparty, date, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
      if (r->rate_observed) row.observed = r->value(Column::Rate);
      const auto b = buckets.find(bucket_key(cat));
      if (b != buckets.end()) {
        row.curve_mean = curve_mapping_proxy(b->second, BucketStatistic::Mean);
        row.curve_median = curve_mapping_proxy(b->second, BucketStatistic::Median);
      }
      if (model) {
        try {
          row.cross_sectional = model->predict(cat);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::UnknownCategoryLevel) throw;
        }
      }
      out.push_back(std::move(row));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.counterparty, a.date) < std::tie(b.counterparty, b.date);
  });
  return out;
}

}  // namespace cdsproxy
