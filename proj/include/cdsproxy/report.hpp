#pragma once

// CSV layouts for cross-validation results, ranking and family tables, the
// PCA study, the correlation histogram and the baseline comparison.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cdsproxy/baselines.hpp"
#include "cdsproxy/evaluation.hpp"
#include "cdsproxy/io.hpp"
#include "cdsproxy/proxy.hpp"

namespace cdsproxy {

namespace detail {

inline std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace detail

/// classifier,features,K,mu,sigma,e1..eK; one row per result.
inline std::string format_cv_results(const std::vector<CvResult>& results) {
  std::size_t k = 0;
  for (const auto& r : results) k = std::max(k, r.errors.size());
  std::string out = "classifier,features,K,mu,sigma";
  for (std::size_t f = 1; f <= k; ++f) out += ",e" + std::to_string(f);
  out += "\n";
  for (const auto& r : results) {
    out += r.label + "," + r.features + "," + std::to_string(r.errors.size()) + "," + format_double(r.mean) + "," +
           format_double(r.sd);
    for (std::size_t f = 0; f < k; ++f) out += "," + (f < r.errors.size() ? format_double(r.errors[f]) : "");
    out += "\n";
  }
  return out;
}

/// rank,classifier,<accuracy per feature set>,mean,sd
inline std::string format_ranking(const RankingTable& table) {
  std::string out = "rank,classifier";
  for (const auto& fs : table.feature_sets) out += "," + fs;
  out += ",mean,sd\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    out += std::to_string(i + 1) + "," + row.label;
    for (double a : row.accuracies) out += "," + format_double(a);
    out += "," + format_double(row.mean) + "," + format_double(row.sd) + "\n";
  }
  return out;
}

/// Test-error mean and sd per feature set for the classifiers of one family.
inline std::string format_family_table(const std::vector<CvResult>& results, Family family,
                                       const std::vector<std::string>& feature_sets) {
  std::string out = "classifier";
  for (const auto& fs : feature_sets) out += "," + fs + "_mu," + fs + "_sigma";
  out += "\n";
  std::vector<std::string> labels;
  for (const auto& r : results) {
    if (find_classifier(r.label).family != family) continue;
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
  }
  for (const auto& label : labels) {
    out += label;
    for (const auto& fs : feature_sets) {
      const auto it = std::find_if(results.begin(), results.end(),
                                   [&](const CvResult& r) { return r.label == label && r.features == fs; });
      if (it == results.end()) fail(ErrorCode::MissingCell, "no result for " + label + " on " + fs);
      out += "," + format_double(it->mean) + "," + format_double(it->sd);
    }
    out += "\n";
  }
  return out;
}

struct PcaStudyRow {
  std::string label;
  PcaStudy study;
};

/// classifier,components,variance_explained,accuracy,A(PC)-A(FS1)
inline std::string format_pca_study(const std::vector<PcaStudyRow>& rows, const Vector& variance_explained) {
  std::string out = "classifier,components,variance_explained,accuracy,A(PC)-A(FS1)\n";
  for (const auto& row : rows) {
    for (std::size_t m = 1; m <= row.study.accuracy_by_components.size(); ++m) {
      out += row.label + "," + std::to_string(m) + "," +
             format_double(variance_explained(static_cast<Eigen::Index>(m - 1))) + "," +
             format_double(row.study.accuracy_by_components[m - 1]) + "," + format_double(row.study.difference(m)) +
             "\n";
    }
    out += row.label + ",raw,," + format_double(row.study.raw_accuracy) + ",0\n";
  }
  return out;
}

/// bin_lower,bin_upper,count,fraction
inline std::string format_correlation_histogram(const CorrelationHistogram& h) {
  std::string out = "bin_lower,bin_upper,count,fraction\n";
  const double total = static_cast<double>(h.correlations.size());
  for (std::size_t b = 0; b < kCorrelationBins; ++b) {
    const double lo = -1.0 + static_cast<double>(b) / 10.0;
    const double hi = -1.0 + static_cast<double>(b + 1) / 10.0;
    out += format_fixed(lo, 1) + "," + format_fixed(hi, 1) + "," + std::to_string(h.counts[b]) + "," +
           format_double(total > 0.0 ? static_cast<double>(h.counts[b]) / total : 0.0) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Baseline comparison

/// Per counterparty and date: market spread, both baselines, and the ML proxy
/// with that proxy's quoted spread on the same date.
inline std::string format_baseline_rows(const MarketPanel& panel, const std::vector<BaselineRow>& rows,
                                        const std::vector<ProxyAssignment>& proxies) {
  std::map<std::pair<std::string, std::string>, double> quotes;
  for (const auto& r : panel.rows)
    if (r.rate_observed) quotes[{r.counterparty, r.date}] = r.value(Column::Rate);
  std::map<std::pair<std::string, std::string>, std::string> proxy_of;
  for (const auto& p : proxies) proxy_of[{p.counterparty, p.date}] = p.proxy;

  std::string out = "counterparty,date,cell,s,curve_mean,curve_median,cross_sectional,ml_proxy,ml_proxy_s\n";
  for (const auto& r : rows) {
    const auto& cat = panel.categories.at(r.counterparty);
    out += r.counterparty + "," + r.date + "," + cell_key(cat) + "," + detail::optional_cell(r.observed) + "," +
           detail::optional_cell(r.curve_mean) + "," + detail::optional_cell(r.curve_median) + "," +
           detail::optional_cell(r.cross_sectional);
    const auto p = proxy_of.find({r.counterparty, r.date});
    if (p != proxy_of.end()) {
      const auto q = quotes.find({p->second, r.date});
      out += "," + p->second + "," + (q != quotes.end() ? format_double(q->second) : "");
    } else {
      out += ",,";
    }
    out += "\n";
  }
  return out;
}

struct CellSummary {
  std::string cell;
  std::size_t members = 0;
  std::size_t rows = 0;
  // Largest number of distinct values any single date produces within the cell.
  std::size_t curve_values_per_date = 0;
  std::size_t cross_sectional_values_per_date = 0;
  std::size_t ml_labels_per_date = 0;
  // Distinct ML proxies over the whole cell.
  std::size_t ml_labels = 0;
};

inline std::vector<CellSummary> summarize_cells(const MarketPanel& panel, const std::vector<BaselineRow>& rows,
                                                const std::vector<ProxyAssignment>& proxies) {
  std::map<std::pair<std::string, std::string>, std::string> proxy_of;
  for (const auto& p : proxies) proxy_of[{p.counterparty, p.date}] = p.proxy;
  struct Acc {
    std::set<std::string> members;
    std::size_t rows = 0;
    std::map<std::string, std::set<double>> curve, cross;
    std::map<std::string, std::set<std::string>> ml_by_date;
    std::set<std::string> ml;
  };
  std::map<std::string, Acc> cells;
  for (const auto& r : rows) {
    auto& a = cells[cell_key(panel.categories.at(r.counterparty))];
    a.members.insert(r.counterparty);
    ++a.rows;
    if (r.curve_mean) a.curve[r.date].insert(*r.curve_mean);
    if (r.cross_sectional) a.cross[r.date].insert(*r.cross_sectional);
    const auto p = proxy_of.find({r.counterparty, r.date});
    if (p != proxy_of.end()) {
      a.ml_by_date[r.date].insert(p->second);
      a.ml.insert(p->second);
    }
  }
  auto widest = [](const auto& by_date) {
    std::size_t m = 0;
    for (const auto& [date, values] : by_date) m = std::max(m, values.size());
    return m;
  };
  std::vector<CellSummary> out;
  for (const auto& [key, a] : cells) {
    out.push_back({key, a.members.size(), a.rows, widest(a.curve), widest(a.cross), widest(a.ml_by_date),
                   a.ml.size()});
  }
  return out;
}

inline std::string format_cell_summary(const std::vector<CellSummary>& cells) {
  std::string out =
      "cell,members,rows,curve_values_per_date,cross_sectional_values_per_date,ml_labels_per_date,ml_labels\n";
  for (const auto& c : cells) {
    out += c.cell + "," + std::to_string(c.members) + "," + std::to_string(c.rows) + "," +
           std::to_string(c.curve_values_per_date) + "," + std::to_string(c.cross_sectional_values_per_date) + "," +
           std::to_string(c.ml_labels_per_date) + "," + std::to_string(c.ml_labels) + "\n";
  }
  return out;
}

}  // namespace cdsproxy
