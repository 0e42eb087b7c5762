#pragma once

// Classification-based proxies: every counterparty is mapped, day by day, to
// the quoted name its features most resemble.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "cdsproxy/classifiers.hpp"

namespace cdsproxy {

struct ProxyAssignment {
  std::string counterparty;
  std::string date;
  std::string proxy;
};

namespace detail {

inline MarketPanel select_names(const MarketPanel& panel, const std::set<std::string>& names, bool keep) {
  MarketPanel out;
  out.categories = panel.categories;
  for (const auto& r : panel.rows)
    if (names.contains(r.counterparty) == keep) out.rows.push_back(r);
  return out;
}

}  // namespace detail

/// Quoted names are held out one at a time and classified against the
/// others; unquoted names are classified against all quoted ones. Rows come
/// back sorted by counterparty, then date.
inline std::vector<ProxyAssignment> ml_proxies(const MarketPanel& panel, const ClassifierSpec& spec, FeatureSet fs,
                                               const Overrides& overrides = {}, std::uint64_t seed = 0) {
  if (requires_rate(fs))
    fail(ErrorCode::BadArgument, to_string(fs) + " uses the 5-year rate, which an unquoted name lacks");
  std::set<std::string> quoted, unquoted;
  for (const auto& r : panel.rows) (r.rate_observed ? quoted : unquoted).insert(r.counterparty);
  for (const auto& name : unquoted) quoted.erase(name);
  if (quoted.size() < 2) fail(ErrorCode::InsufficientObservedRates, "proxies need at least 2 quoted names");

  std::vector<ProxyAssignment> out;
  auto assign = [&](const MarketPanel& train_panel, const MarketPanel& target) {
    const Dataset train = build_dataset(train_panel, fs);
    const auto model = fit_classifier(spec, train, overrides, seed);
    const Dataset rows = build_dataset(target, fs);
    const auto labels = predict(*model, rows.x);
    for (std::size_t i = 0; i < target.rows.size(); ++i)
      out.push_back({target.rows[i].counterparty, target.rows[i].date, train.class_names[labels[i]]});
  };

  const MarketPanel quoted_panel = detail::select_names(panel, quoted, true);
  if (quoted.size() >= 3) {
    for (const auto& name : quoted) {
      assign(detail::select_names(quoted_panel, {name}, false), detail::select_names(quoted_panel, {name}, true));
    }
  }
  if (!unquoted.empty()) assign(quoted_panel, detail::select_names(panel, unquoted, true));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.counterparty, a.date) < std::tie(b.counterparty, b.date);
  });
  return out;
}

}  // namespace cdsproxy
