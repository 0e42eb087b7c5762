#pragma once

// Seeded synthetic market panels and the panel CSV format.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cdsproxy/core.hpp"
#include "cdsproxy/io.hpp"
#include "cdsproxy/random.hpp"

namespace cdsproxy {

struct GeneratorConfig {
  std::size_t counterparties = 6;
  std::size_t days = 100;
  double factor_loading = 0.9;       // rho in [0, 1): weight of the common factor
  double market_scale = 0.3;         // log-level swing of the common factor
  double idiosyncratic_scale = 0.1;  // per-cell noise, scaled by sqrt(1 - rho^2)
  double base_spread = 1.0;          // spread of counterparty credit levels
  double signature_scale = 0.15;     // per-counterparty offsets between feature groups
  double curvature = 0.0;            // scale of per-counterparty convex factor response
  std::size_t tail_df = 0;           // Student-t degrees of freedom for cell noise, 0 = normal
  double recovery = 0.4;
  std::size_t unobserved_rates = 0;  // counterparties whose 5-year rate is left empty
  std::string start_date = "2008-06-07";
  std::uint64_t seed = 0;
};

inline void validate_config(const GeneratorConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorCode::BadConfig, what); };
  if (c.counterparties < 2) bad("need at least 2 counterparties");
  if (c.days < 2) bad("need at least 2 days");
  if (!(c.factor_loading >= 0.0 && c.factor_loading < 1.0)) bad("factor loading must lie in [0, 1)");
  if (!(c.market_scale > 0.0) || !(c.idiosyncratic_scale > 0.0)) bad("scales must be positive");
  if (!(c.base_spread >= 0.0) || !(c.signature_scale >= 0.0)) bad("spreads must be non-negative");
  if (!(c.recovery >= 0.0 && c.recovery < 1.0)) bad("recovery must lie in [0, 1)");
  if (c.curvature < 0.0) bad("curvature must be non-negative");
  if (c.tail_df != 0 && c.tail_df < 3) bad("tail degrees of freedom must be 0 or at least 3");
  if (c.unobserved_rates >= c.counterparties) bad("at least one counterparty must have observed rates");
}

// ---------------------------------------------------------------------------
// Calendar dates

namespace detail {

// Days since 1970-01-01 for a proleptic Gregorian date, and back.
inline long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

inline std::string civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04ld-%02u-%02u", y + (m <= 2), m, d);
  return buf;
}

inline long parse_iso_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 ||
      d > 31) {
    fail(ErrorCode::BadConfig, "bad ISO date '" + text + "'");
  }
  return days_from_civil(y, m, d);
}

}  // namespace detail

inline std::string counterparty_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "CP%02zu", index + 1);
  return buf;
}

// ---------------------------------------------------------------------------
// Generator

namespace detail {

struct CounterpartyProfile {
  double level;      // credit quality in [-1, 1]
  double beta;       // sensitivity to the common factor
  double pd_tilt;    // slope of the hazard term structure
  double iv_tilt;
  double iv_offset;
  double hv_offset;
  double basis;      // CDS rate over the hazard-implied rate, in logs
  double convexity;  // response to the squared factor
};

// Unit-variance noise: standard normal, or Student-t rescaled by sqrt((df - 2) / df).
inline double cell_noise(Rng& rng, std::size_t df) {
  const double z = rng.normal();
  if (df == 0) return z;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < df; ++i) {
    const double g = rng.normal();
    chi2 += g * g;
  }
  const double d = static_cast<double>(df);
  return z / std::sqrt(chi2 / d) * std::sqrt((d - 2.0) / d);
}

inline constexpr std::array<double, 6> kPdHorizonSteps = {0.5, 0.5, 1.0, 1.0, 1.0, 1.0};
inline constexpr double kBaseHazard = 0.015;
inline constexpr double kBaseImpliedVol = 0.30;
inline constexpr double kBaseHistoricalVol = 0.28;
inline constexpr double kVolSensitivity = 0.8;

}  // namespace detail

/// One-factor model in log space: every feature is a counterparty base level
/// plus a loading on a common random-walk factor plus cell noise. PDs are
/// built from positive hazard increments, so the term structure is monotone.
inline MarketPanel generate_panel(const GeneratorConfig& config) {
  validate_config(config);
  const std::size_t n = config.counterparties;
  const double rho = config.factor_loading;
  const double noise = std::sqrt(1.0 - rho * rho) * config.idiosyncratic_scale;
  const double sig = config.signature_scale;

  auto profile_rng = Rng::stream(config.seed, 0);
  std::vector<double> levels(n);
  for (std::size_t c = 0; c < n; ++c) levels[c] = n == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(c) / static_cast<double>(n - 1);
  profile_rng.shuffle(levels);
  std::vector<detail::CounterpartyProfile> profiles(n);
  for (std::size_t c = 0; c < n; ++c) {
    auto& p = profiles[c];
    p.level = levels[c] + profile_rng.uniform(-0.1, 0.1);
    p.beta = profile_rng.uniform(0.6, 1.4);
    p.pd_tilt = sig * profile_rng.normal();
    p.iv_tilt = sig * profile_rng.normal();
    p.iv_offset = sig * profile_rng.normal();
    p.hv_offset = sig * profile_rng.normal();
    p.basis = sig * profile_rng.normal();
    p.convexity = config.curvature * profile_rng.normal();
  }

  // Common factor: a random walk rescaled to zero mean and unit sd.
  auto factor_rng = Rng::stream(config.seed, 1);
  std::vector<double> factor(config.days, 0.0);
  for (std::size_t t = 1; t < config.days; ++t) factor[t] = factor[t - 1] + factor_rng.normal();
  {
    double mean = 0.0, ss = 0.0;
    for (double f : factor) mean += f;
    mean /= static_cast<double>(config.days);
    for (double f : factor) ss += (f - mean) * (f - mean);
    const double sd = std::sqrt(ss / static_cast<double>(config.days));
    for (auto& f : factor) f = sd > 0.0 ? (f - mean) / sd : 0.0;
  }

  MarketPanel panel;
  const long start = detail::parse_iso_date(config.start_date);
  auto noise_rng = Rng::stream(config.seed, 2);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& p = profiles[c];
    const std::string name = counterparty_name(c);
    const bool observed = c >= config.unobserved_rates;
    const double credit = config.base_spread * p.level;
    for (std::size_t t = 0; t < config.days; ++t) {
      const double f = factor[t];
      const double common = rho * config.market_scale * (p.beta * f + p.convexity * (f * f - 1.0));
      auto eps = [&] { return noise * detail::cell_noise(noise_rng, config.tail_df); };
      PanelRow row;
      row.counterparty = name;
      row.date = detail::civil_from_days(start + static_cast<long>(t));
      double cumulative = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        const double tilt = p.pd_tilt * (static_cast<double>(i) - 2.5) / 2.5;
        const double hazard = detail::kBaseHazard * std::exp(credit + tilt + common + eps());
        cumulative += hazard * detail::kPdHorizonSteps[i];
        row.values[index_of(Column::Pd6m) + i] = 1.0 - std::exp(-cumulative);
      }
      const double vol_level = detail::kVolSensitivity * (credit + common);
      for (std::size_t j = 0; j < 4; ++j) {
        const double tilt = p.iv_tilt * (static_cast<double>(j) - 1.5) / 1.5;
        row.values[index_of(Column::Iv3m) + j] =
            detail::kBaseImpliedVol * std::exp(vol_level + p.iv_offset + tilt + eps());
      }
      for (std::size_t j = 0; j < 5; ++j) {
        row.values[index_of(Column::Hv1m) + j] =
            detail::kBaseHistoricalVol * std::exp(vol_level + p.hv_offset + eps());
      }
      const double hazard5 = cumulative / 5.0;
      const double rate = 1e4 * (1.0 - config.recovery) * hazard5 * std::exp(p.basis + eps());
      row.rate_observed = observed;
      row.values[index_of(Column::Rate)] = observed ? rate : std::numeric_limits<double>::quiet_NaN();
      panel.rows.push_back(std::move(row));
    }
  }

  // Bucket labels for the incumbent proxy methods; ratings follow credit quality.
  static const std::array<std::string, 2> regions = {"Europe", "NorthAmerica"};
  static const std::array<std::string, 2> sectors = {"Energy", "Financials"};
  for (std::size_t c = 0; c < n; ++c) {
    Categories cat;
    cat.region = regions[c % 2];
    cat.sector = sectors[(c / 2) % 2];
    cat.rating = profiles[c].level < 0.0 ? "A" : "BBB";
    cat.seniority = c % 3 == 2 ? "Subordinated" : "Senior";
    panel.categories[counterparty_name(c)] = cat;
  }
  return panel;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::array<std::string_view, 4> kCategoryColumns = {"region", "sector", "rating", "seniority"};

namespace detail {

inline Error schema_error(std::size_t row, const std::string& column, const std::string& what) {
  Error e(ErrorCode::SchemaViolation, "row " + std::to_string(row + 1) + ", column " + column + ": " + what);
  e.row = row;
  e.column = column;
  return e;
}

}  // namespace detail

/// Parses panel CSV text. Lines starting with '#' are comments. A missing s
/// column, or an empty s cell, marks the rate unobserved.
inline MarketPanel parse_panel(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line.front() != '#') lines.push_back(std::move(line));
      start = end + 1;
    }
  }
  if (lines.empty()) fail(ErrorCode::SchemaViolation, "no header row");

  const auto header = split_fields(lines[0]);
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(header[i]);
    if (position.count(name)) fail(ErrorCode::SchemaViolation, "duplicate column " + name);
    position[name] = i;
  }
  std::set<std::string> known = {"counterparty", "date"};
  for (auto n : kColumnNames) known.insert(std::string(n));
  for (auto n : kCategoryColumns) known.insert(std::string(n));
  for (const auto& [name, _] : position) {
    if (!known.count(name)) {
      Error e(ErrorCode::SchemaViolation, "unknown column " + name);
      e.column = name;
      throw e;
    }
  }
  for (std::string required : {"counterparty", "date"}) {
    if (!position.count(required)) {
      Error e(ErrorCode::SchemaViolation, "missing column " + required);
      e.column = required;
      throw e;
    }
  }
  for (std::size_t c = 1; c < kColumnCount; ++c) {
    const std::string name(kColumnNames[c]);
    if (!position.count(name)) {
      Error e(ErrorCode::SchemaViolation, "missing column " + name);
      e.column = name;
      throw e;
    }
  }
  const bool has_rate = position.count("s") > 0;
  std::size_t category_columns = 0;
  for (auto n : kCategoryColumns) category_columns += position.count(std::string(n));
  if (category_columns != 0 && category_columns != kCategoryColumns.size()) {
    fail(ErrorCode::SchemaViolation, "category columns must be all present or all absent");
  }

  MarketPanel panel;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t r = li - 1;
    const auto fields = split_fields(lines[li]);
    if (fields.size() != header.size()) {
      throw detail::schema_error(r, "*", "expected " + std::to_string(header.size()) + " fields, found " +
                                             std::to_string(fields.size()));
    }
    PanelRow row;
    row.counterparty = std::string(fields[position["counterparty"]]);
    row.date = std::string(fields[position["date"]]);
    if (row.counterparty.empty()) throw detail::schema_error(r, "counterparty", "empty name");
    try {
      detail::parse_iso_date(row.date);
    } catch (const Error&) {
      throw detail::schema_error(r, "date", "not an ISO-8601 date: '" + row.date + "'");
    }
    if (!seen.emplace(row.counterparty, row.date).second) {
      throw detail::schema_error(r, "date", "duplicate row for " + row.counterparty + " on " + row.date);
    }
    for (std::size_t c = 0; c < kColumnCount; ++c) {
      const std::string name(kColumnNames[c]);
      if (c == index_of(Column::Rate)) {
        const auto cell = has_rate ? fields[position[name]] : std::string_view{};
        row.rate_observed = !cell.empty();
        if (!row.rate_observed) {
          row.values[c] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
      }
      const auto v = parse_double(fields[position[name]]);
      if (!v) throw detail::schema_error(r, name, "not a number: '" + std::string(fields[position[name]]) + "'");
      row.values[c] = *v;
    }
    if (category_columns) {
      Categories cat{std::string(fields[position["region"]]), std::string(fields[position["sector"]]),
                     std::string(fields[position["rating"]]), std::string(fields[position["seniority"]])};
      const auto [it, inserted] = panel.categories.emplace(row.counterparty, cat);
      if (!inserted && !(it->second == cat)) {
        throw detail::schema_error(r, "region", "categories differ between rows of " + row.counterparty);
      }
    }
    panel.rows.push_back(std::move(row));
  }
  validate_panel(panel);
  return panel;
}

inline MarketPanel read_panel(const std::filesystem::path& path) { return parse_panel(read_text(path)); }

inline std::string format_panel(const MarketPanel& panel, const std::string& header = {}) {
  std::string out = header;
  out += "counterparty,date";
  for (auto n : kColumnNames) out += "," + std::string(n);
  const bool categories = !panel.categories.empty();
  if (categories)
    for (auto n : kCategoryColumns) out += "," + std::string(n);
  out += "\n";
  for (const auto& row : panel.rows) {
    out += row.counterparty + "," + row.date;
    for (std::size_t c = 0; c < kColumnCount; ++c) {
      out += ",";
      if (c == index_of(Column::Rate) && !row.rate_observed) continue;
      out += format_double(row.values[c]);
    }
    if (categories) {
      const auto it = panel.categories.find(row.counterparty);
      if (it == panel.categories.end()) fail(ErrorCode::SchemaViolation, "no categories for " + row.counterparty);
      out += "," + it->second.region + "," + it->second.sector + "," + it->second.rating + "," + it->second.seniority;
    }
    out += "\n";
  }
  return out;
}

inline void write_panel(const MarketPanel& panel, const std::filesystem::path& path, const std::string& header = {}) {
  validate_panel(panel);
  write_text(path, format_panel(panel, header));
}

}  // namespace cdsproxy
