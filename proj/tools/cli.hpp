#pragma once

// Command-line front end. run() parses, dispatches and writes all outputs;
// main() only forwards the process arguments.

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdsproxy/cdsproxy.hpp"

namespace cdsproxy::cli {

inline constexpr const char* kOutputDirVariable = "CDSPROXY_OUTPUT_DIR";

struct Settings {
  std::string command;
  std::string panel_path;  // empty: generate in memory
  std::string output_dir;
  std::string output_file = "panel.csv";
  GeneratorConfig generator;
  std::uint64_t seed = 1;
  std::size_t folds = kDefaultFolds;
  std::size_t jobs = 1;
  std::vector<std::string> classifiers;
  std::vector<std::string> feature_sets;
  std::string impute;  // rate-free basis for filling missing 5-year rates
  Overrides overrides;
};

struct Output {
  std::string name;
  std::string text;
};

namespace detail {

inline std::string join(const std::vector<std::string>& items, const char* sep = ";") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

inline std::string file_safe(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

inline std::vector<std::pair<std::string, std::string>> header_entries(const Settings& s) {
  std::vector<std::pair<std::string, std::string>> h{{"program", "cdsproxy"}, {"command", s.command},
                                                     {"seed", std::to_string(s.seed)}};
  if (s.panel_path.empty()) {
    const auto& g = s.generator;
    h.insert(h.end(), {{"panel", "generated"},
                       {"counterparties", std::to_string(g.counterparties)},
                       {"days", std::to_string(g.days)},
                       {"factor_loading", format_double(g.factor_loading)},
                       {"market_scale", format_double(g.market_scale)},
                       {"idiosyncratic_scale", format_double(g.idiosyncratic_scale)},
                       {"base_spread", format_double(g.base_spread)},
                       {"signature_scale", format_double(g.signature_scale)},
                       {"curvature", format_double(g.curvature)},
                       {"tail_df", std::to_string(g.tail_df)},
                       {"recovery", format_double(g.recovery)},
                       {"unobserved_rates", std::to_string(g.unobserved_rates)},
                       {"start_date", g.start_date}});
  } else {
    h.emplace_back("panel", s.panel_path);
  }
  if (!s.impute.empty()) h.emplace_back("impute", s.impute);
  if (s.command == "generate") return h;
  if (s.command != "correlations") h.emplace_back("folds", std::to_string(s.folds));
  if (!s.classifiers.empty()) h.emplace_back("classifiers", join(s.classifiers));
  if (!s.feature_sets.empty()) h.emplace_back("feature_sets", join(s.feature_sets));
  const auto& o = s.overrides;
  if (o.bandwidth) h.emplace_back("bandwidth", format_double(*o.bandwidth));
  if (o.neighbours) h.emplace_back("neighbours", std::to_string(*o.neighbours));
  if (o.max_splits) h.emplace_back("max_splits", std::to_string(*o.max_splits));
  if (o.cycles) h.emplace_back("cycles", std::to_string(*o.cycles));
  if (o.cost) h.emplace_back("cost", format_double(*o.cost));
  if (o.kernel) h.emplace_back("kernel", std::to_string(static_cast<int>(*o.kernel)));
  if (o.degree) h.emplace_back("degree", std::to_string(*o.degree));
  if (o.activation) h.emplace_back("activation", std::to_string(static_cast<int>(*o.activation)));
  if (o.hidden) h.emplace_back("hidden", std::to_string(*o.hidden));
  if (o.epochs) h.emplace_back("epochs", std::to_string(*o.epochs));
  if (o.strategy) h.emplace_back("strategy", *o.strategy == SvmStrategy::OneVsRest ? "one-vs-rest" : "one-vs-one");
  return h;
}

inline MarketPanel load_panel(const Settings& s) {
  MarketPanel panel;
  if (s.panel_path.empty()) {
    auto g = s.generator;
    g.seed = s.seed;
    panel = generate_panel(g);
  } else {
    panel = read_panel(s.panel_path);
  }
  if (!s.impute.empty()) panel = impute_five_year_rate(panel, parse_feature_set(s.impute));
  return panel;
}

inline std::vector<FeatureSet> feature_sets(const Settings& s, std::vector<FeatureSet> fallback) {
  if (s.feature_sets.empty()) return fallback;
  std::vector<FeatureSet> out;
  for (const auto& name : s.feature_sets) out.push_back(parse_feature_set(name));
  return out;
}

inline std::vector<std::string> names(const std::vector<FeatureSet>& sets) {
  std::vector<std::string> out;
  for (auto fs : sets) out.push_back(to_string(fs));
  return out;
}

inline std::vector<std::string> default_pca_classifiers() {
  return {"LDA-FullCov", "LDA-Diagonal", "QDA-FullCov", "QDA-Diagonal", "NB-Normal", "NB-Triangular",
          "NB-Epanechnikov", "kNN-Euclidean", "kNN-CityBlock", "DT-Gini", "DT-Entropy", "DT-Twoing"};
}

}  // namespace detail

/// Computes every output of one command. Nothing is written here.
inline std::vector<Output> execute(Settings s, std::ostream& log) {
  if (s.command != "generate" && s.command != "correlations") {
    if (s.folds < 2) fail(ErrorCode::BadK, "fold count must be at least 2, got " + std::to_string(s.folds));
  }
  for (const auto& l : s.classifiers) find_classifier(l);
  for (const auto& f : s.feature_sets) parse_feature_set(f);
  if (!s.impute.empty()) parse_feature_set(s.impute);

  if (s.command == "generate") {
    auto g = s.generator;
    g.seed = s.seed;
    const auto panel = generate_panel(g);
    log << "generated " << panel.rows.size() << " rows for " << g.counterparties << " counterparties\n";
    return {{s.output_file, format_panel(panel, comment_header(detail::header_entries(s)))}};
  }

  const MarketPanel panel = detail::load_panel(s);
  auto header = [&] { return comment_header(detail::header_entries(s)); };

  if (s.command == "evaluate") {
    if (s.classifiers.size() != 1) fail(ErrorCode::BadArgument, "evaluate takes exactly one --classifier");
    const auto sets = detail::feature_sets(s, {FeatureSet::FS1});
    if (sets.size() != 1) fail(ErrorCode::BadArgument, "evaluate takes exactly one --fs");
    const auto data = build_dataset(panel, sets[0]);
    const auto result = cross_validate(find_classifier(s.classifiers[0]), data, s.folds, s.seed, s.overrides);
    log << result.label << " " << result.features << " mu=" << format_fixed(result.mean, 4)
        << " sigma=" << format_fixed(result.sd, 4) << "\n";
    return {{"cv_" + detail::file_safe(result.label) + "_" + result.features + ".csv",
             header() + format_cv_results({result})}};
  }

  if (s.command == "compare") {
    if (s.classifiers.empty()) s.classifiers = comparison_grid();
    const auto sets =
        detail::feature_sets(s, std::vector<FeatureSet>(kAllFeatureSets.begin(), kAllFeatureSets.end()));
    std::map<FeatureSet, Dataset> datasets;
    for (auto fs : sets) datasets[fs] = build_dataset(panel, fs);
    GridRequest request{s.classifiers, sets, s.folds, s.seed, s.overrides, s.jobs};
    const auto results = run_grid(request, datasets);
    const auto fs_names = detail::names(sets);
    const auto table = rank_classifiers(results, fs_names);
    std::vector<Output> out{{"ranking.csv", header() + format_ranking(table)},
                            {"cv_results.csv", header() + format_cv_results(results)}};
    for (auto family : {Family::DA, Family::NB, Family::KNN, Family::LR, Family::DT, Family::SVM, Family::NN,
                        Family::Bagged}) {
      const bool present = std::any_of(results.begin(), results.end(),
                                       [&](const CvResult& r) { return find_classifier(r.label).family == family; });
      if (!present) continue;
      out.push_back({"family_" + detail::file_safe(to_string(family)) + ".csv",
                     header() + format_family_table(results, family, fs_names)});
    }
    for (std::size_t i = 0; i < table.rows.size() && i < 5; ++i)
      log << i + 1 << ". " << table.rows[i].label << " " << format_fixed(table.rows[i].mean, 4) << "\n";
    return out;
  }

  if (s.command == "pca-study") {
    if (s.classifiers.empty()) s.classifiers = detail::default_pca_classifiers();
    const auto sets = detail::feature_sets(s, {FeatureSet::FS1});
    if (sets.size() != 1) fail(ErrorCode::BadArgument, "pca-study takes exactly one --fs");
    const auto data = build_dataset(panel, sets[0]);
    check_fold_count(s.folds, data.size());
    std::vector<PcaStudyRow> rows;
    for (const auto& label : s.classifiers) {
      rows.push_back({label, pca_study(make_fitter(find_classifier(label), s.overrides, s.seed), data, s.folds, s.seed,
                                       s.jobs)});
      log << label << " A(PC)-A(" << to_string(sets[0]) << ")="
          << format_fixed(rows.back().study.difference(static_cast<std::size_t>(data.dimension())), 4) << "\n";
    }
    return {{"pca_study.csv", header() + format_pca_study(rows, pca_fit(data.x).variance_explained)}};
  }

  if (s.command == "correlations") {
    const auto sets = detail::feature_sets(s, {FeatureSet::FS1});
    if (sets.size() != 1) fail(ErrorCode::BadArgument, "correlations takes exactly one --fs");
    const auto h = correlation_histogram(build_dataset(panel, sets[0]).x);
    auto extra = detail::header_entries(s);
    extra.emplace_back("pairs", std::to_string(h.correlations.size()));
    extra.emplace_back("undefined_pairs", std::to_string(h.undefined));
    extra.emplace_back("fraction_above_0.7", format_double(h.fraction_above(0.7)));
    extra.emplace_back("median_abs_correlation", format_double(h.median_absolute()));
    log << "pairs above 0.7: " << format_fixed(100.0 * h.fraction_above(0.7), 1) << "%\n";
    return {{"correlations.csv", comment_header(extra) + format_correlation_histogram(h)}};
  }

  if (s.command == "baseline") {
    if (s.classifiers.empty()) s.classifiers = {"BaggedTree"};
    if (s.classifiers.size() != 1) fail(ErrorCode::BadArgument, "baseline takes exactly one --classifier");
    const auto sets = detail::feature_sets(s, {FeatureSet::FS4});
    if (sets.size() != 1) fail(ErrorCode::BadArgument, "baseline takes exactly one --fs");
    const auto rows = baseline_proxies(panel);
    const auto proxies = ml_proxies(panel, find_classifier(s.classifiers[0]), sets[0], s.overrides, s.seed);
    const auto cells = summarize_cells(panel, rows, proxies);
    std::size_t widest = 0;
    for (const auto& c : cells) widest = std::max(widest, c.ml_labels);
    log << cells.size() << " cells, up to " << widest << " distinct ML proxies per cell\n";
    return {{"baseline.csv", header() + format_baseline_rows(panel, rows, proxies)},
            {"baseline_cells.csv", header() + format_cell_summary(cells)}};
  }

  fail(ErrorCode::BadArgument, "unknown command '" + s.command + "'");
}

/// Writes every output or none of them.
inline std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir,
                                                        const std::vector<Output>& outputs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string());
  std::vector<std::filesystem::path> written;
  try {
    for (const auto& o : outputs) {
      write_text(dir / o.name, o.text);
      written.push_back(dir / o.name);
    }
  } catch (...) {
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
  return written;
}

inline nlohmann::json error_json(const Error& e) {
  nlohmann::json j{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (e.row) j["row"] = *e.row;
  if (e.column) j["column"] = *e.column;
  if (e.fold) j["fold"] = *e.fold + 1;
  return j;
}

namespace detail {

template <typename E>
CLI::Option* add_enum(CLI::App* app, const std::string& name, std::optional<E>& target,
                      const std::map<std::string, E>& values, const std::string& help) {
  return app
      ->add_option_function<E>(
          name, [&target](const E& v) { target = v; }, help)
      ->transform(CLI::CheckedTransformer(values, CLI::ignore_case));
}

template <typename T>
CLI::Option* add_optional(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  return app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  if (const char* env = std::getenv(kOutputDirVariable)) s.output_dir = env;
  if (s.output_dir.empty()) s.output_dir = ".";

  CLI::App app{"Classification-based CDS proxy toolkit"};
  app.name("cdsproxy");
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", s.seed, "seed for generation, folds and model initialization");
    sub->add_option("-o,--output-dir", s.output_dir, std::string("output directory (default $") + kOutputDirVariable + " or .)");
  };
  auto generator = [&](CLI::App* sub) {
    auto& g = s.generator;
    sub->add_option("--counterparties", g.counterparties, "number of counterparties");
    sub->add_option("--days", g.days, "observation days");
    sub->add_option("--rho", g.factor_loading, "common factor loading in [0, 1)");
    sub->add_option("--market-scale", g.market_scale, "common factor log-level swing");
    sub->add_option("--idiosyncratic-scale", g.idiosyncratic_scale, "per-cell noise scale");
    sub->add_option("--base-spread", g.base_spread, "spread of counterparty credit levels");
    sub->add_option("--signature-scale", g.signature_scale, "per-counterparty feature-group offsets");
    sub->add_option("--curvature", g.curvature, "convex factor response scale");
    sub->add_option("--tail-df", g.tail_df, "Student-t noise degrees of freedom, 0 for normal");
    sub->add_option("--recovery", g.recovery, "recovery rate");
    sub->add_option("--unobserved", g.unobserved_rates, "counterparties without quoted 5-year rates");
    sub->add_option("--start-date", g.start_date, "first observation date");
  };
  auto input = [&](CLI::App* sub) {
    sub->add_option("--panel", s.panel_path, "panel CSV; generated from the generator flags when absent");
    sub->add_option("--impute", s.impute, "fill missing 5-year rates by regression on FS4, FS5 or FS6");
    generator(sub);
  };
  auto overrides = [&](CLI::App* sub) {
    auto& o = s.overrides;
    detail::add_optional(sub, "--bandwidth", o.bandwidth, "NB kernel bandwidth b");
    detail::add_optional(sub, "--neighbours", o.neighbours, "kNN neighbour count k");
    detail::add_optional(sub, "--max-splits", o.max_splits, "tree split budget z");
    detail::add_optional(sub, "--cycles", o.cycles, "bagging learning cycles B");
    detail::add_optional(sub, "--cost", o.cost, "SVM cost C");
    detail::add_enum<KernelKind>(sub, "--kernel", o.kernel,
                                 {{"linear", KernelKind::Linear},
                                  {"gaussian", KernelKind::Gaussian},
                                  {"polynomial", KernelKind::Polynomial}},
                                 "SVM kernel");
    detail::add_optional(sub, "--degree", o.degree, "polynomial kernel degree");
    detail::add_enum<Activation>(sub, "--activation", o.activation,
                                 {{"tansig", Activation::TanSigmoid},
                                  {"linear", Activation::Linear},
                                  {"elliot", Activation::ElliotSigmoid}},
                                 "NN hidden activation");
    detail::add_optional(sub, "--hidden", o.hidden, "NN hidden units h");
    detail::add_optional(sub, "--epochs", o.epochs, "NN epoch cap");
    detail::add_enum<SvmStrategy>(sub, "--strategy", o.strategy,
                                  {{"one-vs-rest", SvmStrategy::OneVsRest}, {"one-vs-one", SvmStrategy::OneVsOne}},
                                  "SVM multiclass scheme");
  };
  auto cv = [&](CLI::App* sub) {
    sub->add_option("-k,--folds", s.folds, "cross-validation folds K");
    sub->add_option("-j,--jobs", s.jobs, "worker threads");
  };

  auto* gen = app.add_subcommand("generate", "write a synthetic panel CSV");
  common(gen);
  generator(gen);
  gen->add_option("--file", s.output_file, "panel file name inside the output directory");

  auto* eval = app.add_subcommand("evaluate", "cross-validate one classifier on one feature selection");
  common(eval);
  input(eval);
  cv(eval);
  overrides(eval);
  eval->add_option("--classifier", s.classifiers, "classifier label, e.g. QDA-FullCov")->required()->expected(1);
  eval->add_option("--fs", s.feature_sets, "feature selection FS1..FS6")->expected(1);

  auto* cmp = app.add_subcommand("compare", "rank classifiers over feature selections");
  common(cmp);
  input(cmp);
  cv(cmp);
  overrides(cmp);
  cmp->add_option("--classifier", s.classifiers, "classifier labels (default: the comparison grid)")->delimiter(',');
  cmp->add_option("--fs", s.feature_sets, "feature selections (default: all)")->delimiter(',');

  auto* pca = app.add_subcommand("pca-study", "accuracy on leading principal components against raw features");
  common(pca);
  input(pca);
  cv(pca);
  overrides(pca);
  pca->add_option("--classifier", s.classifiers, "classifier labels")->delimiter(',');
  pca->add_option("--fs", s.feature_sets, "feature selection (default FS1)")->expected(1);

  auto* cor = app.add_subcommand("correlations", "histogram of pairwise feature correlations");
  common(cor);
  input(cor);
  cor->add_option("--fs", s.feature_sets, "feature selection (default FS1)")->expected(1);

  auto* base = app.add_subcommand("baseline", "curve mapping and cross-sectional proxies next to ML proxies");
  common(base);
  input(base);
  overrides(base);
  base->add_option("--classifier", s.classifiers, "classifier for the ML proxies (default BaggedTree)")->expected(1);
  base->add_option("--fs", s.feature_sets, "rate-free feature selection (default FS4)")->expected(1);

  std::vector<std::string> argv_storage{"cdsproxy"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << nlohmann::json{{"error", "BadArgument"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
  for (auto* sub : app.get_subcommands()) s.command = sub->get_name();

  try {
    const auto outputs = execute(s, out);
    for (const auto& p : write_outputs(s.output_dir, outputs)) out << "wrote " << p.string() << "\n";
  } catch (const Error& e) {
    err << error_json(e).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << nlohmann::json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cdsproxy::cli
