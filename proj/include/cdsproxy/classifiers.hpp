#pragma once

// Named classifier configurations and the fit dispatch used by the
// evaluation harness and the command-line tool.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdsproxy/bayes.hpp"
#include "cdsproxy/core.hpp"
#include "cdsproxy/geometric.hpp"
#include "cdsproxy/parametric.hpp"
#include "cdsproxy/tree.hpp"

namespace cdsproxy {

enum class Family { DA, NB, KNN, LR, DT, SVM, NN, Bagged };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::DA: return "DA";
    case Family::NB: return "NB";
    case Family::KNN: return "kNN";
    case Family::LR: return "LR";
    case Family::DT: return "DT";
    case Family::SVM: return "SVM";
    case Family::NN: return "NN";
    case Family::Bagged: return "BaggedTree";
  }
  return "?";
}

// Command-line overrides of the per-family defaults; unset means default.
struct Overrides {
  std::optional<double> bandwidth;                    // NB b
  std::optional<std::size_t> neighbours;              // kNN k
  std::optional<std::size_t> max_splits;              // DT / bagged z
  std::optional<std::size_t> cycles;                  // bagged B
  std::optional<double> cost;                         // SVM C
  std::optional<KernelKind> kernel;                   // SVM kernel
  std::optional<int> degree;                          // SVM polynomial p
  std::optional<Activation> activation;               // NN f
  std::optional<Eigen::Index> hidden;                 // NN h
  std::optional<std::size_t> epochs;                  // NN epoch cap
  std::optional<SvmStrategy> strategy;                // SVM multiclass scheme
};

struct ClassifierSpec {
  std::string label;
  Family family;
  // Variant parameters; only the ones relevant to the family are read.
  CovarianceMode covariance = CovarianceMode::Full;
  bool quadratic = false;
  NbDensity density = NbDensity::Kernel;
  KdeKernel kde = KdeKernel::Normal;
  Metric metric = Metric::Euclidean;
  SplitCriterion criterion = SplitCriterion::Gini;
  KernelKind kernel = KernelKind::Linear;
  Activation activation = Activation::TanSigmoid;
};

/// Every configuration the registry knows, in display order.
inline const std::vector<ClassifierSpec>& classifier_catalog() {
  static const std::vector<ClassifierSpec> catalog = [] {
    std::vector<ClassifierSpec> c;
    auto add = [&](std::string label, Family f, auto&& tweak) {
      ClassifierSpec s{std::move(label), f};
      tweak(s);
      c.push_back(std::move(s));
    };
    add("LDA-FullCov", Family::DA, [](auto&) {});
    add("LDA-Diagonal", Family::DA, [](auto& s) { s.covariance = CovarianceMode::Diagonal; });
    add("QDA-FullCov", Family::DA, [](auto& s) { s.quadratic = true; });
    add("QDA-Diagonal", Family::DA, [](auto& s) {
      s.quadratic = true;
      s.covariance = CovarianceMode::Diagonal;
    });
    add("NB-Normal", Family::NB, [](auto&) {});
    add("NB-Triangular", Family::NB, [](auto& s) { s.kde = KdeKernel::Triangular; });
    add("NB-Epanechnikov", Family::NB, [](auto& s) { s.kde = KdeKernel::Epanechnikov; });
    add("NB-Gaussian", Family::NB, [](auto& s) { s.density = NbDensity::Gaussian; });
    add("kNN-Euclidean", Family::KNN, [](auto&) {});
    add("kNN-CityBlock", Family::KNN, [](auto& s) { s.metric = Metric::CityBlock; });
    add("kNN-Mahalanobis", Family::KNN, [](auto& s) { s.metric = Metric::Mahalanobis; });
    add("LR", Family::LR, [](auto&) {});
    add("DT-Gini", Family::DT, [](auto&) {});
    add("DT-Entropy", Family::DT, [](auto& s) { s.criterion = SplitCriterion::Entropy; });
    add("DT-Twoing", Family::DT, [](auto& s) { s.criterion = SplitCriterion::Twoing; });
    add("SVM-Linear", Family::SVM, [](auto&) {});
    add("SVM-Gaussian", Family::SVM, [](auto& s) { s.kernel = KernelKind::Gaussian; });
    add("SVM-Poly", Family::SVM, [](auto& s) { s.kernel = KernelKind::Polynomial; });
    add("NN-Tangent", Family::NN, [](auto&) {});
    add("NN-Linear", Family::NN, [](auto& s) { s.activation = Activation::Linear; });
    add("NN-Elliot", Family::NN, [](auto& s) { s.activation = Activation::ElliotSigmoid; });
    add("BaggedTree", Family::Bagged, [](auto&) {});
    add("BaggedTree-Entropy", Family::Bagged, [](auto& s) { s.criterion = SplitCriterion::Entropy; });
    add("BaggedTree-Twoing", Family::Bagged, [](auto& s) { s.criterion = SplitCriterion::Twoing; });
    return c;
  }();
  return catalog;
}

/// Labels of the cross-classifier comparison grid: one bagged variant and the
/// kernel-density NB variants only.
inline std::vector<std::string> comparison_grid() {
  std::vector<std::string> out;
  for (const auto& s : classifier_catalog()) {
    if (s.label == "NB-Gaussian" || s.label == "BaggedTree-Entropy" || s.label == "BaggedTree-Twoing") continue;
    out.push_back(s.label);
  }
  return out;
}

inline const ClassifierSpec& find_classifier(std::string_view label) {
  const auto& catalog = classifier_catalog();
  const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& s) { return s.label == label; });
  if (it == catalog.end()) fail(ErrorCode::BadArgument, "unknown classifier '" + std::string(label) + "'");
  return *it;
}

/// Whether the family is fitted on training-fold standardized features.
inline bool uses_standardization(const ClassifierSpec& spec) {
  switch (spec.family) {
    case Family::KNN:
      return spec.metric != Metric::Mahalanobis;
    case Family::NB:
    case Family::LR:
    case Family::SVM:
    case Family::NN:
      return true;
    default:
      return false;
  }
}

/// Fits one configuration. `seed` drives the NN initialization and the
/// bootstrap draws.
inline ClassifierPtr fit_classifier(const ClassifierSpec& spec, const Dataset& train, const Overrides& o = {},
                                    std::uint64_t seed = 0) {
  auto fit_inner = [&](const Dataset& data) -> ClassifierPtr {
    switch (spec.family) {
      case Family::DA: {
        DiscriminantOptions opt{spec.covariance};
        if (spec.quadratic) return fit_qda(data, opt);
        return fit_lda(data, opt);
      }
      case Family::NB: {
        NbOptions opt;
        opt.density = spec.density;
        opt.kernel = spec.kde;
        opt.bandwidth = o.bandwidth.value_or(opt.bandwidth);
        return fit_nb(data, opt);
      }
      case Family::KNN:
        return fit_knn(data, {o.neighbours.value_or(kDefaultNeighbours), spec.metric});
      case Family::LR:
        return fit_logistic(data);
      case Family::DT: {
        TreeOptions opt{spec.criterion};
        opt.max_splits = o.max_splits.value_or(opt.max_splits);
        return fit_tree(data, opt);
      }
      case Family::SVM: {
        SvmMulticlassOptions opt;
        opt.binary.kernel.kind = o.kernel.value_or(spec.kernel);
        opt.binary.kernel.degree = o.degree.value_or(opt.binary.kernel.degree);
        opt.binary.cost = o.cost.value_or(opt.binary.cost);
        opt.strategy = o.strategy.value_or(opt.strategy);
        return fit_svm(data, opt);
      }
      case Family::NN: {
        NnOptions opt;
        opt.activation = o.activation.value_or(spec.activation);
        opt.hidden = o.hidden.value_or(opt.hidden);
        opt.epochs = o.epochs.value_or(opt.epochs);
        opt.seed = seed;
        return fit_neural_net(data, opt);
      }
      case Family::Bagged: {
        BaggingOptions opt;
        opt.tree.criterion = spec.criterion;
        opt.tree.max_splits = o.max_splits.value_or(opt.tree.max_splits);
        opt.cycles = o.cycles.value_or(opt.cycles);
        opt.seed = seed;
        return fit_bagged(data, opt);
      }
    }
    fail(ErrorCode::BadArgument, "unhandled classifier family");
  };
  if (uses_standardization(spec)) return fit_standardized(train, fit_inner);
  return fit_inner(train);
}

inline ClassifierPtr fit_classifier(std::string_view label, const Dataset& train, const Overrides& o = {},
                                    std::uint64_t seed = 0) {
  return fit_classifier(find_classifier(label), train, o, seed);
}

}  // namespace cdsproxy
