#pragma once

// Binary classification trees (Gini, entropy, twoing) and bagged trees.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cdsproxy/core.hpp"
#include "cdsproxy/random.hpp"

namespace cdsproxy {

enum class SplitCriterion { Gini, Entropy, Twoing };

// Scores within this distance of the best are treated as ties.
inline constexpr double kSplitTieTolerance = 1e-12;

/// Gini 1 - sum p_j^2 or entropy -sum p_j log p_j.
inline double impurity(SplitCriterion measure, std::span<const double> p) {
  if (measure == SplitCriterion::Twoing) fail(ErrorCode::BadArgument, "twoing has no node impurity");
  double total = 0.0;
  for (double v : p) {
    if (v < 0.0) fail(ErrorCode::NotAProbabilityVector, "negative proportion");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) fail(ErrorCode::NotAProbabilityVector, "proportions do not sum to 1");
  double g = measure == SplitCriterion::Gini ? 1.0 : 0.0;
  for (double v : p) {
    if (measure == SplitCriterion::Gini) g -= v * v;
    else if (v > 0.0) g -= v * std::log(v);
  }
  return g;
}

namespace detail {

inline double impurity_of_counts(SplitCriterion measure, const std::vector<std::size_t>& counts, std::size_t total) {
  const double n = static_cast<double>(total);
  double g = measure == SplitCriterion::Gini ? 1.0 : 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    g -= measure == SplitCriterion::Gini ? p * p : p * std::log(p);
  }
  return g;
}

}  // namespace detail

/// Purity gain G(parent) - (pL G(L) + pR G(R)), or for twoing
/// pL pR (sum_j |pi_jR - pi_jL|)^2, from per-class counts.
inline double split_score(SplitCriterion criterion, const std::vector<std::size_t>& left,
                          const std::vector<std::size_t>& right) {
  std::size_t nl = 0, nr = 0;
  for (auto c : left) nl += c;
  for (auto c : right) nr += c;
  const double n = static_cast<double>(nl + nr);
  const double pl = static_cast<double>(nl) / n, pr = static_cast<double>(nr) / n;
  if (criterion == SplitCriterion::Twoing) {
    double s = 0.0;
    for (std::size_t j = 0; j < left.size(); ++j) {
      s += std::abs(static_cast<double>(right[j]) / static_cast<double>(nr) -
                    static_cast<double>(left[j]) / static_cast<double>(nl));
    }
    return pl * pr * s * s;
  }
  std::vector<std::size_t> parent(left.size());
  for (std::size_t j = 0; j < left.size(); ++j) parent[j] = left[j] + right[j];
  return detail::impurity_of_counts(criterion, parent, nl + nr) -
         (pl * detail::impurity_of_counts(criterion, left, nl) + pr * detail::impurity_of_counts(criterion, right, nr));
}

// left = {x_feature < threshold}
struct SplitRule {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;
};

/// Exhaustive scan over features and midpoints between consecutive distinct
/// values; ties go to the lower feature, then the lower threshold.
inline SplitRule best_split(const SampleMatrix& x, const std::vector<std::size_t>& y, std::size_t classes,
                            std::span<const std::size_t> rows, SplitCriterion criterion) {
  if (rows.size() < 2) fail(ErrorCode::PureNode, "node has fewer than 2 samples");
  {
    const auto first = y[rows[0]];
    if (std::all_of(rows.begin(), rows.end(), [&](auto r) { return y[r] == first; })) {
      fail(ErrorCode::PureNode, "node is pure");
    }
  }
  std::optional<SplitRule> best;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::vector<std::size_t> total(classes, 0);
  for (auto r : rows) ++total[y[r]];
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f); });
    std::vector<std::size_t> left(classes, 0), right = total;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      --right[y[order[i]]];
      ++left[y[order[i]]];
      const double lo = x(static_cast<Eigen::Index>(order[i]), f);
      const double hi = x(static_cast<Eigen::Index>(order[i + 1]), f);
      if (!(lo < hi)) continue;
      const double score = split_score(criterion, left, right);
      if (!best || score > best->score + kSplitTieTolerance) {
        best = SplitRule{static_cast<std::size_t>(f), lo + (hi - lo) / 2.0, score};
      }
    }
  }
  if (!best) fail(ErrorCode::NoValidSplit, "all feature vectors in the node are identical");
  return *best;
}

struct TreeOptions {
  SplitCriterion criterion = SplitCriterion::Gini;
  std::size_t max_splits = 20;
};

class DecisionTree final : public Classifier {
 public:
  struct Node {
    bool leaf = true;
    SplitRule rule;
    std::size_t left = 0, right = 0;
    std::size_t label = 0;
    std::size_t samples = 0;
  };

  DecisionTree(const Dataset& train, const TreeOptions& options) : options_(options) {
    if (train.size() == 0) fail(ErrorCode::EmptyTrainingSet, "tree needs training samples");
    validate_dataset(train);
    if (options.max_splits < 1) fail(ErrorCode::BadArgument, "split budget must be at least 1");
    classes_ = train.class_count();
    dimension_ = train.dimension();
    grow(train.x, train.y);
  }

  DecisionTree(const SampleMatrix& x, const std::vector<std::size_t>& y, std::size_t classes,
               const TreeOptions& options)
      : options_(options), classes_(classes), dimension_(x.cols()) {
    if (y.empty()) fail(ErrorCode::EmptyTrainingSet, "tree needs training samples");
    grow(x, y);
  }

  std::size_t leaf_index(const VectorRef& x) const {
    require_dimension(dimension_, x.size(), "tree_classify");
    std::size_t at = 0;
    while (!nodes_[at].leaf) {
      const auto& r = nodes_[at].rule;
      at = x(static_cast<Eigen::Index>(r.feature)) < r.threshold ? nodes_[at].left : nodes_[at].right;
    }
    return at;
  }

  std::size_t classify(const VectorRef& x) const override { return nodes_[leaf_index(x)].label; }

  // One-hot on the leaf label.
  Vector scores(const VectorRef& x) const override {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(classes_));
    out(static_cast<Eigen::Index>(classify(x))) = 1.0;
    return out;
  }
  Eigen::Index dimension() const override { return dimension_; }
  std::size_t class_count() const override { return classes_; }
  std::string family() const override { return "DT"; }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t split_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return !n.leaf; }));
  }

  /// One line per node, numbered from 1 in breadth-first order:
  ///   1  if pd_5y<0.0123 then node 2 elseif pd_5y>=0.0123 then node 3 else A
  std::string rule_table(const std::vector<std::string>& feature_names, const std::vector<std::string>& class_names) const {
    std::ostringstream out;
    out.precision(6);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      const auto& label = class_names.at(n.label);
      out << (i + 1) << "  ";
      if (n.leaf) {
        out << "class = " << label << "\n";
        continue;
      }
      const auto& name = feature_names.at(n.rule.feature);
      out << "if " << name << "<" << n.rule.threshold << " then node " << (n.left + 1) << " elseif " << name
          << ">=" << n.rule.threshold << " then node " << (n.right + 1) << " else " << label << "\n";
    }
    return out.str();
  }

 private:
  static std::size_t majority(const std::vector<std::size_t>& y, std::span<const std::size_t> rows, std::size_t classes) {
    std::vector<std::size_t> counts(classes, 0);
    for (auto r : rows) ++counts[y[r]];
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }

  // Breadth-first growth under the split budget.
  void grow(const SampleMatrix& x, const std::vector<std::size_t>& y) {
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), 0);
    std::deque<std::pair<std::size_t, std::vector<std::size_t>>> queue;
    nodes_.push_back({true, {}, 0, 0, majority(y, all, classes_), all.size()});
    queue.emplace_back(0, std::move(all));
    std::size_t splits = 0;
    while (!queue.empty()) {
      auto [id, rows] = std::move(queue.front());
      queue.pop_front();
      if (splits >= options_.max_splits || rows.size() < 2) continue;
      SplitRule rule;
      try {
        rule = best_split(x, y, classes_, rows, options_.criterion);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::PureNode || e.code() == ErrorCode::NoValidSplit) continue;
        throw;
      }
      if (options_.criterion != SplitCriterion::Twoing && rule.score < -1e-12) {
        fail(ErrorCode::FitFailure, "negative purity gain");
      }
      std::vector<std::size_t> left, right;
      for (auto r : rows) (x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(rule.feature)) < rule.threshold ? left : right).push_back(r);
      ++splits;
      const std::size_t l = nodes_.size();
      nodes_.push_back({true, {}, 0, 0, majority(y, left, classes_), left.size()});
      nodes_.push_back({true, {}, 0, 0, majority(y, right, classes_), right.size()});
      nodes_[id].leaf = false;
      nodes_[id].rule = rule;
      nodes_[id].left = l;
      nodes_[id].right = l + 1;
      queue.emplace_back(l, std::move(left));
      queue.emplace_back(l + 1, std::move(right));
    }
  }

  TreeOptions options_;
  std::size_t classes_ = 0;
  Eigen::Index dimension_ = 0;
  std::vector<Node> nodes_;
};

inline std::unique_ptr<DecisionTree> fit_tree(const Dataset& train, const TreeOptions& options = {}) {
  return std::make_unique<DecisionTree>(train, options);
}

// ---------------------------------------------------------------------------
// Bagged trees

struct BaggingOptions {
  TreeOptions tree;
  std::size_t cycles = 30;
  std::uint64_t seed = 0;
};

/// Row indices of bootstrap draw b: n uniform draws with replacement.
inline std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed, std::size_t b) {
  auto rng = Rng::stream(seed, b);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.below(n);
  return rows;
}

class BaggedTrees final : public Classifier {
 public:
  BaggedTrees(const Dataset& train, const BaggingOptions& options) {
    validate_dataset(train);
    if (train.size() == 0) fail(ErrorCode::EmptyTrainingSet, "bagging needs training samples");
    if (options.cycles < 1) fail(ErrorCode::BadArgument, "at least one learning cycle required");
    classes_ = train.class_count();
    dimension_ = train.dimension();
    for (std::size_t b = 0; b < options.cycles; ++b) {
      const auto rows = bootstrap_sample(train.size(), options.seed, b);
      const auto draw = train.subset(rows);
      trees_.emplace_back(draw.x, draw.y, classes_, options.tree);
    }
  }

  // Vote counts per class.
  Vector scores(const VectorRef& x) const override {
    require_dimension(dimension_, x.size(), "bagged_scores");
    Vector votes = Vector::Zero(static_cast<Eigen::Index>(classes_));
    for (const auto& t : trees_) votes(static_cast<Eigen::Index>(t.classify(x))) += 1.0;
    return votes;
  }
  Eigen::Index dimension() const override { return dimension_; }
  std::size_t class_count() const override { return classes_; }
  std::string family() const override { return "BaggedTree"; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::size_t classes_ = 0;
  Eigen::Index dimension_ = 0;
  std::vector<DecisionTree> trees_;
};

inline std::unique_ptr<BaggedTrees> fit_bagged(const Dataset& train, const BaggingOptions& options = {}) {
  return std::make_unique<BaggedTrees>(train, options);
}

}  // namespace cdsproxy
