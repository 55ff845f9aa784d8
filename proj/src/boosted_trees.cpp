// Gradient-boosted regression trees for squared-error loss.
//
// Trees are grown level by level. Each feature is presorted once per fit;
// one sweep over a feature's sorted order evaluates every candidate split of
// every open node at that level, so a level costs O(n * p).
//
// Split candidates are midpoints between consecutive distinct values inside
// a node. Features are visited in index order and thresholds in ascending
// order, and only a strictly better gain replaces the incumbent, which
// yields the lowest-feature, lowest-threshold tie-break.

#include "sdidml/error.hpp"
#include "sdidml/learners.hpp"
#include "sdidml/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdidml {

double RegressionTree::predict(const double* row, Eigen::Index stride) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = row[n.feature * stride] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

struct NodeStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  int count = 0;
};

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const std::vector<std::vector<int>>& order, int max_depth, int min_leaf)
      : x_(x), order_(order), max_depth_(max_depth), min_leaf_(min_leaf) {}

  // `in_sample[i]` selects the rows used for this tree.
  RegressionTree build(const Eigen::VectorXd& residual, const std::vector<char>& in_sample) {
    const auto n = static_cast<std::size_t>(x_.rows());
    RegressionTree tree;
    tree.nodes.emplace_back();

    // slot[i]: index into `open` of the node containing row i, or -1
    std::vector<int> slot(n, -1);
    std::vector<int> open{0};
    std::vector<NodeStats> stats(1);
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_sample[i]) continue;
      slot[i] = 0;
      accumulate(stats[0], residual(static_cast<Eigen::Index>(i)));
    }

    for (int depth = 0; depth < max_depth_ && !open.empty(); ++depth) {
      const auto best = find_splits(residual, slot, stats);

      std::vector<int> next_open;
      std::vector<NodeStats> next_stats;
      std::vector<int> left_slot(open.size(), -1), right_slot(open.size(), -1);
      for (std::size_t s = 0; s < open.size(); ++s) {
        const int node_id = open[s];
        if (best[s].feature < 0) {
          tree.nodes[static_cast<std::size_t>(node_id)].value = leaf_value(stats[s]);
          continue;
        }
        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best[s].feature;
        node.threshold = best[s].threshold;
        node.left = left_id;
        node.right = left_id + 1;
        left_slot[s] = static_cast<int>(next_open.size());
        next_open.push_back(left_id);
        next_stats.emplace_back();
        right_slot[s] = static_cast<int>(next_open.size());
        next_open.push_back(left_id + 1);
        next_stats.emplace_back();
      }
      for (std::size_t i = 0; i < n; ++i) {
        const int s = slot[i];
        if (s < 0) continue;
        const SplitCandidate& split = best[static_cast<std::size_t>(s)];
        if (split.feature < 0) {
          slot[i] = -1;
          continue;
        }
        const bool go_left = x_(static_cast<Eigen::Index>(i), split.feature) <= split.threshold;
        const int child = go_left ? left_slot[static_cast<std::size_t>(s)] : right_slot[static_cast<std::size_t>(s)];
        slot[i] = child;
        accumulate(next_stats[static_cast<std::size_t>(child)], residual(static_cast<Eigen::Index>(i)));
      }
      open = std::move(next_open);
      stats = std::move(next_stats);
    }
    for (std::size_t s = 0; s < open.size(); ++s)
      tree.nodes[static_cast<std::size_t>(open[s])].value = leaf_value(stats[s]);
    return tree;
  }

 private:
  static void accumulate(NodeStats& s, double r) {
    s.sum += r;
    s.sum_sq += r * r;
    ++s.count;
  }

  static double leaf_value(const NodeStats& s) { return s.count > 0 ? s.sum / s.count : 0.0; }

  std::vector<SplitCandidate> find_splits(const Eigen::VectorXd& residual, const std::vector<int>& slot,
                                          const std::vector<NodeStats>& stats) const {
    const std::size_t m = stats.size();
    std::vector<SplitCandidate> best(m);
    std::vector<double> floor(m);
    for (std::size_t s = 0; s < m; ++s) {
      // ignore gains at the rounding level of the node's sum of squares
      floor[s] = 1e-12 * std::max(stats[s].sum_sq, 1e-300);
    }
    std::vector<NodeStats> left(m);
    std::vector<double> prev(m);
    std::vector<char> seen(m);
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      std::fill(left.begin(), left.end(), NodeStats{});
      std::fill(seen.begin(), seen.end(), 0);
      const auto col = x_.col(j);
      for (int i : order_[static_cast<std::size_t>(j)]) {
        const int s_raw = slot[static_cast<std::size_t>(i)];
        if (s_raw < 0) continue;
        const auto s = static_cast<std::size_t>(s_raw);
        const double v = col(i);
        if (seen[s] && v > prev[s]) {
          const NodeStats& total = stats[s];
          const int n_left = left[s].count;
          const int n_right = total.count - n_left;
          if (n_left >= min_leaf_ && n_right >= min_leaf_) {
            const double sum_right = total.sum - left[s].sum;
            const double gain = left[s].sum * left[s].sum / n_left + sum_right * sum_right / n_right -
                                total.sum * total.sum / total.count;
            if (gain > floor[s] && gain > best[s].gain) {
              double threshold = 0.5 * (prev[s] + v);
              if (!(threshold < v)) threshold = prev[s];
              best[s] = {gain, static_cast<int>(j), threshold};
            }
          }
        }
        accumulate(left[s], residual(i));
        prev[s] = v;
        seen[s] = 1;
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const std::vector<std::vector<int>>& order_;
  int max_depth_;
  int min_leaf_;
};

}  // namespace

FittedModel fit_boosted_trees(const GradientBoostedTreesSpec& spec, const Eigen::MatrixXd& features,
                              const Eigen::VectorXd& targets, std::uint64_t seed) {
  const Eigen::Index n = features.rows();
  const Eigen::Index p = features.cols();

  std::vector<std::vector<int>> order(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    auto& o = order[static_cast<std::size_t>(j)];
    o.resize(static_cast<std::size_t>(n));
    std::iota(o.begin(), o.end(), 0);
    const auto col = features.col(j);
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return col(a) < col(b); });
  }

  TreeEnsemble ensemble;
  ensemble.base_score = targets.mean();
  ensemble.learning_rate = spec.learning_rate;
  ensemble.trees.reserve(static_cast<std::size_t>(spec.n_trees));

  Eigen::VectorXd fitted = Eigen::VectorXd::Constant(n, ensemble.base_score);
  TrainingDiagnostics diag;
  diag.loss_path.push_back((targets - fitted).squaredNorm() / static_cast<double>(n));

  TreeBuilder builder(features, order, spec.max_depth, spec.min_leaf);
  std::vector<char> in_sample(static_cast<std::size_t>(n), 1);
  const auto n_draw = static_cast<std::size_t>(std::max<double>(1.0, std::round(spec.subsample * static_cast<double>(n))));

  for (int stage = 0; stage < spec.n_trees; ++stage) {
    if (n_draw < static_cast<std::size_t>(n)) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(stage)));
      std::vector<std::size_t> rows(static_cast<std::size_t>(n));
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      rng.shuffle(rows);
      std::fill(in_sample.begin(), in_sample.end(), 0);
      for (std::size_t k = 0; k < n_draw; ++k) in_sample[rows[k]] = 1;
    }
    const Eigen::VectorXd residual = targets - fitted;
    RegressionTree tree = builder.build(residual, in_sample);
    for (Eigen::Index i = 0; i < n; ++i)
      fitted(i) += spec.learning_rate * tree.predict(features.data() + i, n);
    ensemble.trees.push_back(std::move(tree));
    diag.loss_path.push_back((targets - fitted).squaredNorm() / static_cast<double>(n));
  }
  diag.iterations = spec.n_trees;
  diag.objective = diag.loss_path.back();
  return FittedModel(spec, p, std::move(ensemble), std::move(diag));
}

}  // namespace sdidml
