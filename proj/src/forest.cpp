#include "blindspot/forest.hpp"

#include <algorithm>
#include <cmath>

#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

double TrainingSet::blind_fraction() const {
  if (items.empty()) throw NumericError("training set is empty");
  std::int64_t ones = 0;
  for (const auto& it : items) ones += it.label;
  return static_cast<double>(ones) / static_cast<double>(items.size());
}

bool TrainingSet::single_class() const {
  if (items.empty()) throw NumericError("training set is empty");
  const int first = items.front().label;
  for (const auto& it : items)
    if (it.label != first) return false;
  return true;
}

void ForestParams::validate(int n_features) const {
  if (n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
  if (max_depth < -1 || max_depth == 0) throw ConfigError("forest: max_depth must be -1 or >= 1");
  if (min_leaf < 1) throw ConfigError("forest: min_leaf must be >= 1");
  if (mtry < 0 || mtry > n_features) throw ConfigError("forest: mtry must be in [0, n_features]");
}

double Tree::predict(const StateVec& x) const {
  std::int32_t i = 0;
  for (;;) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(i)];
    if (nd.feature < 0) return nd.p1;
    i = (x[nd.feature] <= nd.threshold) ? nd.left : nd.right;
  }
}

double ForestClassifier::predict_proba(const StateVec& x) const {
  if (x.size() != n_features)
    throw DomainError("forest: feature count mismatch (expected " + std::to_string(n_features) +
                      ", got " + std::to_string(x.size()) + ")");
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

OversampleResult oversample(const TrainingSet& ts, std::uint64_t seed) {
  OversampleResult res;
  res.set = ts;
  if (ts.single_class()) {
    res.degenerate = true;
    return res;
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < ts.items.size(); ++i)
    by_class[ts.items[i].label].push_back(i);
  const int minority = by_class[0].size() < by_class[1].size() ? 0 : 1;
  const std::size_t deficit = by_class[1 - minority].size() - by_class[minority].size();

  Rng rng(derive_seed(seed, "oversample"));
  const auto& pool = by_class[minority];
  for (std::size_t k = 0; k < deficit; ++k)
    res.set.items.push_back(ts.items[pool[rng.uniform_int(pool.size())]]);
  return res;
}

namespace {

struct TreeBuilder {
  const TrainingSet& ts;
  const ForestParams& params;
  Rng& rng;
  Tree& tree;
  std::vector<int> feature_order;  // scratch for per-node subset sampling
  std::vector<double> hist_w0, hist_w1;  // per-value class weights
  std::vector<int> hist_cnt;

  TreeBuilder(const TrainingSet& ts_, const ForestParams& p_, Rng& rng_, Tree& tree_)
      : ts(ts_), params(p_), rng(rng_), tree(tree_) {
    feature_order.resize(static_cast<std::size_t>(ts.n_features()));
    for (int i = 0; i < ts.n_features(); ++i) feature_order[static_cast<std::size_t>(i)] = i;
  }

  std::int32_t make_leaf(double w1, double w_total) {
    TreeNode nd;
    nd.p1 = w_total > 0.0 ? w1 / w_total : 0.0;
    tree.nodes.push_back(nd);
    return static_cast<std::int32_t>(tree.nodes.size() - 1);
  }

  // indices: bootstrap sample rows of this node (with multiplicity).
  std::int32_t build(std::vector<std::int32_t>& indices, int depth) {
    double w0 = 0.0, w1 = 0.0;
    for (std::int32_t idx : indices) {
      const auto& it = ts.items[static_cast<std::size_t>(idx)];
      (it.label == 1 ? w1 : w0) += it.weight;
    }
    const double w_total = w0 + w1;
    const auto n = static_cast<std::int64_t>(indices.size());

    const bool depth_capped = params.max_depth >= 0 && depth >= params.max_depth;
    if (depth_capped || w0 == 0.0 || w1 == 0.0 || n < 2 * params.min_leaf)
      return make_leaf(w1, w_total);

    // Sample the feature try order for this node (Fisher-Yates; when mtry
    // covers all features, keep natural order and skip RNG draws). Features
    // are inspected in this order until at least mtry non-constant ones have
    // been scanned and a valid split exists; constant features never count,
    // so a node only becomes a leaf when no feature at all can split it.
    const int n_feat = ts.n_features();
    const int mtry = (params.mtry == 0 || params.mtry >= n_feat) ? n_feat : params.mtry;
    if (mtry < n_feat) {
      for (int i = 0; i < n_feat - 1; ++i) {
        const auto j =
            i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_feat - i)));
        std::swap(feature_order[static_cast<std::size_t>(i)],
                  feature_order[static_cast<std::size_t>(j)]);
      }
    }

    int best_feat = -1, best_thr = 0;
    double best_score = 0.0;
    bool have_best = false;
    int inspected = 0;

    for (int fi = 0; fi < n_feat; ++fi) {
      if (inspected >= mtry && have_best) break;
      const int f = feature_order[static_cast<std::size_t>(fi)];
      int vmin = ts.items[static_cast<std::size_t>(indices[0])].x[f];
      int vmax = vmin;
      for (std::int32_t idx : indices) {
        const int v = ts.items[static_cast<std::size_t>(idx)].x[f];
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
      if (vmin == vmax) continue;
      ++inspected;
      const auto range = static_cast<std::size_t>(vmax - vmin + 1);
      hist_w0.assign(range, 0.0);
      hist_w1.assign(range, 0.0);
      hist_cnt.assign(range, 0);
      for (std::int32_t idx : indices) {
        const auto& it = ts.items[static_cast<std::size_t>(idx)];
        const auto bin = static_cast<std::size_t>(it.x[f] - vmin);
        (it.label == 1 ? hist_w1[bin] : hist_w0[bin]) += it.weight;
        ++hist_cnt[bin];
      }
      // Scan thresholds between consecutive values. Gini part of a child:
      // w_child - (w0^2 + w1^2) / w_child, summed over children.
      double lw0 = 0.0, lw1 = 0.0;
      std::int64_t lcnt = 0;
      for (int v = vmin; v < vmax; ++v) {
        const auto bin = static_cast<std::size_t>(v - vmin);
        lw0 += hist_w0[bin];
        lw1 += hist_w1[bin];
        lcnt += hist_cnt[bin];
        if (lcnt < params.min_leaf || n - lcnt < params.min_leaf) continue;
        const double lw = lw0 + lw1;
        const double rw0 = w0 - lw0, rw1 = w1 - lw1;
        const double rw = rw0 + rw1;
        if (lw <= 0.0 || rw <= 0.0) continue;
        const double score =
            (lw - (lw0 * lw0 + lw1 * lw1) / lw) + (rw - (rw0 * rw0 + rw1 * rw1) / rw);
        if (!have_best || score < best_score) {
          have_best = true;
          best_score = score;
          best_feat = f;
          best_thr = v;
        }
      }
    }

    if (!have_best) return make_leaf(w1, w_total);

    std::vector<std::int32_t> left, right;
    left.reserve(indices.size());
    right.reserve(indices.size());
    for (std::int32_t idx : indices) {
      if (ts.items[static_cast<std::size_t>(idx)].x[best_feat] <= best_thr)
        left.push_back(idx);
      else
        right.push_back(idx);
    }
    indices.clear();
    indices.shrink_to_fit();

    const std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{static_cast<std::int16_t>(best_feat),
                                  static_cast<std::int16_t>(best_thr), -1, -1, 0.0});
    const std::int32_t l = build(left, depth + 1);
    const std::int32_t r = build(right, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_id)].left = l;
    tree.nodes[static_cast<std::size_t>(node_id)].right = r;
    return node_id;
  }
};

}  // namespace

ForestClassifier train_forest(const TrainingSet& ts, const ForestParams& params,
                              std::uint64_t seed) {
  if (ts.items.empty()) throw NumericError("train_forest: empty training set");
  params.validate(ts.n_features());
  for (const auto& it : ts.items) {
    if (it.weight <= 0.0) throw NumericError("train_forest: instance weights must be positive");
    if (it.x.size() != ts.n_features())
      throw DomainError("train_forest: instance feature count mismatch");
    if (it.label != 0 && it.label != 1) throw DomainError("train_forest: labels must be 0/1");
  }

  ForestClassifier fc;
  fc.params = params;
  fc.seed = seed;
  fc.n_features = ts.n_features();
  fc.trees.resize(static_cast<std::size_t>(params.n_trees));

  const std::size_t n = ts.items.size();
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, "tree", static_cast<std::uint64_t>(t)));
    std::vector<std::int32_t> sample(n);
    for (std::size_t i = 0; i < n; ++i)
      sample[i] = static_cast<std::int32_t>(rng.uniform_int(n));
    Tree& tree = fc.trees[static_cast<std::size_t>(t)];
    TreeBuilder builder(ts, params, rng, tree);
    builder.build(sample, 0);
  }
  return fc;
}

double f1_score(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw NumericError("f1: size mismatch");
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == 1 && truth[i] == 1) ++tp;
    else if (predicted[i] == 1) ++fp;
    else if (truth[i] == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

SearchSpace SearchSpace::from_config(const KVConfig& cfg) {
  SearchSpace s;
  auto to_int_vec = [](const std::vector<long long>& v) {
    std::vector<int> out;
    out.reserve(v.size());
    for (long long x : v) out.push_back(static_cast<int>(x));
    return out;
  };
  if (cfg.has("model.search_trees")) s.n_trees = to_int_vec(cfg.get_int_list("model.search_trees"));
  if (cfg.has("model.search_depth")) s.max_depth = to_int_vec(cfg.get_int_list("model.search_depth"));
  if (cfg.has("model.search_min_leaf"))
    s.min_leaf = to_int_vec(cfg.get_int_list("model.search_min_leaf"));
  if (cfg.has("model.search_mtry")) s.mtry = to_int_vec(cfg.get_int_list("model.search_mtry"));
  s.n_trials = static_cast<int>(cfg.get_int("model.n_trials", s.n_trials));
  s.validate();
  return s;
}

void SearchSpace::validate() const {
  if (n_trees.empty() || max_depth.empty() || min_leaf.empty())
    throw ConfigError("model search space: dimension lists must be non-empty");
  if (n_trials < 1) throw ConfigError("model.n_trials must be >= 1");
  for (int v : n_trees)
    if (v < 1) throw ConfigError("model.search_trees entries must be >= 1");
  for (int v : max_depth)
    if (v < -1 || v == 0) throw ConfigError("model.search_depth entries must be -1 or >= 1");
  for (int v : min_leaf)
    if (v < 1) throw ConfigError("model.search_min_leaf entries must be >= 1");
}

namespace {

// Stratified k-fold assignment: per class, shuffle then deal round-robin.
std::vector<int> stratified_folds(const TrainingSet& ts, int k, std::uint64_t seed) {
  std::vector<int> fold(ts.items.size(), 0);
  Rng rng(derive_seed(seed, "folds"));
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ts.items.size(); ++i)
      if (ts.items[i].label == cls) idx.push_back(i);
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j)
      fold[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return fold;
}

}  // namespace

SearchResult hyperparameter_search(const TrainingSet& ts, const SearchSpace& space,
                                   std::uint64_t seed) {
  space.validate();
  if (ts.items.empty()) throw NumericError("hyperparameter search: empty training set");
  const int n_feat = ts.n_features();
  std::vector<int> mtry_choices = space.mtry;
  if (mtry_choices.empty())
    for (int m = 1; m <= n_feat; ++m) mtry_choices.push_back(m);
  for (int m : mtry_choices)
    if (m < 1 || m > n_feat)
      throw ConfigError("model.search_mtry entries must be in [1, n_features]");

  constexpr int kFolds = 3;
  const std::vector<int> fold = stratified_folds(ts, kFolds, seed);

  Rng trial_rng(derive_seed(seed, "trials"));
  SearchResult result;
  for (int trial = 0; trial < space.n_trials; ++trial) {
    ForestParams p;
    p.n_trees = space.n_trees[trial_rng.uniform_int(space.n_trees.size())];
    p.max_depth = space.max_depth[trial_rng.uniform_int(space.max_depth.size())];
    p.min_leaf = space.min_leaf[trial_rng.uniform_int(space.min_leaf.size())];
    p.mtry = mtry_choices[trial_rng.uniform_int(mtry_choices.size())];

    double f1_sum = 0.0;
    for (int v = 0; v < kFolds; ++v) {
      TrainingSet train_part, valid_part;
      train_part.feature_names = ts.feature_names;
      valid_part.feature_names = ts.feature_names;
      for (std::size_t i = 0; i < ts.items.size(); ++i)
        (fold[i] == v ? valid_part : train_part).items.push_back(ts.items[i]);
      if (train_part.items.empty() || valid_part.items.empty()) continue;

      const auto os = oversample(
          train_part, derive_seed(seed, "cv-oversample", static_cast<std::uint64_t>(trial),
                                  static_cast<std::uint64_t>(v)));
      const ForestClassifier fc =
          train_forest(os.set, p,
                       derive_seed(seed, "cv-fit", static_cast<std::uint64_t>(trial),
                                   static_cast<std::uint64_t>(v)));
      std::vector<int> truth, pred;
      truth.reserve(valid_part.items.size());
      pred.reserve(valid_part.items.size());
      for (const auto& it : valid_part.items) {
        truth.push_back(it.label);
        pred.push_back(fc.predict_proba(it.x) >= 0.5 ? 1 : 0);
      }
      f1_sum += f1_score(truth, pred);
    }
    const double mean_f1 = f1_sum / static_cast<double>(kFolds);
    result.trials.push_back({p, mean_f1});
    if (trial == 0 || mean_f1 > result.best_f1) {
      result.best = p;
      result.best_f1 = mean_f1;
    }
  }
  return result;
}

}  // namespace blindspot
