#include "blindspot/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

EvalSplit make_split(std::int32_t n_sim_states, const FeedbackDataset& ds) {
  EvalSplit split;
  split.seen = ds.seen_sim_ids();
  if (!split.seen.empty() && split.seen.back() >= n_sim_states)
    throw DomainError("split: labeled sim id out of range");
  std::vector<char> is_seen(static_cast<std::size_t>(n_sim_states), 0);
  for (std::int32_t id : split.seen) is_seen[static_cast<std::size_t>(id)] = 1;
  for (std::int32_t id = 0; id < n_sim_states; ++id)
    if (!is_seen[static_cast<std::size_t>(id)]) split.unseen.push_back(id);
  if (split.seen.empty()) throw DomainError("split: no labeled states (seen part empty)");
  if (split.unseen.empty()) throw DomainError("split: every state labeled (unseen part empty)");
  return split;
}

std::vector<double> visitation_weights(Environment& target, const SimIndex& sim_index,
                                       const Policy& pi_sim, long long episodes,
                                       std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("visitation weights need episodes >= 1");
  std::vector<double> w(static_cast<std::size_t>(sim_index.size()), 1.0);  // add-one smoothing
  target.reseed(derive_seed(seed, "visit"));
  for (long long ep = 0; ep < episodes; ++ep) {
    RealState s = target.reset();
    bool done = target.is_terminal(s);
    while (!done) {
      const std::int32_t sid = sim_index.id_of(target.sim_observe(s));
      w[static_cast<std::size_t>(sid)] += 1.0;
      const StepResult res = target.step(s, pi_sim.at(sid));
      s = res.next;
      done = res.done;
    }
  }
  return w;
}

double weighted_f1(const BlindSpotModel& model, const BlindSpotTruth& truth,
                   const SimIndex& sim_index, const std::vector<std::int32_t>& ids,
                   const std::vector<double>& weights) {
  if (ids.empty()) throw DomainError("weighted f1: empty id set");
  if (static_cast<std::int32_t>(weights.size()) != sim_index.size() ||
      static_cast<std::int32_t>(truth.blind.size()) != sim_index.size())
    throw DomainError("weighted f1: weight/truth vectors must cover the observed space");
  double tp = 0.0, fp = 0.0, fn = 0.0;
  for (std::int32_t id : ids) {
    const bool pred = model.predict(sim_index.state(id).v).blind;
    const bool is_blind = truth.blind[static_cast<std::size_t>(id)] != 0;
    const double w = weights[static_cast<std::size_t>(id)];
    if (pred && is_blind) tp += w;
    else if (pred) fp += w;
    else if (is_blind) fn += w;
  }
  if (tp <= 0.0) return 0.0;
  const double precision = tp / (tp + fp);
  const double recall = tp / (tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

OILResult oil_run(Environment& target, const Oracle& oracle, const BlindSpotModel* model,
                  OILCondition condition, long long episodes, std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("oracle-in-the-loop runs need episodes >= 1");
  if (condition == OILCondition::kModel && model == nullptr)
    throw DomainError("oracle-in-the-loop: model condition requires a model");
  if (target.name() != oracle.target().name())
    throw DomainError("oracle-in-the-loop requires a target environment matching the oracle");

  const SimIndex& sim_index = oracle.sim_index();
  const Policy& pi_sim = oracle.pi_sim();

  target.reseed(derive_seed(seed, "oil"));
  OILResult r;
  r.episodes = episodes;
  double sum = 0.0, sum_sq = 0.0;
  for (long long ep = 0; ep < episodes; ++ep) {
    RealState s = target.reset();
    bool done = target.is_terminal(s);
    double total = 0.0;
    while (!done) {
      const std::int32_t sid = sim_index.id_of(target.sim_observe(s));
      bool query = false;
      switch (condition) {
        case OILCondition::kAlwaysQuery: query = true; break;
        case OILCondition::kNeverQuery: query = false; break;
        case OILCondition::kModel:
          query = model->predict(sim_index.state(sid).v).blind;
          break;
      }
      const Action a = query ? oracle.policy_action(s) : pi_sim.at(sid);
      if (query) ++r.queries;
      ++r.steps;
      const StepResult res = target.step(s, a);
      total += res.reward;
      s = res.next;
      done = res.done;
    }
    sum += total;
    sum_sq += total * total;
  }
  r.mean_reward = sum / static_cast<double>(episodes);
  const double var =
      std::max(0.0, sum_sq / static_cast<double>(episodes) - r.mean_reward * r.mean_reward);
  r.std_reward = std::sqrt(var);
  r.query_rate = r.steps > 0 ? static_cast<double>(r.queries) / static_cast<double>(r.steps) : 0.0;
  return r;
}

void export_bias_heatmap_csv(const FeedbackDataset& ds, const Environment& env,
                             const SimIndex& sim_index, const std::string& field_a,
                             const std::string& field_b, const std::string& path) {
  const auto& fields = env.sim_fields();
  int ia = -1, ib = -1;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] == field_a) ia = static_cast<int>(i);
    if (fields[i] == field_b) ib = static_cast<int>(i);
  }
  if (ia < 0 || ib < 0)
    throw ConfigError("bias heatmap: unknown observed-state field '" +
                      (ia < 0 ? field_a : field_b) + "'");

  std::map<std::pair<int, int>, std::pair<std::int64_t, std::int64_t>> counts;
  for (const auto& e : ds.events) {
    const StateVec& v = sim_index.state(e.sim_id).v;
    auto& cell = counts[{v[ia], v[ib]}];
    if (e.label == 1)
      ++cell.second;
    else
      ++cell.first;
  }

  CsvWriter w({field_a, field_b, "n_safe", "n_blind"});
  for (const auto& [key, cell] : counts)
    w.add_row({std::to_string(key.first), std::to_string(key.second),
               std::to_string(cell.first), std::to_string(cell.second)});
  w.write(path);
}

}  // namespace blindspot
