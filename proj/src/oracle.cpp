#include "blindspot/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"

namespace blindspot {

OracleParams OracleParams::from_config(const KVConfig& cfg, double default_percentile) {
  OracleParams p;
  const std::string mode = cfg.get_enum("oracle.mode", {"strict", "lenient"}, "strict");
  p.mode = (mode == "strict") ? OracleMode::kStrict : OracleMode::kLenient;
  p.percentile = cfg.get_double("oracle.percentile", default_percentile);
  p.include_zero_deltas = cfg.get_bool("oracle.include_zero_deltas", p.include_zero_deltas);
  p.tie_eps = cfg.get_double("oracle.tie_eps", p.tie_eps);
  p.validate();
  return p;
}

void OracleParams::validate() const {
  if (mode == OracleMode::kLenient && (percentile <= 0.0 || percentile >= 1.0))
    throw ConfigError("oracle.percentile must be in (0, 1)");
  if (tie_eps < 0.0) throw ConfigError("oracle.tie_eps must be >= 0");
}

double percentile_threshold(const std::vector<double>& sorted_pool, double p) {
  const std::size_t n = sorted_pool.size();
  if (n == 0) throw NumericError("percentile of an empty pool");
  if (p <= 0.0 || p >= 1.0) throw ConfigError("percentile must be in (0, 1)");
  const double h = p * static_cast<double>(n);
  const double k_round = std::round(h);
  const bool is_integer = std::fabs(h - k_round) < 1e-9;
  if (is_integer) {
    const auto k = static_cast<std::size_t>(k_round);
    if (k >= n) return sorted_pool[n - 1];
    if (k >= 1) return 0.5 * (sorted_pool[k - 1] + sorted_pool[k]);
    return sorted_pool[0];
  }
  auto idx = static_cast<std::size_t>(std::floor(h));
  if (idx >= n) idx = n - 1;
  return sorted_pool[idx];
}

namespace {

// Scale-aware tie epsilon: exact-DP ties are bit-equal, but this also
// tolerates accumulation fuzz when Q comes from sampled training.
inline double tie_threshold(double max_value, double tie_eps) {
  const double scale = std::max(1.0, std::fabs(max_value));
  return tie_eps * scale;
}

}  // namespace

AcceptableFunction AcceptableFunction::build(const Environment& env, const RealIndex& index,
                                             const QTable& q_real, const OracleParams& params) {
  params.validate();
  if (q_real.n_states() != index.size())
    throw DomainError("acceptability: Q table and enumeration sizes differ");

  AcceptableFunction f;
  f.n_actions_ = q_real.n_actions;
  f.mode_ = params.mode;
  const std::size_t total =
      static_cast<std::size_t>(index.size()) * static_cast<std::size_t>(q_real.n_actions);
  f.deltas_.assign(total, 0.0);
  f.acceptable_.assign(total, 1);

  std::vector<char> terminal(static_cast<std::size_t>(index.size()), 0);
  for (std::int32_t s = 0; s < index.size(); ++s)
    terminal[static_cast<std::size_t>(s)] = env.is_terminal(index.state(s)) ? 1 : 0;

  for (std::int32_t s = 0; s < index.size(); ++s) {
    if (terminal[static_cast<std::size_t>(s)]) continue;
    const double maxv = q_real.max_value(s);
    for (Action a = 0; a < q_real.n_actions; ++a)
      f.deltas_[static_cast<std::size_t>(s) * static_cast<std::size_t>(q_real.n_actions) +
                static_cast<std::size_t>(a)] = maxv - q_real.get(s, a);
  }

  if (params.mode == OracleMode::kStrict) {
    for (std::int32_t s = 0; s < index.size(); ++s) {
      if (terminal[static_cast<std::size_t>(s)]) continue;
      const double tie = tie_threshold(q_real.max_value(s), params.tie_eps);
      for (Action a = 0; a < q_real.n_actions; ++a) {
        const std::size_t i =
            static_cast<std::size_t>(s) * static_cast<std::size_t>(q_real.n_actions) +
            static_cast<std::size_t>(a);
        f.acceptable_[i] = (f.deltas_[i] <= tie) ? 1 : 0;
      }
    }
    return f;
  }

  // Lenient: pool deltas of all non-terminal pairs; optionally drop
  // tie-equivalent zeros; threshold at the configured percentile.
  std::vector<double> pool;
  pool.reserve(total);
  for (std::int32_t s = 0; s < index.size(); ++s) {
    if (terminal[static_cast<std::size_t>(s)]) continue;
    const double tie = tie_threshold(q_real.max_value(s), params.tie_eps);
    for (Action a = 0; a < q_real.n_actions; ++a) {
      const double d =
          f.deltas_[static_cast<std::size_t>(s) * static_cast<std::size_t>(q_real.n_actions) +
                    static_cast<std::size_t>(a)];
      if (!params.include_zero_deltas && d <= tie) continue;
      pool.push_back(d);
    }
  }
  if (pool.empty())
    throw NumericError("lenient oracle: delta pool is empty (all deltas are ties and excluded)");
  std::sort(pool.begin(), pool.end());
  f.threshold_ = percentile_threshold(pool, params.percentile);

  for (std::int32_t s = 0; s < index.size(); ++s) {
    if (terminal[static_cast<std::size_t>(s)]) continue;
    for (Action a = 0; a < q_real.n_actions; ++a) {
      const std::size_t i =
          static_cast<std::size_t>(s) * static_cast<std::size_t>(q_real.n_actions) +
          static_cast<std::size_t>(a);
      f.acceptable_[i] = (f.deltas_[i] < f.threshold_) ? 1 : 0;
    }
  }
  return f;
}

std::int64_t AcceptableFunction::acceptable_count() const {
  std::int64_t c = 0;
  for (char b : acceptable_) c += b;
  return c;
}

BlindSpotTruth ground_truth_blind_spots(const Environment& target, const SimIndex& sim_index,
                                        const RealIndex& real_index, const Policy& pi_sim,
                                        const AcceptableFunction& acc) {
  if (pi_sim.n_states() != sim_index.size())
    throw DomainError("ground truth: policy and observed enumeration sizes differ");
  BlindSpotTruth t;
  t.blind.assign(static_cast<std::size_t>(sim_index.size()), 0);
  t.witness.assign(static_cast<std::size_t>(sim_index.size()), -1);
  for (std::int32_t r = 0; r < real_index.size(); ++r) {
    const RealState& rs = real_index.state(r);
    if (target.is_terminal(rs)) continue;
    const std::int32_t sid = sim_index.id_of(target.sim_observe(rs));
    if (t.witness[static_cast<std::size_t>(sid)] != -1) continue;
    if (!acc.is_acceptable(r, pi_sim.at(sid))) {
      t.blind[static_cast<std::size_t>(sid)] = 1;
      t.witness[static_cast<std::size_t>(sid)] = r;
    }
  }
  return t;
}

Oracle::Oracle(const Environment& target, std::shared_ptr<const RealIndex> real_index,
               std::shared_ptr<const SimIndex> sim_index, QTable q_real, Policy pi_sim,
               const OracleParams& params)
    : target_(&target),
      real_index_(std::move(real_index)),
      sim_index_(std::move(sim_index)),
      q_real_(std::move(q_real)),
      pi_sim_(std::move(pi_sim)),
      tie_eps_(params.tie_eps),
      acc_(AcceptableFunction::build(target, *real_index_, q_real_, params)) {
  if (pi_sim_.n_states() != sim_index_->size())
    throw DomainError("oracle: agent policy and observed enumeration sizes differ");
}

bool Oracle::in_optimal_set(std::int32_t real_id, Action a) const {
  const double maxv = q_real_.max_value(real_id);
  return maxv - q_real_.get(real_id, a) <= tie_threshold(maxv, tie_eps_);
}

Action Oracle::policy_action(const RealState& s) const {
  const std::int32_t rid = real_index_->id_of(s);
  const Action agent = pi_sim_.at(sim_index_->id_of(target_->sim_observe(s)));
  if (in_optimal_set(rid, agent)) return agent;
  return q_real_.greedy(rid);
}

void export_truth_csv(const BlindSpotTruth& truth, const Environment& env,
                      const SimIndex& sim_index, const std::string& path) {
  std::vector<std::string> header = {"sim_id"};
  for (const auto& fld : env.sim_fields()) header.push_back(fld);
  header.push_back("blind");
  header.push_back("witness_real_id");

  CsvWriter w(header);
  for (std::int32_t s = 0; s < sim_index.size(); ++s) {
    std::vector<std::string> row = {std::to_string(s)};
    const StateVec& v = sim_index.state(s).v;
    for (int k = 0; k < v.size(); ++k) row.push_back(std::to_string(v[k]));
    row.push_back(std::to_string(static_cast<int>(truth.blind[static_cast<std::size_t>(s)])));
    row.push_back(std::to_string(truth.witness[static_cast<std::size_t>(s)]));
    w.add_row(std::move(row));
  }
  w.write(path);
}

}  // namespace blindspot
