#include "blindspot/feedback.hpp"

#include <algorithm>
#include <cstdlib>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

namespace {
const std::string kNames[] = {"R-A", "R-AM", "D-A", "D-AM", "C"};
}

ProtocolKind parse_protocol(const std::string& name) {
  for (int i = 0; i < 5; ++i)
    if (name == kNames[i]) return static_cast<ProtocolKind>(i);
  throw ConfigError("unknown protocol '" + name + "', expected R-A, R-AM, D-A, D-AM, or C");
}

const std::string& protocol_name(ProtocolKind kind) {
  return kNames[static_cast<int>(kind)];
}

std::vector<std::int32_t> FeedbackDataset::seen_sim_ids() const {
  std::vector<std::int32_t> ids;
  ids.reserve(events.size());
  for (const auto& e : events) ids.push_back(e.sim_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

FeedbackDataset collect_feedback(Environment& env, const Oracle& oracle, ProtocolKind kind,
                                 long long budget, std::uint64_t seed) {
  if (budget < 1) throw ConfigError("feedback budget must be >= 1");
  // Any env instance built from the same config works (cells use their own
  // instances); mismatched state spaces surface as index lookup failures.
  if (env.name() != oracle.target().name())
    throw DomainError("feedback collection requires a target environment matching the oracle");

  FeedbackDataset ds;
  ds.protocol = protocol_name(kind);
  ds.seed = seed;
  ds.budget = budget;
  ds.events.reserve(static_cast<std::size_t>(budget));

  const RealIndex& real_index = oracle.real_index();
  const SimIndex& sim_index = oracle.sim_index();
  const Policy& pi_sim = oracle.pi_sim();

  const bool mismatch_label =
      (kind == ProtocolKind::kRandomMismatch || kind == ProtocolKind::kDemoMismatch);

  auto label_for = [&](const RealState& s, std::int32_t sid) -> int {
    const Action agent = pi_sim.at(sid);
    if (mismatch_label) return oracle.policy_action(s) != agent ? 1 : 0;
    return oracle.acceptable(s, agent) ? 0 : 1;
  };

  if (kind == ProtocolKind::kRandomAcceptable || kind == ProtocolKind::kRandomMismatch) {
    // Uniform over non-terminal real states (labels describe acting, so
    // terminal states are never sampled).
    std::vector<std::int32_t> pool;
    for (std::int32_t r = 0; r < real_index.size(); ++r)
      if (!env.is_terminal(real_index.state(r))) pool.push_back(r);
    if (pool.empty()) throw DomainError("feedback: no non-terminal states to sample");

    Rng rng(derive_seed(seed, "feedback", "random"));
    for (long long b = 0; b < budget; ++b) {
      const std::int32_t rid = pool[rng.uniform_int(pool.size())];
      const RealState& s = real_index.state(rid);
      const std::int32_t sid = sim_index.id_of(env.sim_observe(s));
      ds.events.push_back({static_cast<std::int32_t>(b), 0, rid, sid, label_for(s, sid)});
    }
    return ds;
  }

  // Episode-driven protocols: oracle demonstrations (D-*) or agent execution
  // with oracle overrides (C).
  env.reseed(derive_seed(seed, "feedback", "episodes"));
  long long remaining = budget;
  std::int32_t episode = 0;
  while (remaining > 0) {
    RealState s = env.reset();
    bool done = env.is_terminal(s);
    std::int32_t step_i = 0;
    while (!done && remaining > 0) {
      const std::int32_t rid = real_index.id_of(s);
      const std::int32_t sid = sim_index.id_of(env.sim_observe(s));
      const Action agent = pi_sim.at(sid);

      Action exec;
      int label;
      if (kind == ProtocolKind::kCorrections) {
        const bool ok = oracle.acceptable(s, agent);
        label = ok ? 0 : 1;
        exec = ok ? agent : oracle.policy_action(s);
      } else {
        label = label_for(s, sid);
        exec = oracle.policy_action(s);
      }
      ds.events.push_back({episode, step_i, rid, sid, label});
      --remaining;

      const StepResult res = env.step(s, exec);
      s = res.next;
      done = res.done;
      ++step_i;
    }
    ++episode;
  }
  return ds;
}

void export_feedback_csv(const FeedbackDataset& ds, const Environment& env,
                         const RealIndex& real_index, const SimIndex& sim_index,
                         const std::string& path) {
  std::vector<std::string> header = {"episode", "step", "real_id"};
  for (const auto& f : env.real_fields()) header.push_back("real_" + f);
  header.push_back("sim_id");
  for (const auto& f : env.sim_fields()) header.push_back("sim_" + f);
  header.push_back("label");

  CsvWriter w(header);
  for (const auto& e : ds.events) {
    std::vector<std::string> row = {std::to_string(e.episode), std::to_string(e.step),
                                    std::to_string(e.real_id)};
    const StateVec& rv = real_index.state(e.real_id).v;
    for (int k = 0; k < rv.size(); ++k) row.push_back(std::to_string(rv[k]));
    row.push_back(std::to_string(e.sim_id));
    const StateVec& sv = sim_index.state(e.sim_id).v;
    for (int k = 0; k < sv.size(); ++k) row.push_back(std::to_string(sv[k]));
    row.push_back(std::to_string(e.label));
    w.add_row(std::move(row));
  }
  w.write(path);
}

FeedbackDataset import_feedback_csv(const std::string& path, const std::string& protocol,
                                    std::uint64_t seed) {
  const CsvTable t = read_csv(path);
  const int c_ep = t.col("episode"), c_st = t.col("step"), c_rid = t.col("real_id"),
            c_sid = t.col("sim_id"), c_lab = t.col("label");
  FeedbackDataset ds;
  ds.protocol = protocol;
  ds.seed = seed;
  ds.budget = static_cast<long long>(t.rows.size());
  for (const auto& row : t.rows) {
    LabelEvent e;
    e.episode = std::atoi(row[static_cast<std::size_t>(c_ep)].c_str());
    e.step = std::atoi(row[static_cast<std::size_t>(c_st)].c_str());
    e.real_id = std::atoi(row[static_cast<std::size_t>(c_rid)].c_str());
    e.sim_id = std::atoi(row[static_cast<std::size_t>(c_sid)].c_str());
    e.label = std::atoi(row[static_cast<std::size_t>(c_lab)].c_str());
    if (e.label != 0 && e.label != 1) throw IoError("feedback csv: label must be 0/1 in " + path);
    ds.events.push_back(e);
  }
  return ds;
}

}  // namespace blindspot
