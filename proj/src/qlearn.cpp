#include "blindspot/qlearn.hpp"

#include <cmath>

#include "blindspot/error.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

QLearnParams QLearnParams::from_config(const KVConfig& cfg) {
  QLearnParams p;
  p.episodes = cfg.get_int("rl.episodes", p.episodes);
  p.alpha = cfg.get_double("rl.alpha", p.alpha);
  p.gamma = cfg.get_double("rl.gamma", p.gamma);
  p.eps_start = cfg.get_double("rl.eps_start", p.eps_start);
  p.eps_end = cfg.get_double("rl.eps_end", p.eps_end);
  p.validate();
  return p;
}

void QLearnParams::validate() const {
  if (episodes < 1) throw ConfigError("rl.episodes must be >= 1");
  if (alpha <= 0.0 || alpha > 1.0) throw ConfigError("rl.alpha must be in (0, 1]");
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("rl.gamma must be in [0, 1)");
  if (eps_start < 0.0 || eps_start > 1.0) throw ConfigError("rl.eps_start must be in [0, 1]");
  if (eps_end < 0.0 || eps_end > 1.0) throw ConfigError("rl.eps_end must be in [0, 1]");
}

namespace {

// Maps real states to dense table keys for the requested space. For kSim the
// projection must be a bijection on the enumerated real space.
struct TableKeyer {
  Space space;
  RealIndex real_index;
  SimIndex sim_index;
  const Environment* env = nullptr;

  TableKeyer(const Environment& e, Space sp) : space(sp), env(&e) {
    if (space == Space::kReal) {
      real_index = RealIndex(e.enumerate_real());
    } else {
      const auto reals = e.enumerate_real();
      sim_index = SimIndex(e.enumerate_sim());
      if (static_cast<std::int32_t>(reals.size()) != sim_index.size())
        throw DomainError(e.name() +
                          ": sim-space solving requires a bijective projection "
                          "(real and observed space sizes differ)");
      std::vector<char> seen(static_cast<std::size_t>(sim_index.size()), 0);
      for (const auto& r : reals) {
        auto& flag = seen[static_cast<std::size_t>(sim_index.id_of(e.sim_observe(r)))];
        if (flag) throw DomainError(e.name() + ": projection is not injective on the real space");
        flag = 1;
      }
    }
  }

  std::int32_t n_states() const {
    return space == Space::kReal ? real_index.size() : sim_index.size();
  }
  std::int32_t key(const RealState& s) const {
    return space == Space::kReal ? real_index.id_of(s) : sim_index.id_of(env->sim_observe(s));
  }
};

}  // namespace

QTable train_q(Environment& env, Space space, const QLearnParams& params, std::uint64_t seed) {
  params.validate();
  const TableKeyer keyer(env, space);
  QTable q(keyer.n_states(), env.num_actions());

  env.reseed(derive_seed(seed, "qlearn", "env"));
  Rng explore(derive_seed(seed, "qlearn", "explore"));
  const long long episodes = params.episodes;

  for (long long ep = 0; ep < episodes; ++ep) {
    const double frac =
        episodes > 1 ? static_cast<double>(ep) / static_cast<double>(episodes - 1) : 1.0;
    const double eps = params.eps_start + (params.eps_end - params.eps_start) * frac;

    RealState s = env.reset();
    bool done = env.is_terminal(s);
    while (!done) {
      const std::int32_t sid = keyer.key(s);
      Action a;
      if (explore.uniform_real() < eps)
        a = static_cast<Action>(explore.uniform_int(static_cast<std::uint64_t>(env.num_actions())));
      else
        a = q.greedy(sid);

      const StepResult res = env.step(s, a);
      double target = res.reward;
      if (!env.is_terminal(res.next))
        target += params.gamma * q.max_value(keyer.key(res.next));
      const double old = q.get(sid, a);
      q.set(sid, a, old + params.alpha * (target - old));
      s = res.next;
      done = res.done;
    }
  }
  return q;
}

QTable value_iteration(const Environment& env, Space space, double gamma, double tol,
                       int max_sweeps) {
  if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("value iteration: gamma must be in [0, 1)");
  if (tol <= 0.0) throw ConfigError("value iteration: tol must be positive");

  const RealIndex real_index(env.enumerate_real());
  const std::int32_t n = real_index.size();
  const int n_actions = env.num_actions();

  // Precompute the one-step model once.
  struct Entry {
    double prob, reward;
    std::int32_t next;
    bool next_terminal;
  };
  std::vector<std::vector<Entry>> model(static_cast<std::size_t>(n) *
                                        static_cast<std::size_t>(n_actions));
  std::vector<char> terminal(static_cast<std::size_t>(n), 0);
  for (std::int32_t s = 0; s < n; ++s) {
    const RealState& rs = real_index.state(s);
    if (env.is_terminal(rs)) {
      terminal[static_cast<std::size_t>(s)] = 1;
      continue;
    }
    for (Action a = 0; a < n_actions; ++a) {
      auto& entries = model[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                            static_cast<std::size_t>(a)];
      for (const Outcome& o : env.outcomes(rs, a))
        entries.push_back(
            {o.prob, o.reward, real_index.id_of(o.next), env.is_terminal(o.next)});
    }
  }

  QTable q(n, n_actions);
  QTable next_q(n, n_actions);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double delta = 0.0;
    for (std::int32_t s = 0; s < n; ++s) {
      if (terminal[static_cast<std::size_t>(s)]) continue;
      for (Action a = 0; a < n_actions; ++a) {
        const auto& entries =
            model[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                  static_cast<std::size_t>(a)];
        double v = 0.0;
        for (const Entry& e : entries)
          v += e.prob * (e.reward + (e.next_terminal ? 0.0 : gamma * q.max_value(e.next)));
        next_q.set(s, a, v);
        const double d = std::fabs(v - q.get(s, a));
        if (d > delta) delta = d;
      }
    }
    std::swap(q.values, next_q.values);
    if (delta < tol) break;
    if (sweep == max_sweeps - 1)
      throw NumericError("value iteration did not converge within max sweeps");
  }

  if (space == Space::kReal) return q;

  // Relabel by observed-state id; requires a bijective projection.
  const TableKeyer keyer(env, Space::kSim);
  QTable q_sim(keyer.sim_index.size(), n_actions);
  for (std::int32_t s = 0; s < n; ++s) {
    const std::int32_t sid = keyer.sim_index.id_of(env.sim_observe(real_index.state(s)));
    for (Action a = 0; a < n_actions; ++a) q_sim.set(sid, a, q.get(s, a));
  }
  return q_sim;
}

}  // namespace blindspot
