#pragma once

// Tabular solvers: epsilon-greedy Q-learning and exact value iteration.
//
// Both can key the table by full real states or by observed (sim) states.
// Sim-space solving requires the projection to be a bijection on the
// environment's real space (true for source environments, where no hidden
// feature varies); it is rejected with DomainError otherwise.

#include <cstdint>

#include "blindspot/config.hpp"
#include "blindspot/env.hpp"
#include "blindspot/qtable.hpp"

namespace blindspot {

enum class Space { kSim, kReal };

struct QLearnParams {
  long long episodes = 60000;
  double alpha = 0.1;       // constant learning rate
  double gamma = 0.95;      // discount
  double eps_start = 1.0;   // exploration, decayed linearly per episode
  double eps_end = 0.05;

  static QLearnParams from_config(const KVConfig& cfg);
  void validate() const;
};

// Epsilon-greedy tabular Q-learning. Unvisited entries stay 0. Exploration
// epsilon decays linearly from eps_start to eps_end across episodes; all
// randomness (resets via env reseed, action draws) derives from `seed`.
QTable train_q(Environment& env, Space space, const QLearnParams& params, std::uint64_t seed);

// Exact dynamic-programming solution of the enumerated MDP via repeated
// sweeps of the one-step model until the max update falls below tol.
// Task-scoped episodes make the state graph acyclic, so values are exact
// (ties between equally good actions are bit-exact).
QTable value_iteration(const Environment& env, Space space, double gamma, double tol = 1e-12,
                       int max_sweeps = 100000);

}  // namespace blindspot
