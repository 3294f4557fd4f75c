#pragma once

// Environment interface for paired source/target tasks.
//
// A pair consists of a source environment the agent trains in and a target
// environment it is deployed to. Both share the same observed-state space
// (sim_observe), but the target's full states may carry extra hidden features
// the agent cannot perceive — the root cause of execution blind spots.
//
// Episodes are task-scoped: one fruit drop, one pipe crossing. Within an
// episode the dynamics are deterministic; all stochasticity (spawn positions,
// hidden feature draws) happens at reset(). `outcomes` exposes the exact
// one-step model for dynamic-programming solvers.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "blindspot/config.hpp"
#include "blindspot/rng.hpp"
#include "blindspot/state.hpp"

namespace blindspot {

using Action = int;

struct StepResult {
  RealState next;
  double reward = 0.0;
  bool done = false;  // terminal state reached or horizon exhausted
};

// One entry of the exact transition model for (s, a).
struct Outcome {
  double prob = 1.0;
  RealState next;
  double reward = 0.0;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual const std::string& name() const = 0;
  virtual int num_actions() const = 0;
  virtual const std::vector<std::string>& action_names() const = 0;
  virtual const std::vector<std::string>& real_fields() const = 0;
  virtual const std::vector<std::string>& sim_fields() const = 0;

  // Projects a full state onto what the agent can observe. Total on the
  // enumerated real space; never fails for valid states.
  virtual SimState sim_observe(const RealState& s) const = 0;

  virtual bool is_terminal(const RealState& s) const = 0;

  // Samples a start state (consumes internal RNG), resets the step counter.
  virtual RealState reset() = 0;

  // Applies an action. Throws DomainError on an invalid action or when s is
  // terminal. `done` is true at terminal states or when the per-episode step
  // horizon is exhausted.
  virtual StepResult step(const RealState& s, Action a) = 0;

  // Exact successor distribution of (s, a); pure, no RNG. Throws on invalid
  // action or terminal s. Probabilities sum to 1.
  virtual std::vector<Outcome> outcomes(const RealState& s, Action a) const = 0;

  // Full enumerations of the reachable state spaces, in a fixed documented
  // order. Throws DomainError if the configured space exceeds `enumeration
  // cap` entries.
  virtual std::vector<RealState> enumerate_real() const = 0;
  virtual std::vector<SimState> enumerate_sim() const = 0;

  virtual void reseed(std::uint64_t seed) = 0;
  virtual int horizon() const = 0;
};

struct EnvPair {
  std::unique_ptr<Environment> source;
  std::unique_ptr<Environment> target;
};

// Builds the named pair ("catcher" or "flappybird") from config keys under
// `env.*`. Validates every field and throws ConfigError on any bad value.
EnvPair make_env_pair(const std::string& domain, const KVConfig& cfg, std::uint64_t seed);

// Writes the full real/sim enumerations plus projection to CSV:
// columns: kind (real|sim), id, then one column per state field (sim columns
// padded empty on real rows and vice versa), sim_id (projection, real rows).
void export_enumeration_csv(const Environment& env, const std::string& path);

inline constexpr std::int64_t kEnumerationCap = 2'000'000;

}  // namespace blindspot
