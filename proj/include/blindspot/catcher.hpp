#pragma once

// Catcher: a paddle moves along the bottom row of a WxH grid to catch fruit
// falling one row per step.
//
// Observed state: [x_p, x_f, y_f]. Full state adds fruit_kind (0 good,
// 1 bad). In the source task every fruit is good and should be caught
// (reward W - |x_p - x_f| on the catch row). In the target task, fruit
// spawning in the right region (x_f >= right_region_start) is bad with
// probability 1 - p_good_right; bad fruit must be avoided (reward
// |x_p - x_f|, plus bad_catch_penalty when caught exactly). Fruit kind is
// invisible to the agent, so the observed state spaces coincide.
//
// Actions: 0 = left, 1 = stay, 2 = right. Paddle movement clamps at walls.
// An episode is a single fruit drop; the state with y_f = H - 1 is terminal.

#include "blindspot/env.hpp"

namespace blindspot {

struct CatcherConfig {
  int width = 11;
  int height = 11;
  int right_region_start = 6;  // default (width + 1) / 2
  double p_good_right = 0.5;   // P(good | spawn in right region), target only
  double bad_catch_penalty = -100.0;
  int horizon = 200;

  static CatcherConfig from_config(const KVConfig& cfg);
  void validate() const;
};

class CatcherEnv final : public Environment {
 public:
  // `with_bad_fruit` selects target (true) vs source (false) behaviour.
  CatcherEnv(const CatcherConfig& cfg, bool with_bad_fruit, std::uint64_t seed);

  const std::string& name() const override { return name_; }
  int num_actions() const override { return 3; }
  const std::vector<std::string>& action_names() const override;
  const std::vector<std::string>& real_fields() const override;
  const std::vector<std::string>& sim_fields() const override;

  SimState sim_observe(const RealState& s) const override;
  bool is_terminal(const RealState& s) const override;
  RealState reset() override;
  StepResult step(const RealState& s, Action a) override;
  std::vector<Outcome> outcomes(const RealState& s, Action a) const override;
  std::vector<RealState> enumerate_real() const override;
  std::vector<SimState> enumerate_sim() const override;
  void reseed(std::uint64_t seed) override { rng_.reseed(seed); }
  int horizon() const override { return cfg_.horizon; }

  const CatcherConfig& config() const { return cfg_; }

 private:
  void check_state(const RealState& s) const;

  CatcherConfig cfg_;
  bool with_bad_fruit_;
  std::string name_;
  Rng rng_;
  int steps_ = 0;
};

}  // namespace blindspot
