#pragma once

// FlappyBird: a bird flies toward the next pipe on a grid of configurable
// height; the pipe is `pipe_spacing` cells away when the episode starts.
//
// Observed state: [y_b, y_t, y_a, v_a, dx] — bottom-pipe top row, top-pipe
// bottom row (gap is the open rows strictly between them), bird altitude,
// vertical velocity, and horizontal distance to the pipe. Full state adds
// the pipe material (0 steel, 1 copper), invisible to the agent.
//
// Two pipe profiles exist: a high gap (always steel) and a low gap (steel or
// copper). Copper only occurs on low pipes: such pipes sit close to the
// ground and channel wind, so flying above danger_height within
// danger_proximity cells of a copper pipe costs danger_penalty each step.
// Shaping (+shaping_bonus per step) encourages flying high near steel pipes
// and low near copper ones.
//
// Actions: 0 = flap (velocity jumps to flap_velocity), 1 = noop (gravity
// subtracts 1). Velocity clamps to [-max_velocity, +max_velocity]; altitude
// clamps to [0, height-1] (no crash on ground/ceiling). Each step dx
// decreases by 1; dx = 0 resolves the episode: pass_reward inside the gap,
// crash_penalty otherwise. An episode is a single pipe crossing.

#include "blindspot/env.hpp"

namespace blindspot {

struct FlappyConfig {
  int height = 10;
  int pipe_spacing = 15;  // dx takes values 0 .. pipe_spacing-1
  int gap_size = 3;
  int low_gap_start = 1;   // lowest open row of the low gap
  int high_gap_start = 6;  // lowest open row of the high gap
  double p_high_pipe = 0.5;
  double p_copper = 0.5;  // P(copper | low pipe), target only
  int flap_velocity = 2;
  int max_velocity = 2;
  int start_y = 5;            // used when random_start_y is false
  bool random_start_y = true; // reset draws the bird's altitude uniformly
  int start_velocity = 0;
  int fly_high_threshold = 6;  // steel shaping when y_a > this
  int fly_low_threshold = 3;   // copper shaping when y_a < this
  int danger_proximity = 3;    // copper danger zone: dx <= this
  int danger_height = 6;       // copper danger zone: y_a > this
  double shaping_bonus = 0.1;
  double danger_penalty = -100.0;
  double pass_reward = 10.0;
  double crash_penalty = -10.0;
  int horizon = 200;

  static FlappyConfig from_config(const KVConfig& cfg);
  void validate() const;

  int gap_bottom(bool high) const { return (high ? high_gap_start : low_gap_start) - 1; }
  int gap_top(bool high) const { return (high ? high_gap_start : low_gap_start) + gap_size; }
};

class FlappyEnv final : public Environment {
 public:
  // `with_copper` selects target (true) vs source (false) behaviour.
  FlappyEnv(const FlappyConfig& cfg, bool with_copper, std::uint64_t seed);

  const std::string& name() const override { return name_; }
  int num_actions() const override { return 2; }
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

  const FlappyConfig& config() const { return cfg_; }

 private:
  void check_state(const RealState& s) const;

  FlappyConfig cfg_;
  bool with_copper_;
  std::string name_;
  Rng rng_;
  int steps_ = 0;
};

}  // namespace blindspot
