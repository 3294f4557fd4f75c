#include "blindspot/flappybird.hpp"

#include "blindspot/error.hpp"

namespace blindspot {

namespace {
const std::vector<std::string> kActionNames = {"flap", "noop"};
const std::vector<std::string> kRealFields = {"y_b", "y_t", "y_a", "v_a", "dx", "material"};
const std::vector<std::string> kSimFields = {"y_b", "y_t", "y_a", "v_a", "dx"};
constexpr int kSteel = 0;
constexpr int kCopper = 1;
constexpr Action kFlap = 0;
}  // namespace

FlappyConfig FlappyConfig::from_config(const KVConfig& cfg) {
  FlappyConfig c;
  c.height = static_cast<int>(cfg.get_int("env.height", c.height));
  c.pipe_spacing = static_cast<int>(cfg.get_int("env.pipe_spacing", c.pipe_spacing));
  c.gap_size = static_cast<int>(cfg.get_int("env.gap_size", c.gap_size));
  c.low_gap_start = static_cast<int>(cfg.get_int("env.low_gap_start", c.low_gap_start));
  c.high_gap_start = static_cast<int>(cfg.get_int("env.high_gap_start", c.high_gap_start));
  c.p_high_pipe = cfg.get_double("env.p_high_pipe", c.p_high_pipe);
  c.p_copper = cfg.get_double("env.p_copper", c.p_copper);
  c.flap_velocity = static_cast<int>(cfg.get_int("env.flap_velocity", c.flap_velocity));
  c.max_velocity = static_cast<int>(cfg.get_int("env.max_velocity", c.max_velocity));
  c.start_y = static_cast<int>(cfg.get_int("env.start_y", c.start_y));
  c.random_start_y = cfg.get_bool("env.random_start_y", c.random_start_y);
  c.start_velocity = static_cast<int>(cfg.get_int("env.start_velocity", c.start_velocity));
  c.fly_high_threshold = static_cast<int>(cfg.get_int("env.fly_high_threshold", c.fly_high_threshold));
  c.fly_low_threshold = static_cast<int>(cfg.get_int("env.fly_low_threshold", c.fly_low_threshold));
  c.danger_proximity = static_cast<int>(cfg.get_int("env.danger_proximity", c.danger_proximity));
  c.danger_height = static_cast<int>(cfg.get_int("env.danger_height", c.danger_height));
  c.shaping_bonus = cfg.get_double("env.shaping_bonus", c.shaping_bonus);
  c.danger_penalty = cfg.get_double("env.danger_penalty", c.danger_penalty);
  c.pass_reward = cfg.get_double("env.pass_reward", c.pass_reward);
  c.crash_penalty = cfg.get_double("env.crash_penalty", c.crash_penalty);
  c.horizon = static_cast<int>(cfg.get_int("env.horizon", c.horizon));
  c.validate();
  return c;
}

void FlappyConfig::validate() const {
  if (height < 2) throw ConfigError("env.height must be >= 2");
  if (pipe_spacing < 2) throw ConfigError("env.pipe_spacing must be >= 2");
  if (gap_size < 1) throw ConfigError("env.gap_size must be >= 1");
  for (bool high : {false, true}) {
    const int start = high ? high_gap_start : low_gap_start;
    const char* which = high ? "env.high_gap_start" : "env.low_gap_start";
    if (start < 1) throw ConfigError(std::string(which) + " must be >= 1");
    if (start + gap_size > height - 1)
      throw ConfigError(std::string(which) + " + env.gap_size must be <= height - 1");
  }
  if (low_gap_start == high_gap_start)
    throw ConfigError("env.low_gap_start and env.high_gap_start must differ");
  if (p_high_pipe < 0.0 || p_high_pipe > 1.0) throw ConfigError("env.p_high_pipe must be in [0, 1]");
  if (p_copper < 0.0 || p_copper > 1.0) throw ConfigError("env.p_copper must be in [0, 1]");
  if (max_velocity < 1) throw ConfigError("env.max_velocity must be >= 1");
  if (flap_velocity < -max_velocity || flap_velocity > max_velocity)
    throw ConfigError("env.flap_velocity must be in [-max_velocity, max_velocity]");
  if (start_y < 0 || start_y >= height) throw ConfigError("env.start_y must be in [0, height)");
  if (start_velocity < -max_velocity || start_velocity > max_velocity)
    throw ConfigError("env.start_velocity must be in [-max_velocity, max_velocity]");
  if (horizon < 1) throw ConfigError("env.horizon must be >= 1");
  const long long n_real =
      3LL * height * (2 * max_velocity + 1) * pipe_spacing;
  if (n_real > kEnumerationCap)
    throw ConfigError("flappybird state space exceeds enumeration cap (" +
                      std::to_string(n_real) + " > " + std::to_string(kEnumerationCap) + ")");
}

FlappyEnv::FlappyEnv(const FlappyConfig& cfg, bool with_copper, std::uint64_t seed)
    : cfg_(cfg),
      with_copper_(with_copper),
      name_(with_copper ? "flappybird-target" : "flappybird-source"),
      rng_(seed) {
  cfg_.validate();
}

const std::vector<std::string>& FlappyEnv::action_names() const { return kActionNames; }
const std::vector<std::string>& FlappyEnv::real_fields() const { return kRealFields; }
const std::vector<std::string>& FlappyEnv::sim_fields() const { return kSimFields; }

SimState FlappyEnv::sim_observe(const RealState& s) const {
  check_state(s);
  return SimState{s.v[0], s.v[1], s.v[2], s.v[3], s.v[4]};
}

bool FlappyEnv::is_terminal(const RealState& s) const {
  check_state(s);
  return s.v[4] == 0;
}

void FlappyEnv::check_state(const RealState& s) const {
  if (s.v.size() != 6) throw DomainError(name_ + ": state must have 6 fields");
  const int y_b = s.v[0], y_t = s.v[1], y_a = s.v[2], v_a = s.v[3], dx = s.v[4], mat = s.v[5];
  const bool is_low = (y_b == cfg_.gap_bottom(false) && y_t == cfg_.gap_top(false));
  const bool is_high = (y_b == cfg_.gap_bottom(true) && y_t == cfg_.gap_top(true));
  if (!is_low && !is_high)
    throw DomainError(name_ + ": unknown pipe profile in " + s.v.to_string());
  if (y_a < 0 || y_a >= cfg_.height || v_a < -cfg_.max_velocity || v_a > cfg_.max_velocity ||
      dx < 0 || dx >= cfg_.pipe_spacing)
    throw DomainError(name_ + ": state out of bounds " + s.v.to_string());
  if (mat != kSteel && mat != kCopper)
    throw DomainError(name_ + ": invalid material in " + s.v.to_string());
  if (mat == kCopper && (!with_copper_ || is_high))
    throw DomainError(name_ + ": copper material on a non-low pipe in " + s.v.to_string());
}

RealState FlappyEnv::reset() {
  steps_ = 0;
  const bool high = rng_.bernoulli(cfg_.p_high_pipe);
  int mat = kSteel;
  if (with_copper_ && !high) mat = rng_.bernoulli(cfg_.p_copper) ? kCopper : kSteel;
  const int y0 = cfg_.random_start_y
                     ? static_cast<int>(rng_.uniform_int(static_cast<std::uint64_t>(cfg_.height)))
                     : cfg_.start_y;
  return RealState{cfg_.gap_bottom(high), cfg_.gap_top(high), y0, cfg_.start_velocity,
                   cfg_.pipe_spacing - 1, mat};
}

std::vector<Outcome> FlappyEnv::outcomes(const RealState& s, Action a) const {
  if (a < 0 || a >= num_actions())
    throw DomainError(name_ + ": invalid action " + std::to_string(a));
  if (is_terminal(s)) throw DomainError(name_ + ": cannot act in terminal state");

  const int y_b = s.v[0], y_t = s.v[1], mat = s.v[5];
  int v = (a == kFlap) ? cfg_.flap_velocity : s.v[3] - 1;
  if (v < -cfg_.max_velocity) v = -cfg_.max_velocity;
  if (v > cfg_.max_velocity) v = cfg_.max_velocity;
  int y = s.v[2] + v;
  if (y < 0) y = 0;
  if (y >= cfg_.height) y = cfg_.height - 1;
  const int dx = s.v[4] - 1;

  double reward = 0.0;
  if (mat == kSteel) {
    if (y > cfg_.fly_high_threshold) reward += cfg_.shaping_bonus;
  } else {
    if (y < cfg_.fly_low_threshold) reward += cfg_.shaping_bonus;
    if (dx <= cfg_.danger_proximity && y > cfg_.danger_height) reward += cfg_.danger_penalty;
  }
  if (dx == 0) reward += (y_b < y && y < y_t) ? cfg_.pass_reward : cfg_.crash_penalty;

  return {Outcome{1.0, RealState{y_b, y_t, y, v, dx, mat}, reward}};
}

StepResult FlappyEnv::step(const RealState& s, Action a) {
  const Outcome o = outcomes(s, a).front();
  ++steps_;
  return {o.next, o.reward, is_terminal(o.next) || steps_ >= cfg_.horizon};
}

std::vector<RealState> FlappyEnv::enumerate_real() const {
  std::vector<RealState> out;
  for (bool high : {false, true}) {
    const int y_b = cfg_.gap_bottom(high), y_t = cfg_.gap_top(high);
    for (int mat : {kSteel, kCopper}) {
      if (mat == kCopper && (!with_copper_ || high)) continue;
      for (int y = 0; y < cfg_.height; ++y)
        for (int v = -cfg_.max_velocity; v <= cfg_.max_velocity; ++v)
          for (int dx = 0; dx < cfg_.pipe_spacing; ++dx)
            out.push_back(RealState{y_b, y_t, y, v, dx, mat});
    }
  }
  return out;
}

std::vector<SimState> FlappyEnv::enumerate_sim() const {
  std::vector<SimState> out;
  for (bool high : {false, true}) {
    const int y_b = cfg_.gap_bottom(high), y_t = cfg_.gap_top(high);
    for (int y = 0; y < cfg_.height; ++y)
      for (int v = -cfg_.max_velocity; v <= cfg_.max_velocity; ++v)
        for (int dx = 0; dx < cfg_.pipe_spacing; ++dx)
          out.push_back(SimState{y_b, y_t, y, v, dx});
  }
  return out;
}

}  // namespace blindspot
