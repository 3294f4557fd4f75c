#include "blindspot/catcher.hpp"

#include <cmath>
#include <cstdlib>

#include "blindspot/error.hpp"

namespace blindspot {

namespace {
const std::vector<std::string> kActionNames = {"left", "stay", "right"};
const std::vector<std::string> kRealFields = {"x_p", "x_f", "y_f", "fruit_kind"};
const std::vector<std::string> kSimFields = {"x_p", "x_f", "y_f"};
constexpr int kGood = 0;
constexpr int kBad = 1;
}  // namespace

CatcherConfig CatcherConfig::from_config(const KVConfig& cfg) {
  CatcherConfig c;
  c.width = static_cast<int>(cfg.get_int("env.width", c.width));
  c.height = static_cast<int>(cfg.get_int("env.height", c.height));
  c.right_region_start =
      static_cast<int>(cfg.get_int("env.right_region_start", (c.width + 1) / 2));
  c.p_good_right = cfg.get_double("env.p_good_right", c.p_good_right);
  c.bad_catch_penalty = cfg.get_double("env.bad_catch_penalty", c.bad_catch_penalty);
  c.horizon = static_cast<int>(cfg.get_int("env.horizon", c.horizon));
  c.validate();
  return c;
}

void CatcherConfig::validate() const {
  if (width < 2) throw ConfigError("env.width must be >= 2");
  if (height < 2) throw ConfigError("env.height must be >= 2");
  if (right_region_start < 0 || right_region_start > width)
    throw ConfigError("env.right_region_start must be in [0, width]");
  if (p_good_right < 0.0 || p_good_right > 1.0)
    throw ConfigError("env.p_good_right must be in [0, 1]");
  if (horizon < 1) throw ConfigError("env.horizon must be >= 1");
  const long long n_real = 2LL * width * width * height;
  if (n_real > kEnumerationCap)
    throw ConfigError("catcher state space exceeds enumeration cap (" +
                      std::to_string(n_real) + " > " + std::to_string(kEnumerationCap) + ")");
}

CatcherEnv::CatcherEnv(const CatcherConfig& cfg, bool with_bad_fruit, std::uint64_t seed)
    : cfg_(cfg),
      with_bad_fruit_(with_bad_fruit),
      name_(with_bad_fruit ? "catcher-target" : "catcher-source"),
      rng_(seed) {
  cfg_.validate();
}

const std::vector<std::string>& CatcherEnv::action_names() const { return kActionNames; }
const std::vector<std::string>& CatcherEnv::real_fields() const { return kRealFields; }
const std::vector<std::string>& CatcherEnv::sim_fields() const { return kSimFields; }

SimState CatcherEnv::sim_observe(const RealState& s) const {
  check_state(s);
  return SimState{s.v[0], s.v[1], s.v[2]};
}

bool CatcherEnv::is_terminal(const RealState& s) const {
  check_state(s);
  return s.v[2] == cfg_.height - 1;
}

void CatcherEnv::check_state(const RealState& s) const {
  if (s.v.size() != 4) throw DomainError(name_ + ": state must have 4 fields");
  const int x_p = s.v[0], x_f = s.v[1], y_f = s.v[2], kind = s.v[3];
  if (x_p < 0 || x_p >= cfg_.width || x_f < 0 || x_f >= cfg_.width || y_f < 0 ||
      y_f >= cfg_.height)
    throw DomainError(name_ + ": state out of bounds " + s.v.to_string());
  if (kind != kGood && kind != kBad)
    throw DomainError(name_ + ": invalid fruit_kind in " + s.v.to_string());
  if (kind == kBad && (!with_bad_fruit_ || x_f < cfg_.right_region_start))
    throw DomainError(name_ + ": bad fruit outside right region in " + s.v.to_string());
}

RealState CatcherEnv::reset() {
  steps_ = 0;
  const int x_p = static_cast<int>(rng_.uniform_int(static_cast<std::uint64_t>(cfg_.width)));
  const int x_f = static_cast<int>(rng_.uniform_int(static_cast<std::uint64_t>(cfg_.width)));
  int kind = kGood;
  if (with_bad_fruit_ && x_f >= cfg_.right_region_start)
    kind = rng_.bernoulli(1.0 - cfg_.p_good_right) ? kBad : kGood;
  return RealState{x_p, x_f, 0, kind};
}

std::vector<Outcome> CatcherEnv::outcomes(const RealState& s, Action a) const {
  if (a < 0 || a >= num_actions())
    throw DomainError(name_ + ": invalid action " + std::to_string(a));
  if (is_terminal(s)) throw DomainError(name_ + ": cannot act in terminal state");

  const int x_f = s.v[1], kind = s.v[3];
  int x_p = s.v[0] + (a - 1);  // 0 -> -1, 1 -> 0, 2 -> +1
  if (x_p < 0) x_p = 0;
  if (x_p >= cfg_.width) x_p = cfg_.width - 1;
  const int y_f = s.v[2] + 1;

  double reward = 0.0;
  if (y_f == cfg_.height - 1) {
    const int dist = std::abs(x_p - x_f);
    if (kind == kGood) {
      reward = static_cast<double>(cfg_.width - dist);
    } else {
      reward = static_cast<double>(dist);
      if (dist == 0) reward += cfg_.bad_catch_penalty;
    }
  }
  return {Outcome{1.0, RealState{x_p, x_f, y_f, kind}, reward}};
}

StepResult CatcherEnv::step(const RealState& s, Action a) {
  const Outcome o = outcomes(s, a).front();
  ++steps_;
  return {o.next, o.reward, is_terminal(o.next) || steps_ >= cfg_.horizon};
}

std::vector<RealState> CatcherEnv::enumerate_real() const {
  std::vector<RealState> out;
  for (int x_p = 0; x_p < cfg_.width; ++x_p)
    for (int x_f = 0; x_f < cfg_.width; ++x_f)
      for (int y_f = 0; y_f < cfg_.height; ++y_f) {
        out.push_back(RealState{x_p, x_f, y_f, kGood});
        if (with_bad_fruit_ && x_f >= cfg_.right_region_start)
          out.push_back(RealState{x_p, x_f, y_f, kBad});
      }
  return out;
}

std::vector<SimState> CatcherEnv::enumerate_sim() const {
  std::vector<SimState> out;
  for (int x_p = 0; x_p < cfg_.width; ++x_p)
    for (int x_f = 0; x_f < cfg_.width; ++x_f)
      for (int y_f = 0; y_f < cfg_.height; ++y_f) out.push_back(SimState{x_p, x_f, y_f});
  return out;
}

}  // namespace blindspot
