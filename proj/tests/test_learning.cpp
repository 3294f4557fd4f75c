#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <blindspot/catcher.hpp>
#include <blindspot/csv.hpp>
#include <blindspot/error.hpp>
#include <blindspot/flappybird.hpp>
#include <blindspot/qlearn.hpp>
#include <blindspot/qtable.hpp>

using namespace blindspot;

namespace {

// Minimal deterministic chain for exact dynamic-programming checks:
// states {0..n-1}, the last one terminal. Action 0 advances (reward 1 on the
// step entering the terminal state), action 1 stays in place for `stay_r`.
class ChainEnv final : public Environment {
 public:
  explicit ChainEnv(int n, double stay_r = 0.05) : n_(n), stay_r_(stay_r) {}

  const std::string& name() const override { return name_; }
  int num_actions() const override { return 2; }
  const std::vector<std::string>& action_names() const override { return action_names_; }
  const std::vector<std::string>& real_fields() const override { return fields_; }
  const std::vector<std::string>& sim_fields() const override { return fields_; }
  SimState sim_observe(const RealState& s) const override { return SimState{s.v}; }
  bool is_terminal(const RealState& s) const override { return s.v[0] == n_ - 1; }

  RealState reset() override {
    steps_ = 0;
    return RealState{0};
  }

  StepResult step(const RealState& s, Action a) override {
    const Outcome o = outcomes(s, a).front();
    ++steps_;
    return {o.next, o.reward, is_terminal(o.next) || steps_ >= horizon()};
  }

  std::vector<Outcome> outcomes(const RealState& s, Action a) const override {
    if (a < 0 || a >= 2) throw DomainError("chain: invalid action");
    if (is_terminal(s)) throw DomainError("chain: terminal");
    const int i = s.v[0];
    if (a == 0) return {Outcome{1.0, RealState{i + 1}, i + 1 == n_ - 1 ? 1.0 : 0.0}};
    return {Outcome{1.0, RealState{i}, stay_r_}};
  }

  std::vector<RealState> enumerate_real() const override {
    std::vector<RealState> out;
    for (int i = 0; i < n_; ++i) out.push_back(RealState{i});
    return out;
  }
  std::vector<SimState> enumerate_sim() const override {
    std::vector<SimState> out;
    for (int i = 0; i < n_; ++i) out.push_back(SimState{i});
    return out;
  }

  void reseed(std::uint64_t) override {}
  int horizon() const override { return 50; }

 private:
  int n_;
  double stay_r_;
  int steps_ = 0;
  std::string name_ = "chain";
  std::vector<std::string> action_names_ = {"advance", "stay"};
  std::vector<std::string> fields_ = {"i"};
};

// Single state, single self-loop action with unit reward; never terminates.
class LoopEnv final : public Environment {
 public:
  const std::string& name() const override { return name_; }
  int num_actions() const override { return 1; }
  const std::vector<std::string>& action_names() const override { return action_names_; }
  const std::vector<std::string>& real_fields() const override { return fields_; }
  const std::vector<std::string>& sim_fields() const override { return fields_; }
  SimState sim_observe(const RealState& s) const override { return SimState{s.v}; }
  bool is_terminal(const RealState&) const override { return false; }
  RealState reset() override { return RealState{0}; }
  StepResult step(const RealState& s, Action a) override {
    const Outcome o = outcomes(s, a).front();
    return {o.next, o.reward, true};  // cut episodes short for the learner
  }
  std::vector<Outcome> outcomes(const RealState& s, Action) const override {
    return {Outcome{1.0, s, 1.0}};
  }
  std::vector<RealState> enumerate_real() const override { return {RealState{0}}; }
  std::vector<SimState> enumerate_sim() const override { return {SimState{0}}; }
  void reseed(std::uint64_t) override {}
  int horizon() const override { return 1; }

 private:
  std::string name_ = "loop";
  std::vector<std::string> action_names_ = {"loop"};
  std::vector<std::string> fields_ = {"i"};
};

}  // namespace

TEST_CASE("qtable storage and greedy tie-breaking") {
  QTable q(2, 3);
  CHECK(q.n_states() == 2);
  CHECK(q.n_actions == 3);
  q.set(0, 0, 1.0);
  q.set(0, 1, 1.0);
  q.set(0, 2, 0.5);
  q.set(1, 2, -0.25);
  CHECK(q.get(0, 1) == 1.0);
  CHECK(q.max_value(0) == 1.0);
  CHECK(q.greedy(0) == 0);  // tie between actions 0 and 1 goes to the lower index
  q.set(1, 0, -1.0);
  q.set(1, 1, -1.0);
  CHECK(q.greedy(1) == 2);
  CHECK(q.max_value(1) == -0.25);

  const Policy pi = greedy_policy(q);
  CHECK(pi.n_states() == 2);
  CHECK(pi.at(0) == 0);
  CHECK(pi.at(1) == 2);
  CHECK_THROWS_AS(pi.at(2), DomainError);
  CHECK_THROWS_AS(pi.at(-1), DomainError);
}

TEST_CASE("qtable csv round trip is bit exact") {
  QTable q(3, 2);
  q.set(0, 0, 1.0 / 3.0);
  q.set(0, 1, -0.1);
  q.set(1, 0, 1.4428709628733934e-106);
  q.set(1, 1, 12345.6789);
  q.set(2, 0, -1e300);

  std::vector<StateVec> states{StateVec{0, 0}, StateVec{0, 1}, StateVec{1, 0}};
  const std::string path = "/tmp/bs_test_qtable.csv";
  save_qtable_csv(q, {"a", "b"}, states, {"left", "right"}, path);

  const QTable loaded = load_qtable_csv(path, 2);
  REQUIRE(loaded.values.size() == q.values.size());
  for (std::size_t i = 0; i < q.values.size(); ++i) CHECK(loaded.values[i] == q.values[i]);

  CHECK_THROWS_AS(load_qtable_csv(path, 3), IoError);   // wrong action count
  CHECK_THROWS_AS(save_qtable_csv(q, {"a", "b"}, states, {"left"}, path), IoError);
  states.pop_back();
  CHECK_THROWS_AS(save_qtable_csv(q, {"a", "b"}, states, {"left", "right"}, path), IoError);
}

TEST_CASE("qtable load rejects corrupt files") {
  {
    CsvWriter w({"id", "i", "q_a"});
    w.add_row({"0", "0", "1.5"});
    w.add_row({"2", "2", "2.5"});  // id 1 missing
    w.write("/tmp/bs_test_qtable_gap.csv");
  }
  CHECK_THROWS_AS(load_qtable_csv("/tmp/bs_test_qtable_gap.csv", 1), IoError);
  {
    CsvWriter w({"id", "i", "q_a"});
    w.add_row({"0", "0", "oops"});
    w.write("/tmp/bs_test_qtable_bad.csv");
  }
  CHECK_THROWS_AS(load_qtable_csv("/tmp/bs_test_qtable_bad.csv", 1), IoError);
  CHECK_THROWS_AS(load_qtable_csv("/tmp/bs_test_qtable_missing.csv", 1), IoError);
}

TEST_CASE("value iteration solves a deterministic chain exactly") {
  ChainEnv env(3);
  const QTable q = value_iteration(env, Space::kReal, 0.9);
  // V(1) = 1 via advance; staying pays 0.05 + 0.9 V
  CHECK(q.get(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q.get(1, 1) == doctest::Approx(0.95).epsilon(1e-9));
  CHECK(q.get(0, 0) == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(q.get(0, 1) == doctest::Approx(0.86).epsilon(1e-9));
  // terminal row is never updated
  CHECK(q.get(2, 0) == 0.0);
  CHECK(q.get(2, 1) == 0.0);

  const Policy pi = greedy_policy(q);
  CHECK(pi.at(0) == 0);
  CHECK(pi.at(1) == 0);
}

TEST_CASE("value iteration handles cycles through discounting") {
  LoopEnv env;
  const QTable q = value_iteration(env, Space::kReal, 0.9, 1e-10);
  CHECK(q.get(0, 0) == doctest::Approx(10.0).epsilon(1e-7));  // 1 / (1 - 0.9)
  CHECK_THROWS_AS(value_iteration(env, Space::kReal, 0.9, 1e-10, 3), NumericError);
}

TEST_CASE("value iteration validates arguments") {
  ChainEnv env(3);
  CHECK_THROWS_AS(value_iteration(env, Space::kReal, 1.0), ConfigError);
  CHECK_THROWS_AS(value_iteration(env, Space::kReal, -0.1), ConfigError);
  CHECK_THROWS_AS(value_iteration(env, Space::kReal, 0.9, 0.0), ConfigError);
}

TEST_CASE("q-learning converges to the exact chain solution") {
  ChainEnv env(4);
  QLearnParams p;
  p.episodes = 3000;
  p.alpha = 0.5;
  p.gamma = 0.9;
  p.eps_start = 1.0;
  p.eps_end = 0.2;
  const QTable learned = train_q(env, Space::kReal, p, 17);
  const QTable exact = value_iteration(env, Space::kReal, 0.9);
  REQUIRE(learned.values.size() == exact.values.size());
  for (std::size_t i = 0; i < exact.values.size(); ++i)
    CHECK(learned.values[i] == doctest::Approx(exact.values[i]).epsilon(0.01));
}

TEST_CASE("q-learning is bit deterministic in its seed") {
  CatcherConfig cfg;
  cfg.width = 5;
  cfg.height = 4;
  cfg.right_region_start = 3;
  QLearnParams p;
  p.episodes = 300;

  CatcherEnv a(cfg, false, 0), b(cfg, false, 0), c(cfg, false, 0);
  const QTable qa = train_q(a, Space::kSim, p, 123);
  const QTable qb = train_q(b, Space::kSim, p, 123);
  const QTable qc = train_q(c, Space::kSim, p, 124);
  CHECK(qa.values == qb.values);
  CHECK(qa.values != qc.values);
}

TEST_CASE("observed-space solving requires a bijective projection") {
  CatcherConfig cfg;
  QLearnParams p;
  p.episodes = 1;

  CatcherEnv source(cfg, false, 0);
  CatcherEnv target(cfg, true, 0);
  CHECK_NOTHROW(train_q(source, Space::kSim, p, 1));
  CHECK_THROWS_AS(train_q(target, Space::kSim, p, 1), DomainError);  // hidden fruit kind aliases
  CHECK_THROWS_AS(value_iteration(target, Space::kSim, 0.95), DomainError);

  FlappyConfig fcfg;
  FlappyEnv ftarget(fcfg, true, 0);
  CHECK_THROWS_AS(train_q(ftarget, Space::kSim, p, 1), DomainError);
}

TEST_CASE("observed-space tables relabel the real-space solution on source envs") {
  CatcherConfig cfg;
  cfg.width = 4;
  cfg.height = 3;
  cfg.right_region_start = 2;
  CatcherEnv source(cfg, false, 0);
  const QTable q_real = value_iteration(source, Space::kReal, 0.95);
  const QTable q_sim = value_iteration(source, Space::kSim, 0.95);
  // the source enumerations pair up one-to-one in the same order
  CHECK(q_real.values == q_sim.values);
}

TEST_CASE("learning parameters are validated") {
  QLearnParams p;
  p.episodes = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = QLearnParams{};
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = QLearnParams{};
  p.gamma = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = QLearnParams{};
  p.eps_start = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = QLearnParams{};
  p.eps_end = -0.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  const KVConfig cfg = KVConfig::parse_text("rl.episodes = 10\nrl.alpha = 0.2\n", "rl.cfg");
  const QLearnParams parsed = QLearnParams::from_config(cfg);
  CHECK(parsed.episodes == 10);
  CHECK(parsed.alpha == 0.2);
  CHECK(parsed.gamma == 0.95);  // untouched defaults survive
}
