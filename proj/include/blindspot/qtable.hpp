#pragma once

// Dense tabular action-value storage plus greedy policies.
//
// A QTable is indexed by dense state id (from a StateIndex enumeration) and
// action. Argmax ties always break toward the lowest action index, so greedy
// policies are deterministic functions of the table contents.

#include <cstdint>
#include <string>
#include <vector>

#include "blindspot/error.hpp"
#include "blindspot/state.hpp"

namespace blindspot {

using Action = int;

struct QTable {
  int n_actions = 0;
  std::vector<double> values;  // row-major: [state_id * n_actions + action]

  QTable() = default;
  QTable(std::int32_t n_states, int n_actions_)
      : n_actions(n_actions_),
        values(static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions_), 0.0) {}

  std::int32_t n_states() const {
    return n_actions == 0 ? 0 : static_cast<std::int32_t>(values.size() / static_cast<std::size_t>(n_actions));
  }

  double get(std::int32_t sid, Action a) const {
    return values[static_cast<std::size_t>(sid) * static_cast<std::size_t>(n_actions) +
                  static_cast<std::size_t>(a)];
  }
  void set(std::int32_t sid, Action a, double v) {
    values[static_cast<std::size_t>(sid) * static_cast<std::size_t>(n_actions) +
           static_cast<std::size_t>(a)] = v;
  }

  // Highest action value at sid.
  double max_value(std::int32_t sid) const {
    double best = get(sid, 0);
    for (Action a = 1; a < n_actions; ++a) {
      const double v = get(sid, a);
      if (v > best) best = v;
    }
    return best;
  }

  // Argmax action, lowest index on ties.
  Action greedy(std::int32_t sid) const {
    Action best = 0;
    double best_v = get(sid, 0);
    for (Action a = 1; a < n_actions; ++a) {
      const double v = get(sid, a);
      if (v > best_v) {
        best_v = v;
        best = a;
      }
    }
    return best;
  }
};

// A deterministic policy over dense state ids.
struct Policy {
  std::vector<Action> actions;

  Action at(std::int32_t sid) const {
    if (sid < 0 || static_cast<std::size_t>(sid) >= actions.size())
      throw DomainError("policy: state id out of range");
    return actions[static_cast<std::size_t>(sid)];
  }
  std::int32_t n_states() const { return static_cast<std::int32_t>(actions.size()); }
};

// Greedy policy of a QTable (lowest action index on ties).
Policy greedy_policy(const QTable& q);

// CSV round-trip. Columns: id, one per state field, then q_<action> for each
// action. Values use shortest round-trip formatting, so load(save(q)) == q
// bit-for-bit.
void save_qtable_csv(const QTable& q, const std::vector<std::string>& field_names,
                     const std::vector<StateVec>& states,
                     const std::vector<std::string>& action_names, const std::string& path);

// Loads a table written by save_qtable_csv. Validates the id column is the
// contiguous sequence 0..n-1 and the action column count matches n_actions.
QTable load_qtable_csv(const std::string& path, int n_actions);

}  // namespace blindspot
