#pragma once

// State representations shared by every module.
//
// A state is a short fixed-capacity vector of small integers. Observed
// (simulator) and full (real-world) states use distinct wrapper types so the
// compiler rejects accidental mixing; both wrap the same StateVec storage.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <vector>

#include "blindspot/error.hpp"

namespace blindspot {

inline constexpr int kMaxStateFields = 8;

struct StateVec {
  std::array<std::int16_t, kMaxStateFields> f{};
  std::uint8_t n = 0;

  StateVec() = default;
  StateVec(std::initializer_list<int> vals) {
    if (vals.size() > kMaxStateFields)
      throw DomainError("state has too many fields");
    for (int v : vals) f[n++] = static_cast<std::int16_t>(v);
  }

  int size() const { return n; }
  int operator[](int i) const { return f[static_cast<std::size_t>(i)]; }
  void set(int i, int v) { f[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(v); }
  void push_back(int v) {
    if (n >= kMaxStateFields) throw DomainError("state has too many fields");
    f[n++] = static_cast<std::int16_t>(v);
  }

  friend bool operator==(const StateVec& a, const StateVec& b) {
    if (a.n != b.n) return false;
    for (int i = 0; i < a.n; ++i)
      if (a.f[static_cast<std::size_t>(i)] != b.f[static_cast<std::size_t>(i)]) return false;
    return true;
  }

  // Lexicographic order; shorter vectors sort first among equal prefixes.
  friend bool operator<(const StateVec& a, const StateVec& b) {
    const int m = a.n < b.n ? a.n : b.n;
    for (int i = 0; i < m; ++i) {
      const auto av = a.f[static_cast<std::size_t>(i)];
      const auto bv = b.f[static_cast<std::size_t>(i)];
      if (av != bv) return av < bv;
    }
    return a.n < b.n;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t byte) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    };
    mix(n);
    for (int i = 0; i < n; ++i) {
      const auto v = static_cast<std::uint16_t>(f[static_cast<std::size_t>(i)]);
      mix(v & 0xffu);
      mix(v >> 8);
    }
    return h;
  }

  std::string to_string() const {
    std::string s = "(";
    for (int i = 0; i < n; ++i) {
      if (i) s += ",";
      s += std::to_string(f[static_cast<std::size_t>(i)]);
    }
    s += ")";
    return s;
  }
};

// Full environment state: includes hidden features the agent cannot observe.
struct RealState {
  StateVec v;
  RealState() = default;
  explicit RealState(StateVec sv) : v(sv) {}
  RealState(std::initializer_list<int> vals) : v(vals) {}
  friend bool operator==(const RealState& a, const RealState& b) { return a.v == b.v; }
  friend bool operator<(const RealState& a, const RealState& b) { return a.v < b.v; }
};

// Observed state: what the agent's sensors report (hidden features removed).
struct SimState {
  StateVec v;
  SimState() = default;
  explicit SimState(StateVec sv) : v(sv) {}
  SimState(std::initializer_list<int> vals) : v(vals) {}
  friend bool operator==(const SimState& a, const SimState& b) { return a.v == b.v; }
  friend bool operator<(const SimState& a, const SimState& b) { return a.v < b.v; }
};

struct RealStateHash {
  std::size_t operator()(const RealState& s) const { return static_cast<std::size_t>(s.v.hash()); }
};
struct SimStateHash {
  std::size_t operator()(const SimState& s) const { return static_cast<std::size_t>(s.v.hash()); }
};

// Bidirectional state <-> dense id mapping over a fixed enumeration.
// Ids follow the enumeration order handed to the constructor.
template <typename TState, typename THash>
class StateIndexT {
 public:
  StateIndexT() = default;
  explicit StateIndexT(std::vector<TState> states) : states_(std::move(states)) {
    ids_.reserve(states_.size() * 2);
    for (std::size_t i = 0; i < states_.size(); ++i) {
      auto [it, inserted] = ids_.emplace(states_[i], static_cast<std::int32_t>(i));
      if (!inserted) throw DomainError("duplicate state in enumeration: " + states_[i].v.to_string());
    }
  }

  std::int32_t size() const { return static_cast<std::int32_t>(states_.size()); }
  bool contains(const TState& s) const { return ids_.find(s) != ids_.end(); }

  std::int32_t id_of(const TState& s) const {
    auto it = ids_.find(s);
    if (it == ids_.end()) throw DomainError("state not in enumeration: " + s.v.to_string());
    return it->second;
  }

  const TState& state(std::int32_t id) const {
    if (id < 0 || id >= size()) throw DomainError("state id out of range");
    return states_[static_cast<std::size_t>(id)];
  }

  const std::vector<TState>& states() const { return states_; }

 private:
  std::vector<TState> states_;
  std::unordered_map<TState, std::int32_t, THash> ids_;
};

using RealIndex = StateIndexT<RealState, RealStateHash>;
using SimIndex = StateIndexT<SimState, SimStateHash>;

}  // namespace blindspot
