#pragma once

// Feedback collection protocols.
//
// Five protocols produce per-state safe/blind labels from oracle judgments,
// differing in which states get visited and in what the oracle reveals:
//
//   R-A  : states sampled uniformly from the target's non-terminal real
//          space; label 1 iff the agent's action there is unacceptable.
//   R-AM : same visits; label 1 iff the agent's action differs from the
//          oracle's action (acceptable mismatches become noisy 1s).
//   D-A  : the oracle demonstrates full episodes; every visited state is
//          labeled by acceptability of the agent's intended action.
//   D-AM : same trajectories; labeled by action mismatch.
//   C    : the agent acts; the oracle overrides unacceptable actions
//          (label 1, executes its own action) and stays silent otherwise
//          (label 0, agent's action executes).
//
// Every labeled visit consumes one unit of budget; demonstration and
// correction episodes truncate mid-episode when the budget runs out. Labels
// attach to the observed (sim) state of the visit; the provenance log keeps
// the underlying real state for bias analysis.

#include <cstdint>
#include <string>
#include <vector>

#include "blindspot/oracle.hpp"

namespace blindspot {

enum class ProtocolKind {
  kRandomAcceptable,   // R-A
  kRandomMismatch,     // R-AM
  kDemoAcceptable,     // D-A
  kDemoMismatch,       // D-AM
  kCorrections,        // C
};

ProtocolKind parse_protocol(const std::string& name);
const std::string& protocol_name(ProtocolKind kind);

struct LabelEvent {
  std::int32_t episode = 0;
  std::int32_t step = 0;
  std::int32_t real_id = 0;
  std::int32_t sim_id = 0;
  int label = 0;  // 1 = blind-spot evidence, 0 = safe
};

struct FeedbackDataset {
  std::string protocol;
  std::uint64_t seed = 0;
  long long budget = 0;
  std::vector<LabelEvent> events;  // exactly budget entries (or fewer only if
                                   // the sampled space is empty)

  std::int64_t total_labels() const { return static_cast<std::int64_t>(events.size()); }
  // Distinct labeled sim ids, ascending.
  std::vector<std::int32_t> seen_sim_ids() const;
};

// Collects `budget` labels with the given protocol. `env` must be the same
// target environment the oracle was built on; it is reseeded from `seed`.
FeedbackDataset collect_feedback(Environment& env, const Oracle& oracle, ProtocolKind kind,
                                 long long budget, std::uint64_t seed);

// Feedback CSV: episode, step, real_id, real fields, sim_id, sim fields, label.
void export_feedback_csv(const FeedbackDataset& ds, const Environment& env,
                         const RealIndex& real_index, const SimIndex& sim_index,
                         const std::string& path);
FeedbackDataset import_feedback_csv(const std::string& path, const std::string& protocol,
                                    std::uint64_t seed);

}  // namespace blindspot
