#include "blindspot/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"

namespace blindspot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// count * log(p); zero count contributes nothing even when p == 0.
inline double count_log(int count, double p) {
  if (count == 0) return 0.0;
  return static_cast<double>(count) * std::log(p);
}

inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Per-state label counts in ascending sim-id order (enumeration order is
// lexicographic in the state fields, so this is also lexicographic).
std::vector<AggregatedState> gather_counts(const FeedbackDataset& ds) {
  if (ds.events.empty()) throw NumericError("aggregation: empty feedback dataset");
  std::vector<LabelEvent> events = ds.events;
  std::sort(events.begin(), events.end(),
            [](const LabelEvent& a, const LabelEvent& b) { return a.sim_id < b.sim_id; });
  std::vector<AggregatedState> out;
  for (const auto& e : events) {
    if (out.empty() || out.back().sim_id != e.sim_id) {
      AggregatedState st;
      st.sim_id = e.sim_id;
      out.push_back(st);
    }
    if (e.label == 1)
      ++out.back().n1;
    else
      ++out.back().n0;
  }
  return out;
}

void finalize_state(AggregatedState& st, double posterior) {
  st.posterior_blind = posterior;
  st.label = posterior >= 0.5 ? 1 : 0;
  st.confidence = std::max(posterior, 1.0 - posterior);
}

}  // namespace

DsParams DsParams::from_config(const KVConfig& cfg) {
  DsParams p;
  p.tol = cfg.get_double("aggregate.tol", p.tol);
  p.max_iters = static_cast<int>(cfg.get_int("aggregate.max_iters", p.max_iters));
  p.pseudocount = cfg.get_double("aggregate.pseudocount", p.pseudocount);
  p.prior_min = cfg.get_double("aggregate.prior_min", p.prior_min);
  p.prior_max = cfg.get_double("aggregate.prior_max", p.prior_max);
  p.validate();
  return p;
}

void DsParams::validate() const {
  if (tol <= 0.0) throw ConfigError("aggregate.tol must be positive");
  if (max_iters < 1) throw ConfigError("aggregate.max_iters must be >= 1");
  if (pseudocount < 0.0) throw ConfigError("aggregate.pseudocount must be >= 0");
  if (prior_min <= 0.0 || prior_max >= 1.0 || prior_min > prior_max)
    throw ConfigError("aggregate prior clamp must satisfy 0 < min <= max < 1");
}

AggregatedDataset dawid_skene(const FeedbackDataset& ds, bool constrained,
                              const DsParams& params) {
  params.validate();
  AggregatedDataset out;
  out.method = constrained ? "ds-constrained" : "ds";
  out.states = gather_counts(ds);
  const std::size_t n = out.states.size();

  // Initialize posteriors with each state's observed label mean.
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& st = out.states[i];
    mu[i] = static_cast<double>(st.n1) / static_cast<double>(st.n0 + st.n1);
  }

  NoiseModel nm;
  const double pc = params.pseudocount;
  for (int iter = 1; iter <= params.max_iters; ++iter) {
    // M-step: prior and confusion rows from expected counts.
    double sum_mu = 0.0;
    double blind_n0 = 0.0, blind_n1 = 0.0;  // expected counts from blind states
    double safe_n0 = 0.0, safe_n1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& st = out.states[i];
      sum_mu += mu[i];
      blind_n0 += mu[i] * st.n0;
      blind_n1 += mu[i] * st.n1;
      safe_n0 += (1.0 - mu[i]) * st.n0;
      safe_n1 += (1.0 - mu[i]) * st.n1;
    }
    nm.prior = std::clamp(sum_mu / static_cast<double>(n), params.prior_min, params.prior_max);
    const double blind_denom = blind_n0 + blind_n1 + 2.0 * pc;
    nm.confusion[1][1] = blind_denom > 0.0 ? (blind_n1 + pc) / blind_denom : 0.5;
    nm.confusion[1][0] = 1.0 - nm.confusion[1][1];
    if (constrained) {
      nm.confusion[0][0] = 1.0;  // pinned: safe states never emit blind labels
      nm.confusion[0][1] = 0.0;
    } else {
      const double safe_denom = safe_n0 + safe_n1 + 2.0 * pc;
      nm.confusion[0][0] = safe_denom > 0.0 ? (safe_n0 + pc) / safe_denom : 0.5;
      nm.confusion[0][1] = 1.0 - nm.confusion[0][0];
    }

    // E-step: posteriors under the new parameters; accumulate the smoothed
    // EM objective (observed-data log-likelihood plus the Dirichlet
    // smoothing penalty the M-step maximizes). Raw likelihood can dip by a
    // hair near the fixed point under smoothing; this objective cannot.
    double ll = 0.0;
    if (pc > 0.0) {
      ll += pc * (std::log(nm.confusion[1][0]) + std::log(nm.confusion[1][1]));
      if (!constrained)
        ll += pc * (std::log(nm.confusion[0][0]) + std::log(nm.confusion[0][1]));
    }
    double max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& st = out.states[i];
      const double log_safe = std::log(1.0 - nm.prior) + count_log(st.n0, nm.confusion[0][0]) +
                              count_log(st.n1, nm.confusion[0][1]);
      const double log_blind = std::log(nm.prior) + count_log(st.n0, nm.confusion[1][0]) +
                               count_log(st.n1, nm.confusion[1][1]);
      const double log_z = log_sum_exp(log_safe, log_blind);
      ll += log_z;
      const double post = (log_blind == kNegInf) ? 0.0
                          : (log_safe == kNegInf) ? 1.0
                                                  : std::exp(log_blind - log_z);
      max_change = std::max(max_change, std::fabs(post - mu[i]));
      mu[i] = post;
    }
    out.loglik_trace.push_back(ll);
    out.em_iterations = iter;
    if (max_change < params.tol) break;
  }

  out.noise = nm;
  for (std::size_t i = 0; i < n; ++i) finalize_state(out.states[i], mu[i]);
  return out;
}

AggregatedDataset majority_vote(const FeedbackDataset& ds) {
  AggregatedDataset out;
  out.method = "mv";
  out.states = gather_counts(ds);
  for (auto& st : out.states)
    finalize_state(st, static_cast<double>(st.n1) / static_cast<double>(st.n0 + st.n1));
  return out;
}

AggregatedDataset all_labels(const FeedbackDataset& ds) {
  if (ds.events.empty()) throw NumericError("aggregation: empty feedback dataset");
  AggregatedDataset out;
  out.method = "al";
  out.instances = ds.events;
  return out;
}

AggregatedDataset aggregate(const FeedbackDataset& ds, const std::string& method,
                            const DsParams& params) {
  if (method == "ds") {
    const bool acceptability_grounded =
        ds.protocol == "R-A" || ds.protocol == "D-A" || ds.protocol == "C";
    return dawid_skene(ds, acceptability_grounded, params);
  }
  if (method == "ds-constrained") return dawid_skene(ds, true, params);
  if (method == "ds-unconstrained") return dawid_skene(ds, false, params);
  if (method == "mv") return majority_vote(ds);
  if (method == "al") return all_labels(ds);
  throw ConfigError("unknown aggregator '" + method +
                    "', expected ds, ds-constrained, ds-unconstrained, mv, or al");
}

void export_aggregated_csv(const AggregatedDataset& agg, const Environment& env,
                           const SimIndex& sim_index, const std::string& path) {
  std::vector<std::string> header = {"sim_id"};
  for (const auto& f : env.sim_fields()) header.push_back(f);
  header.insert(header.end(), {"n0", "n1", "posterior_blind", "label", "confidence"});

  CsvWriter w(header);
  auto state_row = [&](std::int32_t sim_id) {
    std::vector<std::string> row = {std::to_string(sim_id)};
    const StateVec& v = sim_index.state(sim_id).v;
    for (int k = 0; k < v.size(); ++k) row.push_back(std::to_string(v[k]));
    return row;
  };
  if (agg.method == "al") {
    for (const auto& e : agg.instances) {
      auto row = state_row(e.sim_id);
      row.insert(row.end(),
                 {std::to_string(e.label == 0 ? 1 : 0), std::to_string(e.label),
                  format_double(static_cast<double>(e.label)), std::to_string(e.label), "1"});
      w.add_row(std::move(row));
    }
  } else {
    for (const auto& st : agg.states) {
      auto row = state_row(st.sim_id);
      row.insert(row.end(),
                 {std::to_string(st.n0), std::to_string(st.n1), format_double(st.posterior_blind),
                  std::to_string(st.label), format_double(st.confidence)});
      w.add_row(std::move(row));
    }
  }
  w.write(path);
}

}  // namespace blindspot
