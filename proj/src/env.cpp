#include "blindspot/env.hpp"

#include "blindspot/catcher.hpp"
#include "blindspot/csv.hpp"
#include "blindspot/error.hpp"
#include "blindspot/flappybird.hpp"

namespace blindspot {

EnvPair make_env_pair(const std::string& domain, const KVConfig& cfg, std::uint64_t seed) {
  EnvPair pair;
  const std::uint64_t source_seed = derive_seed(seed, "env", "source");
  const std::uint64_t target_seed = derive_seed(seed, "env", "target");
  if (domain == "catcher") {
    const auto c = CatcherConfig::from_config(cfg);
    pair.source = std::make_unique<CatcherEnv>(c, false, source_seed);
    pair.target = std::make_unique<CatcherEnv>(c, true, target_seed);
  } else if (domain == "flappybird") {
    const auto c = FlappyConfig::from_config(cfg);
    pair.source = std::make_unique<FlappyEnv>(c, false, source_seed);
    pair.target = std::make_unique<FlappyEnv>(c, true, target_seed);
  } else {
    throw ConfigError("unknown domain '" + domain + "', expected catcher or flappybird");
  }
  return pair;
}

void export_enumeration_csv(const Environment& env, const std::string& path) {
  std::vector<std::string> header = {"kind", "id"};
  for (const auto& f : env.real_fields()) header.push_back("real_" + f);
  for (const auto& f : env.sim_fields()) header.push_back("sim_" + f);
  header.push_back("sim_id");

  const auto reals = env.enumerate_real();
  const auto sims = env.enumerate_sim();
  SimIndex sim_index(sims);

  CsvWriter w(header);
  const std::size_t n_real_fields = env.real_fields().size();
  const std::size_t n_sim_fields = env.sim_fields().size();
  for (std::size_t i = 0; i < reals.size(); ++i) {
    std::vector<std::string> row = {"real", std::to_string(i)};
    for (int k = 0; k < reals[i].v.size(); ++k) row.push_back(std::to_string(reals[i].v[k]));
    for (std::size_t k = 0; k < n_sim_fields; ++k) row.push_back("");
    row.push_back(std::to_string(sim_index.id_of(env.sim_observe(reals[i]))));
    w.add_row(std::move(row));
  }
  for (std::size_t i = 0; i < sims.size(); ++i) {
    std::vector<std::string> row = {"sim", std::to_string(i)};
    for (std::size_t k = 0; k < n_real_fields; ++k) row.push_back("");
    for (int k = 0; k < sims[i].v.size(); ++k) row.push_back(std::to_string(sims[i].v[k]));
    row.push_back("");
    w.add_row(std::move(row));
  }
  w.write(path);
}

}  // namespace blindspot
