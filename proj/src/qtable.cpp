#include "blindspot/qtable.hpp"

#include <cstdlib>

#include "blindspot/csv.hpp"

namespace blindspot {

Policy greedy_policy(const QTable& q) {
  Policy p;
  const std::int32_t n = q.n_states();
  p.actions.reserve(static_cast<std::size_t>(n));
  for (std::int32_t s = 0; s < n; ++s) p.actions.push_back(q.greedy(s));
  return p;
}

void save_qtable_csv(const QTable& q, const std::vector<std::string>& field_names,
                     const std::vector<StateVec>& states,
                     const std::vector<std::string>& action_names, const std::string& path) {
  if (static_cast<std::int32_t>(states.size()) != q.n_states())
    throw IoError("qtable save: state count mismatch");
  if (static_cast<int>(action_names.size()) != q.n_actions)
    throw IoError("qtable save: action count mismatch");
  std::vector<std::string> header = {"id"};
  for (const auto& f : field_names) header.push_back(f);
  for (const auto& a : action_names) header.push_back("q_" + a);

  CsvWriter w(header);
  for (std::int32_t s = 0; s < q.n_states(); ++s) {
    std::vector<std::string> row = {std::to_string(s)};
    for (int k = 0; k < states[static_cast<std::size_t>(s)].size(); ++k)
      row.push_back(std::to_string(states[static_cast<std::size_t>(s)][k]));
    for (Action a = 0; a < q.n_actions; ++a) row.push_back(format_double(q.get(s, a)));
    w.add_row(std::move(row));
  }
  w.write(path);
}

QTable load_qtable_csv(const std::string& path, int n_actions) {
  const CsvTable t = read_csv(path);
  int q_cols = 0;
  for (const auto& h : t.header)
    if (h.rfind("q_", 0) == 0) ++q_cols;
  if (q_cols != n_actions)
    throw IoError("qtable load: expected " + std::to_string(n_actions) + " action columns, found " +
                  std::to_string(q_cols) + " in " + path);
  const int first_q = static_cast<int>(t.header.size()) - n_actions;
  const int id_col = t.col("id");

  QTable q(static_cast<std::int32_t>(t.rows.size()), n_actions);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    if (row[static_cast<std::size_t>(id_col)] != std::to_string(i))
      throw IoError("qtable load: non-contiguous id column in " + path);
    for (Action a = 0; a < n_actions; ++a) {
      const std::string& cell = row[static_cast<std::size_t>(first_q + a)];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw IoError("qtable load: bad value '" + cell + "' in " + path);
      q.set(static_cast<std::int32_t>(i), a, v);
    }
  }
  return q;
}

}  // namespace blindspot
