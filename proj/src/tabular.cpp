#include "por/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace por::tabular {

GridDatasetIndex::GridDatasetIndex(const data::TrajectoryDataset& ds) {
  for (const auto& t : ds.transitions()) {
    GridTransition g;
    g.from = envs::cell_of_state(t.state);
    g.action = t.has_action() ? static_cast<int>(std::lround(t.action[0])) : -1;
    g.reward = t.reward;
    g.to = envs::cell_of_state(t.next_state);
    g.done = t.done;
    sources_.insert(g.from);
    seen_.insert(g.from);
    seen_.insert(g.to);
    by_source_[g.from].push_back(g);
  }
}

const std::vector<GridTransition>& GridDatasetIndex::from(Cell c) const {
  auto it = by_source_.find(c);
  return it == by_source_.end() ? empty_ : it->second;
}

ValueIterationResult dataset_value_iteration(const data::TrajectoryDataset& ds, double gamma,
                                             double tolerance, int max_sweeps) {
  if (gamma <= 0.0 || gamma > 1.0)
    throw Error::data("dataset_value_iteration: gamma must be in (0, 1]");
  GridDatasetIndex index(ds);

  ValueIterationResult result;
  result.value.gamma = gamma;
  result.value.tolerance = tolerance;
  auto& v = result.value.values;

  int sweep = 0;
  double delta = 0.0;
  do {
    delta = 0.0;
    ++sweep;
    for (const Cell& s : index.source_cells()) {
      double best = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (const auto& t : index.from(s)) {
        double backup;
        if (t.done) {
          backup = t.reward;
        } else {
          auto tv = result.value.at(t.to);
          if (!tv) continue;  // unvalued target cannot support a backup yet
          backup = t.reward + gamma * *tv;
        }
        best = std::max(best, backup);
        any = true;
      }
      if (!any) continue;
      auto it = v.find(s);
      if (it == v.end()) {
        v[s] = best;
        delta = std::max(delta, 1.0);  // newly valued, keep sweeping
      } else {
        delta = std::max(delta, std::abs(it->second - best));
        it->second = best;
      }
    }
    if (sweep >= max_sweeps)
      throw Error::runtime("dataset_value_iteration: no convergence after " +
                           std::to_string(max_sweeps) + " sweeps");
  } while (delta > tolerance);
  result.sweeps = sweep;

  for (const Cell& s : index.source_cells())
    if (!v.count(s)) result.disconnected.push_back(s);
  return result;
}

namespace {
// Shared argmax over (action, backup) candidates with lowest-index tie-break.
ActionChoice pick_best(std::vector<std::pair<int, double>>& candidates, const char* who,
                       Cell s) {
  if (candidates.empty())
    throw Error::runtime(std::string(who) + ": no valued candidate transition at cell (" +
                         std::to_string(s.x) + "," + std::to_string(s.y) + ")");
  std::sort(candidates.begin(), candidates.end());
  ActionChoice choice;
  choice.backup = -std::numeric_limits<double>::infinity();
  for (const auto& [a, q] : candidates) choice.backup = std::max(choice.backup, q);
  for (const auto& [a, q] : candidates) {
    if (q < choice.backup - 1e-12) continue;
    if (choice.tied_actions.empty() || choice.tied_actions.back() != a)
      choice.tied_actions.push_back(a);
  }
  choice.action = choice.tied_actions.front();
  return choice;
}
}  // namespace

ActionChoice action_stitch_action(const TabularValue& v, const GridDatasetIndex& index, Cell s) {
  if (!index.has_source(s))
    throw Error::runtime("action_stitch: cell (" + std::to_string(s.x) + "," +
                         std::to_string(s.y) + ") absent from dataset");
  std::vector<std::pair<int, double>> candidates;
  for (const auto& t : index.from(s)) {
    double q;
    if (t.done) {
      q = t.reward;
    } else {
      auto tv = v.at(t.to);
      if (!tv) continue;
      q = t.reward + v.gamma * *tv;
    }
    candidates.push_back({t.action, q});
  }
  return pick_best(candidates, "action_stitch", s);
}

ActionChoice state_stitch_action(const TabularValue& v, const GridDatasetIndex& index,
                                 const GridWorld& grid, Cell s) {
  std::vector<std::pair<int, double>> candidates;
  for (int a = 0; a < 8; ++a) {
    envs::GridStep st = grid.step(s, a);
    double q;
    if (st.done) {
      if (!index.seen(st.next)) continue;  // the goal too must appear in the dataset
      q = st.reward;
    } else {
      if (!index.has_source(st.next)) continue;  // next state must exist in the dataset
      auto tv = v.at(st.next);
      if (!tv) continue;
      q = st.reward + v.gamma * *tv;
    }
    candidates.push_back({a, q});
  }
  return pick_best(candidates, "state_stitch", s);
}

namespace {
RolloutResult rollout_from(const TabularValue& v, const GridDatasetIndex& index,
                           const GridWorld& grid, Cell start, StitchMode mode, int max_steps,
                           std::optional<int> forced_first_action) {
  RolloutResult r;
  r.path.push_back(start);
  Cell s = start;
  for (int step = 0; step < max_steps; ++step) {
    int a;
    if (step == 0 && forced_first_action) {
      a = *forced_first_action;
    } else {
      ActionChoice c = mode == StitchMode::kAction ? action_stitch_action(v, index, s)
                                                   : state_stitch_action(v, index, grid, s);
      a = c.action;
    }
    envs::GridStep st = grid.step(s, a);
    r.path.push_back(st.next);
    s = st.next;
    if (st.done) {
      r.reached_goal = true;
      return r;
    }
  }
  return r;
}
}  // namespace

RolloutResult stitch_rollout(const TabularValue& v, const GridDatasetIndex& index,
                             const GridWorld& grid, Cell start, StitchMode mode, int max_steps) {
  return rollout_from(v, index, grid, start, mode, max_steps, std::nullopt);
}

std::set<int> stitch_path_lengths(const TabularValue& v, const GridDatasetIndex& index,
                                  const GridWorld& grid, Cell start, StitchMode mode,
                                  int max_steps) {
  ActionChoice first = mode == StitchMode::kAction
                           ? action_stitch_action(v, index, start)
                           : state_stitch_action(v, index, grid, start);
  std::set<int> lengths;
  for (int a : first.tied_actions) {
    RolloutResult r = rollout_from(v, index, grid, start, mode, max_steps, a);
    if (r.reached_goal) lengths.insert(static_cast<int>(r.path.size()) - 1);
  }
  return lengths;
}

std::string render_path(const GridWorld& grid, const std::vector<Cell>& path) {
  std::vector<std::string> rows(grid.height, std::string(grid.width, '.'));
  for (const Cell& c : path) rows[c.y][c.x] = '*';
  rows[grid.start.y][grid.start.x] = 'S';
  rows[grid.goal.y][grid.goal.x] = 'G';
  std::ostringstream os;
  for (int y = grid.height - 1; y >= 0; --y) os << rows[y] << "\n";  // y grows upward
  return os.str();
}

}  // namespace por::tabular
