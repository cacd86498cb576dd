#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "por/gridworld.hpp"

namespace por::tabular {

using envs::Cell;
using envs::GridWorld;

// Value table over grid cells. Cells never observed as a dataset source (and
// unable to reach the goal through dataset transitions) are simply absent.
struct TabularValue {
  std::map<Cell, double> values;
  double gamma = 1.0;
  double tolerance = 1e-9;

  std::optional<double> at(Cell c) const {
    auto it = values.find(c);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
};

struct ValueIterationResult {
  TabularValue value;
  std::vector<Cell> disconnected;  // dataset source cells that cannot reach the goal
  int sweeps = 0;
};

// One dataset transition viewed tabularly.
struct GridTransition {
  Cell from;
  int action;
  double reward;
  Cell to;
  bool done;
};

// Cell-indexed view of a gridworld dataset.
class GridDatasetIndex {
 public:
  explicit GridDatasetIndex(const data::TrajectoryDataset& ds);

  const std::vector<GridTransition>& from(Cell c) const;
  bool has_source(Cell c) const { return by_source_.count(c) > 0; }
  bool seen(Cell c) const { return seen_.count(c) > 0; }
  const std::set<Cell>& source_cells() const { return sources_; }

 private:
  std::map<Cell, std::vector<GridTransition>> by_source_;
  std::set<Cell> sources_;
  std::set<Cell> seen_;  // sources and targets
  std::vector<GridTransition> empty_;
};

// Bellman optimality fixed point restricted to dataset transitions.
// Values propagate only from transitions whose (possibly terminal) target is
// already valued, so cells with no dataset route to the goal stay absent and
// are reported as disconnected.
ValueIterationResult dataset_value_iteration(const data::TrajectoryDataset& ds, double gamma,
                                             double tolerance = 1e-9, int max_sweeps = 100000);

// Greedy one-step backup q(s,a) = r + gamma * (done ? 0 : V(s')) over the
// allowed action set; ties broken by lowest action index. Returns all argmax
// ties so callers can enumerate equal-valued first moves.
struct ActionChoice {
  int action = -1;
  double backup = 0.0;
  std::vector<int> tied_actions;  // all argmax-tied actions (includes .action)
};

// Action-stitching: restricted to dataset transitions out of s.
ActionChoice action_stitch_action(const TabularValue& v, const GridDatasetIndex& index, Cell s);

// State-stitching: all 8 actions under the true dynamics, restricted to next
// states that are valued in the dataset (or terminal).
ActionChoice state_stitch_action(const TabularValue& v, const GridDatasetIndex& index,
                                 const GridWorld& grid, Cell s);

enum class StitchMode { kAction, kState };

struct RolloutResult {
  std::vector<Cell> path;  // includes start and final cell
  bool reached_goal = false;
};

// Deterministic greedy rollout under true grid dynamics (lowest-index
// tie-break at every step). Throws when the stitcher has no valued candidate.
RolloutResult stitch_rollout(const TabularValue& v, const GridDatasetIndex& index,
                             const GridWorld& grid, Cell start, StitchMode mode,
                             int max_steps = 500);

// Enumerate every argmax-tied first action, then roll out deterministically;
// returns the set of resulting path lengths (only goal-reaching rollouts).
std::set<int> stitch_path_lengths(const TabularValue& v, const GridDatasetIndex& index,
                                  const GridWorld& grid, Cell start, StitchMode mode,
                                  int max_steps = 500);

// ASCII rendering of a rollout over the grid (start S, goal G, path *).
std::string render_path(const GridWorld& grid, const std::vector<Cell>& path);

}  // namespace por::tabular
