#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "por/dataset.hpp"

namespace por::envs {

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
  bool operator<(const Cell& o) const { return y < o.y || (y == o.y && x < o.x); }
};

// The eight compass moves, indexed 0..7.
inline constexpr std::array<Cell, 8> kGridOffsets = {{
    {1, 0},    // 0 E
    {1, 1},    // 1 NE
    {0, 1},    // 2 N
    {-1, 1},   // 3 NW
    {-1, 0},   // 4 W
    {-1, -1},  // 5 SW
    {0, -1},   // 6 S
    {1, -1},   // 7 SE
}};

int grid_action_from_name(const std::string& name);  // "E", "NE", ...
std::string grid_action_name(int action);

struct GridStep {
  Cell next;
  double reward;
  bool done;
};

// Deterministic 8-connected grid: out-of-bounds moves keep the agent in
// place; entering the goal pays 0, every other transition pays -1.
struct GridWorld {
  int width = 7;
  int height = 7;
  Cell start{0, 0};
  Cell goal{6, 6};

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
  }
  GridStep step(Cell s, int action) const;
};

// A hand-authored dataset layout for the gridworld: a few full start-to-goal
// trajectories plus loose single-step transitions at given cells.
struct ToyLayout {
  GridWorld grid;
  std::vector<std::vector<Cell>> trajectories;        // waypoint lists, start..goal
  std::vector<std::pair<Cell, int>> random_steps;     // (cell, action) singletons
};

// The canonical shipped layout: two axis-hugging suboptimal trajectories plus
// interior diagonal shortcut transitions. Frozen against the tabular oracles.
ToyLayout canonical_toy_layout();

ToyLayout load_toy_layout(const std::string& path);
void save_toy_layout(const ToyLayout& layout, const std::string& path);

// Expand a layout into a TrajectoryDataset (grid rewards/termination applied).
// Throws when a trajectory is not a connected start-to-goal path.
data::TrajectoryDataset build_toy_dataset(const ToyLayout& layout);

// Encode grid states as one-hot vectors of size width*height (for the neural
// value-learning cross-checks on tabular data).
data::TrajectoryDataset grid_dataset_onehot(const data::TrajectoryDataset& ds,
                                            const GridWorld& grid);

Cell cell_of_state(const Eigen::VectorXd& s);
Eigen::VectorXd state_of_cell(Cell c);

}  // namespace por::envs
