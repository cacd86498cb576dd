#include "por/gridworld.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace por::envs {

namespace {
const std::array<std::string, 8> kActionNames = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};
}

int grid_action_from_name(const std::string& name) {
  for (int i = 0; i < 8; ++i)
    if (kActionNames[i] == name) return i;
  throw Error::data("unknown grid action name: " + name);
}

std::string grid_action_name(int action) {
  if (action < 0 || action >= 8) throw Error::data("grid action index out of range");
  return kActionNames[action];
}

GridStep GridWorld::step(Cell s, int action) const {
  if (action < 0 || action >= 8)
    throw Error::data("grid step: invalid action index " + std::to_string(action));
  if (!in_bounds(s)) throw Error::data("grid step: state out of bounds");
  Cell n{s.x + kGridOffsets[action].x, s.y + kGridOffsets[action].y};
  if (!in_bounds(n)) n = s;
  bool entered_goal = n == goal;
  return GridStep{n, entered_goal ? 0.0 : -1.0, entered_goal};
}

ToyLayout canonical_toy_layout() {
  ToyLayout layout;
  layout.grid = GridWorld{};  // 7x7, start (0,0), goal (6,6)

  // Two suboptimal wall-hugging trajectories.
  std::vector<Cell> up_then_right;
  for (int y = 0; y <= 6; ++y) up_then_right.push_back({0, y});
  for (int x = 1; x <= 6; ++x) up_then_right.push_back({x, 6});
  std::vector<Cell> right_then_up;
  for (int x = 0; x <= 6; ++x) right_then_up.push_back({x, 0});
  for (int y = 1; y <= 6; ++y) right_then_up.push_back({6, y});
  layout.trajectories = {up_then_right, right_then_up};

  // Loose diagonal transitions in the interior. The two corner cuts shorten
  // the in-dataset routes to 11 steps; the interior chains open the 7/8-step
  // diagonal routes that only state-stitching can use.
  const int ne = grid_action_from_name("NE");
  layout.random_steps = {
      {{0, 5}, ne}, {{5, 0}, ne},                              // corner cuts
      {{1, 2}, ne}, {{2, 3}, ne}, {{3, 4}, ne}, {{4, 5}, ne},  // upper chain
      {{3, 1}, ne}, {{4, 2}, ne}, {{5, 3}, ne},                // lower chain
  };
  return layout;
}

data::TrajectoryDataset build_toy_dataset(const ToyLayout& layout) {
  const GridWorld& g = layout.grid;
  data::DatasetMeta meta;
  meta.name = "gridworld-toy";
  meta.env_id = "gridworld";
  meta.horizon = g.width * g.height;
  data::TrajectoryDataset ds(2, 1, meta);

  auto action_between = [&](Cell a, Cell b) -> int {
    for (int i = 0; i < 8; ++i)
      if (Cell{a.x + kGridOffsets[i].x, a.y + kGridOffsets[i].y} == b) return i;
    throw Error::data("toy layout: cells (" + std::to_string(a.x) + "," + std::to_string(a.y) +
                      ") and (" + std::to_string(b.x) + "," + std::to_string(b.y) +
                      ") are not 8-adjacent");
  };

  for (const auto& traj : layout.trajectories) {
    if (traj.size() < 2) throw Error::data("toy layout: trajectory needs at least two cells");
    if (!(traj.front() == g.start) || !(traj.back() == g.goal))
      throw Error::data("toy layout: trajectory does not connect start to goal");
    ds.begin_trajectory();
    for (size_t i = 0; i + 1 < traj.size(); ++i) {
      int a = action_between(traj[i], traj[i + 1]);
      GridStep st = g.step(traj[i], a);
      if (!(st.next == traj[i + 1]))
        throw Error::data("toy layout: dynamics disagree with waypoint list");
      data::Transition t;
      t.state = state_of_cell(traj[i]);
      t.action = Eigen::VectorXd::Constant(1, static_cast<double>(a));
      t.reward = st.reward;
      t.next_state = state_of_cell(st.next);
      t.done = st.done;
      ds.push(std::move(t));
    }
  }
  for (const auto& [cell, action] : layout.random_steps) {
    GridStep st = g.step(cell, action);
    data::Transition t;
    t.state = state_of_cell(cell);
    t.action = Eigen::VectorXd::Constant(1, static_cast<double>(action));
    t.reward = st.reward;
    t.next_state = state_of_cell(st.next);
    t.done = st.done;
    ds.begin_trajectory();
    ds.push(std::move(t));
  }
  ds.validate();
  return ds;
}

ToyLayout load_toy_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::data("cannot open layout file: " + path);
  ToyLayout layout;
  layout.trajectories.clear();
  layout.random_steps.clear();
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "grid") {
      ss >> layout.grid.width >> layout.grid.height;
    } else if (tag == "start") {
      ss >> layout.grid.start.x >> layout.grid.start.y;
    } else if (tag == "goal") {
      ss >> layout.grid.goal.x >> layout.grid.goal.y;
    } else if (tag == "trajectory") {
      std::vector<Cell> cells;
      int x, y;
      while (ss >> x >> y) cells.push_back({x, y});
      layout.trajectories.push_back(std::move(cells));
    } else if (tag == "step") {
      int x, y;
      std::string a;
      if (!(ss >> x >> y >> a))
        throw Error::data("layout " + path + ": malformed step on line " +
                          std::to_string(line_no));
      layout.random_steps.push_back({{x, y}, grid_action_from_name(a)});
    } else {
      throw Error::data("layout " + path + ": unknown tag '" + tag + "' on line " +
                        std::to_string(line_no));
    }
  }
  return layout;
}

void save_toy_layout(const ToyLayout& layout, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error::data("cannot write layout file: " + path);
  out << "# gridworld dataset layout\n";
  out << "grid " << layout.grid.width << " " << layout.grid.height << "\n";
  out << "start " << layout.grid.start.x << " " << layout.grid.start.y << "\n";
  out << "goal " << layout.grid.goal.x << " " << layout.grid.goal.y << "\n";
  for (const auto& traj : layout.trajectories) {
    out << "trajectory";
    for (const auto& c : traj) out << " " << c.x << " " << c.y;
    out << "\n";
  }
  for (const auto& [cell, action] : layout.random_steps)
    out << "step " << cell.x << " " << cell.y << " " << grid_action_name(action) << "\n";
}

data::TrajectoryDataset grid_dataset_onehot(const data::TrajectoryDataset& ds,
                                            const GridWorld& grid) {
  const int dim = grid.width * grid.height;
  auto onehot = [&](const Eigen::VectorXd& s) {
    Cell c = cell_of_state(s);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v[c.y * grid.width + c.x] = 1.0;
    return v;
  };
  data::TrajectoryDataset out(dim, ds.act_dim(), ds.meta());
  for (size_t tr = 0; tr < ds.num_trajectories(); ++tr) {
    out.begin_trajectory();
    for (size_t i = ds.traj_begin(tr); i < ds.traj_end(tr); ++i) {
      data::Transition t = ds.at(i);
      t.state = onehot(t.state);
      t.next_state = onehot(t.next_state);
      out.push(std::move(t));
    }
  }
  return out;
}

Cell cell_of_state(const Eigen::VectorXd& s) {
  return Cell{static_cast<int>(std::lround(s[0])), static_cast<int>(std::lround(s[1]))};
}

Eigen::VectorXd state_of_cell(Cell c) {
  Eigen::VectorXd v(2);
  v << static_cast<double>(c.x), static_cast<double>(c.y);
  return v;
}

}  // namespace por::envs
