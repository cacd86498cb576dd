#include "por/collect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <queue>

namespace por::envs {

namespace {

struct CellNode {
  int i, j;
};

// A* over open cells, 8-connected without corner cutting.
std::vector<CellNode> astar_cells(const FourRoomGeometry& geo, CellNode from, CellNode to) {
  const int n = geo.grid_size;
  auto id = [n](int i, int j) { return j * n + i; };
  auto h = [&](int i, int j) {
    return std::hypot(static_cast<double>(i - to.i), static_cast<double>(j - to.j));
  };
  std::vector<double> dist(static_cast<size_t>(n) * n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(static_cast<size_t>(n) * n, -1);
  using QE = std::pair<double, int>;  // (f, cell id)
  std::priority_queue<QE, std::vector<QE>, std::greater<>> open;
  dist[id(from.i, from.j)] = 0.0;
  open.push({h(from.i, from.j), id(from.i, from.j)});

  const int dx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  const int dy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  while (!open.empty()) {
    auto [f, cur] = open.top();
    open.pop();
    int ci = cur % n, cj = cur / n;
    if (ci == to.i && cj == to.j) break;
    if (f > dist[cur] + h(ci, cj) + 1e-12) continue;
    for (int k = 0; k < 8; ++k) {
      int ni = ci + dx[k], nj = cj + dy[k];
      if (geo.cell_is_wall(ni, nj)) continue;
      if (dx[k] != 0 && dy[k] != 0) {
        // diagonal only when both orthogonal neighbours are open
        if (geo.cell_is_wall(ci + dx[k], cj) || geo.cell_is_wall(ci, cj + dy[k])) continue;
      }
      double step = (dx[k] != 0 && dy[k] != 0) ? std::numbers::sqrt2 : 1.0;
      double nd = dist[cur] + step;
      if (nd < dist[id(ni, nj)] - 1e-12) {
        dist[id(ni, nj)] = nd;
        prev[id(ni, nj)] = cur;
        open.push({nd + h(ni, nj), id(ni, nj)});
      }
    }
  }
  if (!std::isfinite(dist[id(to.i, to.j)])) return {};
  std::vector<CellNode> path;
  for (int cur = id(to.i, to.j); cur != -1; cur = prev[cur]) path.push_back({cur % n, cur / n});
  std::reverse(path.begin(), path.end());
  return path;
}

CellNode cell_of(const FourRoomGeometry& geo, Vec2 p) {
  return CellNode{static_cast<int>(std::floor(p.x - geo.origin)),
                  static_cast<int>(std::floor(p.y - geo.origin))};
}

Vec2 center_of(const FourRoomGeometry& geo, CellNode c) {
  return Vec2{geo.origin + c.i + 0.5, geo.origin + c.j + 0.5};
}

}  // namespace

GoalReachingController::GoalReachingController(const FourRoomGeometry& geo, Vec2 start,
                                               Vec2 target)
    : geo_(geo), target_(target) {
  auto cells = astar_cells(geo, cell_of(geo, start), cell_of(geo, target));
  if (cells.empty()) return;
  plan_found_ = true;
  for (size_t i = 1; i < cells.size(); ++i) waypoints_.push_back(center_of(geo, cells[i]));
  if (!waypoints_.empty()) waypoints_.pop_back();
  waypoints_.push_back(target_);  // final leg heads to the exact target
}

bool GoalReachingController::arrived(Vec2 pos) const {
  double dx = pos.x - target_.x, dy = pos.y - target_.y;
  return dx * dx + dy * dy <= 0.3 * 0.3;
}

Eigen::VectorXd GoalReachingController::action(Vec2 pos, Rng& rng, double noise_sigma) {
  const double lim = geo_.action_limit;
  // advance the waypoint cursor when close
  while (next_waypoint_ + 1 < waypoints_.size()) {
    Vec2 w = waypoints_[next_waypoint_];
    double dx = pos.x - w.x, dy = pos.y - w.y;
    if (dx * dx + dy * dy <= 0.3 * 0.3)
      ++next_waypoint_;
    else
      break;
  }
  Vec2 w = waypoints_.empty() ? target_ : waypoints_[next_waypoint_];
  Eigen::VectorXd a(2);
  a << std::clamp(w.x - pos.x, -lim, lim), std::clamp(w.y - pos.y, -lim, lim);
  a[0] = std::clamp(a[0] + noise_sigma * rng.normal(), -lim, lim);
  a[1] = std::clamp(a[1] + noise_sigma * rng.normal(), -lim, lim);
  return a;
}

data::TrajectoryDataset collect(const CollectorSpec& spec) {
  return collect(spec, geometry_of_task(task_from_env_id(spec.env_id)));
}

data::TrajectoryDataset collect(const CollectorSpec& spec, const FourRoomGeometry& geometry) {
  if (spec.n_transitions == 0) throw Error::usage("collect: n_transitions must be positive");
  if (spec.controller_fraction < 0.0 || spec.controller_fraction > 1.0)
    throw Error::usage("collect: controller fraction must be in [0, 1]");

  FourRoomTask task = task_from_env_id(spec.env_id);
  FourRoomEnv env(geometry, task);
  Rng rng(spec.seed);

  data::DatasetMeta meta;
  meta.name = spec.env_id + "-offline";
  meta.env_id = spec.env_id;
  meta.seed = spec.seed;
  meta.horizon = geometry.horizon;
  data::TrajectoryDataset ds(env.obs_dim(), env.act_dim(), meta);

  size_t remaining = spec.n_transitions;
  const double lim = geometry.action_limit;
  while (remaining > 0) {
    bool scripted = rng.uniform() < spec.controller_fraction;
    if (scripted) {
      // start and end sampled randomly at non-wall locations
      Vec2 start{};
      std::optional<GoalReachingController> controller;
      for (int attempt = 0; attempt < 50 && !controller; ++attempt) {
        start = env.sample_open_position(rng);
        Vec2 target = env.sample_open_position(rng);
        controller.emplace(geometry, start, target);
        if (!controller->plan_found()) controller.reset();
      }
      if (!controller)
        throw Error::runtime("collect: no reachable target found after 50 attempts");
      env.reset_at(start);
      Eigen::VectorXd obs = env.observation();
      ds.begin_trajectory();
      while (remaining > 0) {
        Eigen::VectorXd a = controller->action(env.position(), rng, spec.controller_noise);
        FourRoomStep st = env.step(a);
        data::Transition t;
        t.state = obs;
        t.action = a;
        t.reward = st.reward;
        t.next_state = st.obs;
        t.done = st.done;
        ds.push(std::move(t));
        --remaining;
        obs = st.obs;
        if (st.done || controller->arrived(env.position())) break;
      }
    } else {
      Vec2 start = env.sample_open_position(rng);
      env.reset_at(start);
      Eigen::VectorXd obs = env.observation();
      ds.begin_trajectory();
      for (int k = 0; k < spec.random_walk_steps && remaining > 0; ++k) {
        Eigen::VectorXd a(2);
        a << rng.uniform(-lim, lim), rng.uniform(-lim, lim);
        FourRoomStep st = env.step(a);
        data::Transition t;
        t.state = obs;
        t.action = a;
        t.reward = st.reward;
        t.next_state = st.obs;
        t.done = st.done;
        ds.push(std::move(t));
        --remaining;
        obs = st.obs;
        if (st.done) break;
      }
    }
  }
  ds.validate();
  return ds;
}

}  // namespace por::envs
