#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "por/common.hpp"
#include "por/dataset.hpp"

namespace por::envs {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open [x0,x1) x [y0,y1)
  bool contains(double x, double y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

// Geometry of a four-room task on an NxN cell grid. Coordinates are centered:
// cell (i, j) spans [i + origin, i + 1 + origin) on each axis, with origin
// chosen so the arena is symmetric around 0 and fits the observation box.
struct FourRoomGeometry {
  int grid_size = 19;
  double origin = -9.5;
  double action_limit = 0.1;  // actions clipped to [-limit, limit]^2
  int horizon = 500;

  // Interior wall lines: one vertical (at column wall_col) and one horizontal
  // (at row wall_row); the listed door cells in each line are open.
  int wall_col = 9;
  int wall_row = 9;
  std::vector<int> vline_doors;  // rows of open cells in the vertical wall
  std::vector<int> hline_doors;  // cols of open cells in the horizontal wall

  std::vector<Rect> rivers;  // world coordinates

  Vec2 start;
  Vec2 goal;
  double goal_radius = 0.5;
  std::optional<Vec2> key;
  double key_radius = 0.8;
  double start_jitter = 1.0;  // eval reset samples within this radius of start

  bool cell_is_wall(int i, int j) const;
  bool position_is_wall(double x, double y) const;
  bool in_river(double x, double y) const;
  double low() const { return origin; }
  double high() const { return origin + grid_size; }

  static FourRoomGeometry task_a();
  static FourRoomGeometry task_b();
  static FourRoomGeometry task_c();
  static FourRoomGeometry from_config_text(const std::string& text, const std::string& origin_name);
  static FourRoomGeometry load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_config_text() const;
};

enum class FourRoomTask { kA, kB, kC };

FourRoomTask task_from_env_id(const std::string& env_id);  // "fourroom-a" etc.
std::string env_id_of_task(FourRoomTask task);
FourRoomGeometry geometry_of_task(FourRoomTask task);

struct FourRoomStep {
  Eigen::VectorXd obs;
  double reward = 0.0;
  bool done = false;
  bool entered_river = false;
  bool picked_key = false;
  bool reached_goal = false;
};

// Continuous four-room point navigation. Observation is the (x, y) position;
// actions are per-axis displacements clipped to the action box. Movement is
// resolved against walls one axis at a time, which cannot tunnel since the
// step limit is well below the cell size.
class FourRoomEnv {
 public:
  FourRoomEnv(FourRoomGeometry geometry, FourRoomTask task);

  const FourRoomGeometry& geometry() const { return geo_; }
  FourRoomTask task() const { return task_; }
  int obs_dim() const { return 2; }
  int act_dim() const { return 2; }

  // Reset near the task start (uniform within start_jitter, rejecting walls).
  Eigen::VectorXd reset(Rng& rng);
  // Reset to an exact position (collector use).
  Eigen::VectorXd reset_at(Vec2 position);

  FourRoomStep step(const Eigen::VectorXd& action);

  Eigen::VectorXd observation() const;
  bool has_key() const { return has_key_; }
  int steps_taken() const { return steps_; }
  Vec2 position() const { return pos_; }

  // Uniform sample over non-wall positions.
  Vec2 sample_open_position(Rng& rng) const;

 private:
  FourRoomGeometry geo_;
  FourRoomTask task_;
  Vec2 pos_;
  bool has_key_ = false;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace por::envs
