#pragma once

#include "por/dataset.hpp"
#include "por/fourroom.hpp"

namespace por::envs {

struct CollectorSpec {
  std::string env_id = "fourroom-a";
  size_t n_transitions = 100000;
  double controller_fraction = 0.8;  // remainder is a uniform random policy
  uint64_t seed = 0;
  double controller_noise = 0.02;    // action noise sigma of the scripted controller
  int random_walk_steps = 60;        // length cap of random-policy snippets
};

// Scripted goal-reaching controller: follows an A*-planned cell path toward a
// target position with small Gaussian action noise. Returns the action to
// take from `pos`; `done` reports target arrival.
class GoalReachingController {
 public:
  GoalReachingController(const FourRoomGeometry& geo, Vec2 start, Vec2 target);

  bool plan_found() const { return plan_found_; }
  Eigen::VectorXd action(Vec2 pos, Rng& rng, double noise_sigma);
  bool arrived(Vec2 pos) const;

 private:
  const FourRoomGeometry& geo_;
  Vec2 target_;
  std::vector<Vec2> waypoints_;
  size_t next_waypoint_ = 0;
  bool plan_found_ = false;
};

// Collect exactly spec.n_transitions transitions in the named environment by
// mixing scripted-controller trajectories (start and end sampled uniformly at
// non-wall locations) with uniform random-policy snippets. Reproducible by
// seed.
data::TrajectoryDataset collect(const CollectorSpec& spec);
data::TrajectoryDataset collect(const CollectorSpec& spec, const FourRoomGeometry& geometry);

}  // namespace por::envs
