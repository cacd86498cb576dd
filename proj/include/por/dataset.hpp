#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "por/common.hpp"

namespace por::data {

// One (s, a, r, s', done) step. An empty action vector marks an action-free
// transition (supplementary observation-only data); it is an explicit absence
// marker so that misuse is detectable, never a zero-filled placeholder.
struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;  // size 0 == action absent
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;

  bool has_action() const { return action.size() > 0; }
};

struct DatasetMeta {
  std::string name;
  std::string env_id;
  uint64_t seed = 0;
  int horizon = 0;  // recorded episode cap; 0 = unknown
};

// Ordered transitions plus trajectory boundaries. Within a trajectory the
// chaining invariant holds: next_state of step t equals state of step t+1.
class TrajectoryDataset {
 public:
  TrajectoryDataset() = default;
  TrajectoryDataset(int obs_dim, int act_dim, DatasetMeta meta = {});

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  const DatasetMeta& meta() const { return meta_; }
  DatasetMeta& meta() { return meta_; }

  size_t size() const { return transitions_.size(); }
  size_t num_trajectories() const { return starts_.size(); }
  const Transition& at(size_t i) const { return transitions_[i]; }
  const std::vector<Transition>& transitions() const { return transitions_; }

  // Trajectory i spans [traj_begin(i), traj_end(i)).
  size_t traj_begin(size_t i) const { return starts_[i]; }
  size_t traj_end(size_t i) const {
    return i + 1 < starts_.size() ? starts_[i + 1] : transitions_.size();
  }
  size_t traj_length(size_t i) const { return traj_end(i) - traj_begin(i); }

  void begin_trajectory();
  void push(Transition t);
  void append_trajectory(const TrajectoryDataset& src, size_t traj_index,
                         bool strip_actions = false);

  bool all_have_actions() const;
  // Throws Error::data when a structural invariant is broken.
  void validate() const;

  uint64_t content_hash() const;

 private:
  std::vector<Transition> transitions_;
  std::vector<size_t> starts_;
  int obs_dim_ = 0;
  int act_dim_ = 0;
  DatasetMeta meta_;
};

// Discounted per-trajectory returns: sum_t gamma^t r_t. Empty trajectories
// yield 0 (with a warning on stderr).
std::vector<double> compute_returns(const TrajectoryDataset& ds, double gamma);

// Keep the ceil(x_percent/100 * n) highest-return trajectories; ties broken
// by earlier trajectory index. Order of kept trajectories is preserved.
TrajectoryDataset filter_top_fraction(const TrajectoryDataset& ds, double x_percent,
                                      double gamma = 1.0);

enum class SplitScheme { kMain, kMore, kMix };

struct SplitSpec {
  SplitScheme scheme = SplitScheme::kMain;
  double fraction_e = 1.0;  // in (0, 1]
  bool action_free_supplement = false;
};

// Random trajectory-level split into (D_e, D_o). All schemes partition the
// trajectory set; 'more' returns everything merged in D_e, and 'mix' can
// strip actions from D_o.
std::pair<TrajectoryDataset, TrajectoryDataset> split(const TrajectoryDataset& ds,
                                                      const SplitSpec& spec, uint64_t seed);

// Binary "PORD" format (see docs/formats.md) and CSV export/import.
void save_dataset(const TrajectoryDataset& ds, const std::string& path);
TrajectoryDataset load_dataset(const std::string& path);

void save_dataset_csv(const TrajectoryDataset& ds, const std::string& path);
TrajectoryDataset load_dataset_csv(const std::string& path);

// Optional state-statistics transform ("normalize" switch, default off).
struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_dev;

  static Normalizer identity(int dim);
  static Normalizer fit_states(const TrajectoryDataset& ds);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& X) const;
  bool is_identity() const;
};

}  // namespace por::data
