#include "por/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace por::data {

TrajectoryDataset::TrajectoryDataset(int obs_dim, int act_dim, DatasetMeta meta)
    : obs_dim_(obs_dim), act_dim_(act_dim), meta_(std::move(meta)) {
  if (obs_dim <= 0 || act_dim <= 0)
    throw Error::data("TrajectoryDataset: obs_dim and act_dim must be positive");
}

void TrajectoryDataset::begin_trajectory() { starts_.push_back(transitions_.size()); }

void TrajectoryDataset::push(Transition t) {
  if (starts_.empty()) throw Error::data("push: no open trajectory (call begin_trajectory)");
  if (t.state.size() != obs_dim_ || t.next_state.size() != obs_dim_)
    throw Error::data("push: state dimension mismatch");
  if (t.has_action() && t.action.size() != act_dim_)
    throw Error::data("push: action dimension mismatch");
  if (!std::isfinite(t.reward)) throw Error::data("push: non-finite reward");
  transitions_.push_back(std::move(t));
}

void TrajectoryDataset::append_trajectory(const TrajectoryDataset& src, size_t traj_index,
                                          bool strip_actions) {
  begin_trajectory();
  for (size_t i = src.traj_begin(traj_index); i < src.traj_end(traj_index); ++i) {
    Transition t = src.at(i);
    if (strip_actions) t.action.resize(0);
    push(std::move(t));
  }
}

bool TrajectoryDataset::all_have_actions() const {
  for (const auto& t : transitions_)
    if (!t.has_action()) return false;
  return true;
}

void TrajectoryDataset::validate() const {
  if (!starts_.empty() && starts_.front() != 0)
    throw Error::data("dataset: first trajectory must start at 0");
  for (size_t i = 0; i + 1 < starts_.size(); ++i)
    if (starts_[i] >= starts_[i + 1])
      throw Error::data("dataset: empty or out-of-order trajectory boundary");
  if (!starts_.empty() && starts_.back() >= transitions_.size() && !transitions_.empty())
    throw Error::data("dataset: trailing empty trajectory");
  if (starts_.empty() && !transitions_.empty())
    throw Error::data("dataset: transitions without trajectory boundaries");

  for (size_t tr = 0; tr < num_trajectories(); ++tr) {
    for (size_t i = traj_begin(tr); i < traj_end(tr); ++i) {
      const Transition& t = transitions_[i];
      if (t.state.size() != obs_dim_ || t.next_state.size() != obs_dim_)
        throw Error::data("dataset: state dim mismatch at transition " + std::to_string(i));
      if (t.has_action() && t.action.size() != act_dim_)
        throw Error::data("dataset: action dim mismatch at transition " + std::to_string(i));
      if (i + 1 < traj_end(tr)) {
        if (t.done)
          throw Error::data("dataset: done=true inside trajectory at transition " +
                            std::to_string(i));
        if (t.next_state != transitions_[i + 1].state)
          throw Error::data("dataset: chaining broken at transition " + std::to_string(i));
      }
    }
    if (meta_.horizon > 0 && traj_length(tr) > static_cast<size_t>(meta_.horizon))
      throw Error::data("dataset: trajectory " + std::to_string(tr) + " exceeds recorded horizon");
  }
}

uint64_t TrajectoryDataset::content_hash() const {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(obs_dim_));
  w.u32(static_cast<uint32_t>(act_dim_));
  for (size_t tr = 0; tr < num_trajectories(); ++tr) w.u64(traj_begin(tr));
  for (const auto& t : transitions_) {
    for (int i = 0; i < t.state.size(); ++i) w.f64(t.state[i]);
    w.u8(t.has_action() ? 1 : 0);
    for (int i = 0; i < t.action.size(); ++i) w.f64(t.action[i]);
    w.f64(t.reward);
    for (int i = 0; i < t.next_state.size(); ++i) w.f64(t.next_state[i]);
    w.u8(t.done ? 1 : 0);
  }
  return fnv1a64(w.data().data(), w.size());
}

std::vector<double> compute_returns(const TrajectoryDataset& ds, double gamma) {
  if (gamma <= 0.0 || gamma > 1.0) throw Error::data("compute_returns: gamma must be in (0, 1]");
  std::vector<double> out;
  out.reserve(ds.num_trajectories());
  for (size_t tr = 0; tr < ds.num_trajectories(); ++tr) {
    if (ds.traj_length(tr) == 0) {
      std::cerr << "warning: empty trajectory " << tr << ", return 0\n";
      out.push_back(0.0);
      continue;
    }
    double ret = 0.0, disc = 1.0;
    for (size_t i = ds.traj_begin(tr); i < ds.traj_end(tr); ++i) {
      ret += disc * ds.at(i).reward;
      disc *= gamma;
    }
    out.push_back(ret);
  }
  return out;
}

TrajectoryDataset filter_top_fraction(const TrajectoryDataset& ds, double x_percent,
                                      double gamma) {
  if (x_percent <= 0.0 || x_percent > 100.0)
    throw Error::data("filter_top_fraction: percent must be in (0, 100]");
  const size_t n = ds.num_trajectories();
  if (n == 0) return ds;
  std::vector<double> returns = compute_returns(ds, gamma);
  size_t keep = static_cast<size_t>(std::ceil(x_percent / 100.0 * static_cast<double>(n)));
  keep = std::min(keep, n);

  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return returns[a] > returns[b]; });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());  // preserve original ordering of kept trajectories

  TrajectoryDataset out(ds.obs_dim(), ds.act_dim(), ds.meta());
  for (size_t i : idx) out.append_trajectory(ds, i);
  return out;
}

std::pair<TrajectoryDataset, TrajectoryDataset> split(const TrajectoryDataset& ds,
                                                      const SplitSpec& spec, uint64_t seed) {
  if (spec.fraction_e <= 0.0 || spec.fraction_e > 1.0)
    throw Error::data("split: fraction_e must be in (0, 1]");
  const size_t n = ds.num_trajectories();
  size_t k = static_cast<size_t>(std::floor(spec.fraction_e * static_cast<double>(n) + 1e-9));
  if (k == 0) throw Error::data("split: fraction_e yields an empty D_e");

  // random trajectory subsample (Fisher-Yates)
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (size_t i = n; i > 1; --i) {
    size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
  std::vector<size_t> e_idx(idx.begin(), idx.begin() + k);
  std::vector<size_t> o_idx(idx.begin() + k, idx.end());
  std::sort(e_idx.begin(), e_idx.end());
  std::sort(o_idx.begin(), o_idx.end());

  if (spec.scheme == SplitScheme::kMore) {
    TrajectoryDataset all(ds.obs_dim(), ds.act_dim(), ds.meta());
    for (size_t i = 0; i < n; ++i) all.append_trajectory(ds, i);
    return {std::move(all), TrajectoryDataset(ds.obs_dim(), ds.act_dim(), ds.meta())};
  }

  TrajectoryDataset d_e(ds.obs_dim(), ds.act_dim(), ds.meta());
  for (size_t i : e_idx) d_e.append_trajectory(ds, i);
  TrajectoryDataset d_o(ds.obs_dim(), ds.act_dim(), ds.meta());
  bool strip = spec.scheme == SplitScheme::kMix && spec.action_free_supplement;
  for (size_t i : o_idx) d_o.append_trajectory(ds, i, strip);
  return {std::move(d_e), std::move(d_o)};
}

// ---- binary format ----

namespace {
constexpr char kDataMagic[4] = {'P', 'O', 'R', 'D'};
constexpr uint16_t kDataVersion = 1;
}  // namespace

void save_dataset(const TrajectoryDataset& ds, const std::string& path) {
  ByteWriter w;
  w.bytes(kDataMagic, 4);
  w.u16(kDataVersion);
  w.u32(static_cast<uint32_t>(ds.obs_dim()));
  w.u32(static_cast<uint32_t>(ds.act_dim()));
  w.u64(ds.size());
  w.u64(ds.num_trajectories());
  for (size_t tr = 0; tr < ds.num_trajectories(); ++tr) w.u64(ds.traj_begin(tr));
  for (const auto& t : ds.transitions()) {
    for (int i = 0; i < t.state.size(); ++i) w.f64(t.state[i]);
    w.u8(t.has_action() ? 1 : 0);
    if (t.has_action())
      for (int i = 0; i < t.action.size(); ++i) w.f64(t.action[i]);
    w.f64(t.reward);
    for (int i = 0; i < t.next_state.size(); ++i) w.f64(t.next_state[i]);
    w.u8(t.done ? 1 : 0);
  }
  w.str(ds.meta().name);
  w.str(ds.meta().env_id);
  w.u64(ds.meta().seed);
  w.u32(static_cast<uint32_t>(ds.meta().horizon));
  ByteWriter out;
  out.bytes(w.data().data(), w.size());
  out.u32(crc32(w.data().data(), w.size()));
  write_file_bytes(path, out.data());
}

TrajectoryDataset load_dataset(const std::string& path) {
  std::vector<uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < 8) throw Error::data("dataset " + path + ": file too short");
  uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (stored != crc32(bytes.data(), bytes.size() - 4))
    throw Error::data("dataset " + path + ": CRC mismatch at offset " +
                      std::to_string(bytes.size() - 4) + " (file corrupt)");
  ByteReader r(bytes.data(), bytes.size() - 4);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kDataMagic, 4) != 0) throw Error::data("dataset " + path + ": bad magic");
  uint16_t version = r.u16();
  if (version != kDataVersion)
    throw Error::data("dataset " + path + ": unsupported version " + std::to_string(version));
  int obs_dim = static_cast<int>(r.u32());
  int act_dim = static_cast<int>(r.u32());
  uint64_t n_transitions = r.u64();
  uint64_t n_traj = r.u64();
  std::vector<uint64_t> starts(n_traj);
  for (auto& s : starts) s = r.u64();

  TrajectoryDataset ds(obs_dim, act_dim);
  size_t next_traj = 0;
  for (uint64_t i = 0; i < n_transitions; ++i) {
    while (next_traj < n_traj && starts[next_traj] == i) {
      ds.begin_trajectory();
      ++next_traj;
    }
    Transition t;
    t.state.resize(obs_dim);
    for (int d = 0; d < obs_dim; ++d) t.state[d] = r.f64();
    if (r.u8() != 0) {
      t.action.resize(act_dim);
      for (int d = 0; d < act_dim; ++d) t.action[d] = r.f64();
    }
    t.reward = r.f64();
    t.next_state.resize(obs_dim);
    for (int d = 0; d < obs_dim; ++d) t.next_state[d] = r.f64();
    t.done = r.u8() != 0;
    ds.push(std::move(t));
  }
  ds.meta().name = r.str();
  ds.meta().env_id = r.str();
  ds.meta().seed = r.u64();
  ds.meta().horizon = static_cast<int>(r.u32());
  ds.validate();
  return ds;
}

// ---- CSV ----

void save_dataset_csv(const TrajectoryDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error::data("cannot write file: " + path);
  out << "traj,step";
  for (int i = 0; i < ds.obs_dim(); ++i) out << ",s" << i;
  for (int i = 0; i < ds.act_dim(); ++i) out << ",a" << i;
  out << ",r";
  for (int i = 0; i < ds.obs_dim(); ++i) out << ",sp" << i;
  out << ",done\n";
  for (size_t tr = 0; tr < ds.num_trajectories(); ++tr) {
    for (size_t i = ds.traj_begin(tr); i < ds.traj_end(tr); ++i) {
      const Transition& t = ds.at(i);
      out << tr << "," << (i - ds.traj_begin(tr));
      for (int d = 0; d < ds.obs_dim(); ++d) out << "," << format_double(t.state[d]);
      for (int d = 0; d < ds.act_dim(); ++d) {
        out << ",";
        if (t.has_action()) out << format_double(t.action[d]);
      }
      out << "," << format_double(t.reward);
      for (int d = 0; d < ds.obs_dim(); ++d) out << "," << format_double(t.next_state[d]);
      out << "," << (t.done ? 1 : 0) << "\n";
    }
  }
}

TrajectoryDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::data("cannot open file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw Error::data("csv " + path + ": empty file");

  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  int obs_dim = 0, act_dim = 0;
  for (const auto& c : cols) {
    if (c.size() > 1 && c[0] == 's' && c[1] != 'p' && c != "step") ++obs_dim;
    if (c.size() > 1 && c[0] == 'a') ++act_dim;
  }
  if (obs_dim == 0 || cols.size() != 4 + 2 * static_cast<size_t>(obs_dim) + act_dim)
    throw Error::data("csv " + path + ": malformed header");

  TrajectoryDataset ds(obs_dim, act_dim);
  std::string line;
  long last_traj = -1;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    while (f.size() < cols.size()) f.push_back("");  // trailing empty fields
    if (f.size() != cols.size())
      throw Error::data("csv " + path + ": wrong field count on line " + std::to_string(line_no));
    size_t k = 0;
    long traj = std::stol(f[k++]);
    ++k;  // step index is redundant
    Transition t;
    t.state.resize(obs_dim);
    for (int d = 0; d < obs_dim; ++d) t.state[d] = std::stod(f[k++]);
    bool has_action = !f[k].empty();
    if (has_action) {
      t.action.resize(act_dim);
      for (int d = 0; d < act_dim; ++d) t.action[d] = std::stod(f[k++]);
    } else {
      k += act_dim;
    }
    t.reward = std::stod(f[k++]);
    t.next_state.resize(obs_dim);
    for (int d = 0; d < obs_dim; ++d) t.next_state[d] = std::stod(f[k++]);
    t.done = f[k] == "1";
    if (traj != last_traj) {
      ds.begin_trajectory();
      last_traj = traj;
    }
    ds.push(std::move(t));
  }
  ds.validate();
  return ds;
}

Normalizer Normalizer::identity(int dim) {
  Normalizer n;
  n.mean = Eigen::VectorXd::Zero(dim);
  n.std_dev = Eigen::VectorXd::Ones(dim);
  return n;
}

Normalizer Normalizer::fit_states(const TrajectoryDataset& ds) {
  if (ds.size() == 0) throw Error::data("Normalizer: empty dataset");
  const int d = ds.obs_dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  double n = 0;
  for (const auto& t : ds.transitions()) {
    sum += t.state;
    sq += t.state.cwiseProduct(t.state);
    n += 1;
  }
  Normalizer out;
  out.mean = sum / n;
  out.std_dev = ((sq / n) - out.mean.cwiseProduct(out.mean)).cwiseMax(1e-12).cwiseSqrt();
  out.std_dev = out.std_dev.cwiseMax(1e-6);
  return out;
}

Eigen::VectorXd Normalizer::apply(const Eigen::VectorXd& x) const {
  return (x - mean).cwiseQuotient(std_dev);
}

Eigen::MatrixXd Normalizer::apply_rows(const Eigen::MatrixXd& X) const {
  return (X.rowwise() - mean.transpose()).array().rowwise() / std_dev.transpose().array();
}

bool Normalizer::is_identity() const {
  return mean.isZero(0.0) && (std_dev.array() == 1.0).all();
}

}  // namespace por::data
