#include "por/fourroom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace por::envs {

bool FourRoomGeometry::cell_is_wall(int i, int j) const {
  if (i < 0 || i >= grid_size || j < 0 || j >= grid_size) return true;
  if (i == 0 || j == 0 || i == grid_size - 1 || j == grid_size - 1) return true;
  if (i == wall_col && j != wall_row) {
    for (int d : vline_doors)
      if (j == d) return false;
    return true;
  }
  if (j == wall_row) {
    if (i == wall_col) return true;  // wall crossing
    for (int d : hline_doors)
      if (i == d) return false;
    return true;
  }
  return false;
}

bool FourRoomGeometry::position_is_wall(double x, double y) const {
  int i = static_cast<int>(std::floor(x - origin));
  int j = static_cast<int>(std::floor(y - origin));
  return cell_is_wall(i, j);
}

bool FourRoomGeometry::in_river(double x, double y) const {
  for (const auto& r : rivers)
    if (r.contains(x, y)) return true;
  return false;
}

namespace {
// Shared base arena: 19x19 grid, four rooms, one door per adjoining wall.
// Door and landmark cells are frozen reconstructions (the tasks are defined
// up to geometry, which ships as config text so variants need no code edits).
const char* kTaskAConfig = R"(# four-room task geometry
grid 19
origin -9.5
action_limit 0.1
horizon 500
walls 9 9
vline_doors 4 14
hline_doors 4 14
start -7.0 -7.0
goal 7.0 7.0
goal_radius 0.5
start_jitter 1.0
)";

const char* kTaskBConfig = R"(# four-room task geometry (river variant)
grid 19
origin -9.5
action_limit 0.1
horizon 500
walls 9 9
vline_doors 4 14
hline_doors 4 14
start -7.0 -7.0
goal 7.0 7.0
goal_radius 0.5
start_jitter 1.0
river -1.5 3.5 1.5 6.5
)";

const char* kTaskCConfig = R"(# four-room task geometry (river + key variant)
grid 19
origin -9.5
action_limit 0.1
horizon 500
walls 9 9
vline_doors 4 14
hline_doors 4 14
start -7.0 -7.0
goal 7.0 7.0
goal_radius 0.5
start_jitter 1.0
river -1.5 3.5 1.5 6.5
key 5.0 -1.0
key_radius 0.8
)";
}  // namespace

FourRoomGeometry FourRoomGeometry::from_config_text(const std::string& text,
                                                    const std::string& origin_name) {
  FourRoomGeometry g;
  g.vline_doors.clear();
  g.hline_doors.clear();
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    auto bad = [&](const std::string& why) {
      return Error::data("geometry " + origin_name + ": " + why + " on line " +
                         std::to_string(line_no));
    };
    if (tag == "grid") {
      if (!(ss >> g.grid_size)) throw bad("malformed grid size");
    } else if (tag == "origin") {
      if (!(ss >> g.origin)) throw bad("malformed origin");
    } else if (tag == "action_limit") {
      if (!(ss >> g.action_limit)) throw bad("malformed action_limit");
    } else if (tag == "horizon") {
      if (!(ss >> g.horizon)) throw bad("malformed horizon");
    } else if (tag == "walls") {
      if (!(ss >> g.wall_col >> g.wall_row)) throw bad("malformed walls");
    } else if (tag == "vline_doors") {
      int d;
      while (ss >> d) g.vline_doors.push_back(d);
    } else if (tag == "hline_doors") {
      int d;
      while (ss >> d) g.hline_doors.push_back(d);
    } else if (tag == "start") {
      if (!(ss >> g.start.x >> g.start.y)) throw bad("malformed start");
    } else if (tag == "goal") {
      if (!(ss >> g.goal.x >> g.goal.y)) throw bad("malformed goal");
    } else if (tag == "goal_radius") {
      if (!(ss >> g.goal_radius)) throw bad("malformed goal_radius");
    } else if (tag == "start_jitter") {
      if (!(ss >> g.start_jitter)) throw bad("malformed start_jitter");
    } else if (tag == "river") {
      Rect r;
      if (!(ss >> r.x0 >> r.y0 >> r.x1 >> r.y1)) throw bad("malformed river rect");
      g.rivers.push_back(r);
    } else if (tag == "key") {
      Vec2 k;
      if (!(ss >> k.x >> k.y)) throw bad("malformed key");
      g.key = k;
    } else if (tag == "key_radius") {
      if (!(ss >> g.key_radius)) throw bad("malformed key_radius");
    } else {
      throw bad("unknown tag '" + tag + "'");
    }
  }
  if (g.grid_size < 5) throw Error::data("geometry " + origin_name + ": grid too small");
  if (g.position_is_wall(g.start.x, g.start.y))
    throw Error::data("geometry " + origin_name + ": start is inside a wall");
  if (g.position_is_wall(g.goal.x, g.goal.y))
    throw Error::data("geometry " + origin_name + ": goal is inside a wall");
  return g;
}

std::string FourRoomGeometry::to_config_text() const {
  std::ostringstream os;
  os << "grid " << grid_size << "\n";
  os << "origin " << format_double(origin) << "\n";
  os << "action_limit " << format_double(action_limit) << "\n";
  os << "horizon " << horizon << "\n";
  os << "walls " << wall_col << " " << wall_row << "\n";
  os << "vline_doors";
  for (int d : vline_doors) os << " " << d;
  os << "\nhline_doors";
  for (int d : hline_doors) os << " " << d;
  os << "\nstart " << format_double(start.x) << " " << format_double(start.y) << "\n";
  os << "goal " << format_double(goal.x) << " " << format_double(goal.y) << "\n";
  os << "goal_radius " << format_double(goal_radius) << "\n";
  os << "start_jitter " << format_double(start_jitter) << "\n";
  for (const auto& r : rivers)
    os << "river " << format_double(r.x0) << " " << format_double(r.y0) << " "
       << format_double(r.x1) << " " << format_double(r.y1) << "\n";
  if (key) {
    os << "key " << format_double(key->x) << " " << format_double(key->y) << "\n";
    os << "key_radius " << format_double(key_radius) << "\n";
  }
  return os.str();
}

FourRoomGeometry FourRoomGeometry::task_a() { return from_config_text(kTaskAConfig, "task-a"); }
FourRoomGeometry FourRoomGeometry::task_b() { return from_config_text(kTaskBConfig, "task-b"); }
FourRoomGeometry FourRoomGeometry::task_c() { return from_config_text(kTaskCConfig, "task-c"); }

FourRoomGeometry FourRoomGeometry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::data("cannot open geometry file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_config_text(ss.str(), path);
}

void FourRoomGeometry::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error::data("cannot write geometry file: " + path);
  out << "# four-room task geometry\n" << to_config_text();
}

FourRoomTask task_from_env_id(const std::string& env_id) {
  if (env_id == "fourroom-a") return FourRoomTask::kA;
  if (env_id == "fourroom-b") return FourRoomTask::kB;
  if (env_id == "fourroom-c") return FourRoomTask::kC;
  throw Error::usage("unknown environment id: " + env_id);
}

std::string env_id_of_task(FourRoomTask task) {
  switch (task) {
    case FourRoomTask::kA: return "fourroom-a";
    case FourRoomTask::kB: return "fourroom-b";
    case FourRoomTask::kC: return "fourroom-c";
  }
  throw Error::runtime("bad task");
}

FourRoomGeometry geometry_of_task(FourRoomTask task) {
  switch (task) {
    case FourRoomTask::kA: return FourRoomGeometry::task_a();
    case FourRoomTask::kB: return FourRoomGeometry::task_b();
    case FourRoomTask::kC: return FourRoomGeometry::task_c();
  }
  throw Error::runtime("bad task");
}

FourRoomEnv::FourRoomEnv(FourRoomGeometry geometry, FourRoomTask task)
    : geo_(std::move(geometry)), task_(task) {
  if (task_ == FourRoomTask::kC && !geo_.key)
    throw Error::data("four-room task C requires a key location in the geometry");
  reset_at(geo_.start);
}

Eigen::VectorXd FourRoomEnv::reset(Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vec2 p{geo_.start.x + rng.uniform(-geo_.start_jitter, geo_.start_jitter),
           geo_.start.y + rng.uniform(-geo_.start_jitter, geo_.start_jitter)};
    if (!geo_.position_is_wall(p.x, p.y) && !geo_.in_river(p.x, p.y)) return reset_at(p);
  }
  throw Error::runtime("four-room reset: could not sample an open start position");
}

Eigen::VectorXd FourRoomEnv::reset_at(Vec2 position) {
  if (geo_.position_is_wall(position.x, position.y))
    throw Error::runtime("four-room reset: position inside a wall");
  pos_ = position;
  has_key_ = false;
  steps_ = 0;
  done_ = false;
  return observation();
}

Eigen::VectorXd FourRoomEnv::observation() const {
  Eigen::VectorXd o(2);
  o << pos_.x, pos_.y;
  return o;
}

Vec2 FourRoomEnv::sample_open_position(Rng& rng) const {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vec2 p{rng.uniform(geo_.low(), geo_.high()), rng.uniform(geo_.low(), geo_.high())};
    if (!geo_.position_is_wall(p.x, p.y)) return p;
  }
  throw Error::runtime("four-room: could not sample an open position");
}

FourRoomStep FourRoomEnv::step(const Eigen::VectorXd& action) {
  if (done_) throw Error::runtime("four-room step: episode already terminated");
  if (action.size() != 2) throw Error::runtime("four-room step: action must be 2-dimensional");

  const double lim = geo_.action_limit;
  double dx = std::clamp(action[0], -lim, lim);
  double dy = std::clamp(action[1], -lim, lim);

  // axis-separated wall resolution (attempt x then y independently)
  const double lo = geo_.low() + 1e-9, hi = geo_.high() - 1e-9;
  double nx = std::clamp(pos_.x + dx, lo, hi);
  if (geo_.position_is_wall(nx, pos_.y)) nx = pos_.x;
  double ny = std::clamp(pos_.y + dy, lo, hi);
  if (geo_.position_is_wall(nx, ny)) ny = pos_.y;
  pos_ = {nx, ny};
  steps_ += 1;

  FourRoomStep out;
  if (task_ == FourRoomTask::kC && !has_key_ && geo_.key) {
    double kx = pos_.x - geo_.key->x, ky = pos_.y - geo_.key->y;
    if (kx * kx + ky * ky <= geo_.key_radius * geo_.key_radius) {
      has_key_ = true;
      out.picked_key = true;
    }
  }

  bool in_river = (task_ != FourRoomTask::kA) && geo_.in_river(pos_.x, pos_.y);
  double gx = pos_.x - geo_.goal.x, gy = pos_.y - geo_.goal.y;
  bool at_goal = gx * gx + gy * gy <= geo_.goal_radius * geo_.goal_radius;

  if (in_river) {
    out.reward = -1.0;
    out.done = true;
    out.entered_river = true;
  } else if (at_goal && (task_ != FourRoomTask::kC || has_key_)) {
    out.reward = 1.0;
    out.done = true;
    out.reached_goal = true;
  } else {
    out.reward = 0.0;
    out.done = steps_ >= geo_.horizon;
  }
  done_ = out.done;
  out.obs = observation();
  return out;
}

}  // namespace por::envs
