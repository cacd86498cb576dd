#include "por/mlp.hpp"

#include <cmath>

namespace por::nn {

namespace {
constexpr double kLnormEps = 1e-8;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)
}  // namespace

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw Error::runtime("MlpSpec: need at least input and output size");
  for (int s : layer_sizes)
    if (s <= 0) throw Error::runtime("MlpSpec: layer sizes must be positive");
  if (head == HeadKind::kScalar && layer_sizes.back() != 1)
    throw Error::runtime("MlpSpec: scalar head requires output dim 1");
}

bool GradientBundle::finite() const {
  for (const auto& w : d_weights)
    if (!w.allFinite()) return false;
  for (const auto& b : d_biases)
    if (!b.allFinite()) return false;
  if (d_log_std.size() > 0 && !d_log_std.allFinite()) return false;
  return true;
}

void GradientBundle::scale(double s) {
  for (auto& w : d_weights) w *= s;
  for (auto& b : d_biases) b *= s;
  if (d_log_std.size() > 0) d_log_std *= s;
}

void GradientBundle::accumulate(const GradientBundle& other, double s) {
  for (size_t l = 0; l < d_weights.size(); ++l) d_weights[l] += s * other.d_weights[l];
  for (size_t l = 0; l < d_biases.size(); ++l) d_biases[l] += s * other.d_biases[l];
  if (d_log_std.size() > 0) d_log_std += s * other.d_log_std;
}

MlpModel MlpModel::zeros(const MlpSpec& spec) {
  spec.validate();
  MlpModel m;
  m.spec = spec;
  for (int l = 0; l < spec.num_layers(); ++l) {
    m.weights.push_back(Eigen::MatrixXd::Zero(spec.layer_sizes[l + 1], spec.layer_sizes[l]));
    m.biases.push_back(Eigen::VectorXd::Zero(spec.layer_sizes[l + 1]));
  }
  if (spec.head == HeadKind::kGaussian) m.log_std = Eigen::VectorXd::Zero(spec.output_dim());
  return m;
}

MlpModel MlpModel::random_init(const MlpSpec& spec, Rng& rng) {
  MlpModel m = zeros(spec);
  int n_layers = spec.num_layers();
  for (int l = 0; l < n_layers; ++l) {
    double limit;
    if (l == n_layers - 1) {
      limit = 1e-3;  // small final layer keeps early value estimates near zero
    } else {
      limit = std::sqrt(6.0 / spec.layer_sizes[l]);
    }
    for (int i = 0; i < m.weights[l].rows(); ++i)
      for (int j = 0; j < m.weights[l].cols(); ++j) m.weights[l](i, j) = rng.uniform(-limit, limit);
    // biases stay zero
  }
  return m;
}

long MlpModel::param_count() const {
  long n = 0;
  for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  n += log_std.size();
  return n;
}

bool MlpModel::same_architecture(const MlpModel& other) const { return spec == other.spec; }

Eigen::VectorXd MlpModel::flatten() const {
  Eigen::VectorXd flat(param_count());
  long off = 0;
  for (size_t l = 0; l < weights.size(); ++l) {
    for (int j = 0; j < weights[l].cols(); ++j)
      for (int i = 0; i < weights[l].rows(); ++i) flat[off++] = weights[l](i, j);
    for (int i = 0; i < biases[l].size(); ++i) flat[off++] = biases[l][i];
  }
  for (int i = 0; i < log_std.size(); ++i) flat[off++] = log_std[i];
  return flat;
}

void MlpModel::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count()) throw Error::runtime("unflatten: size mismatch");
  long off = 0;
  for (size_t l = 0; l < weights.size(); ++l) {
    for (int j = 0; j < weights[l].cols(); ++j)
      for (int i = 0; i < weights[l].rows(); ++i) weights[l](i, j) = flat[off++];
    for (int i = 0; i < biases[l].size(); ++i) biases[l][i] = flat[off++];
  }
  for (int i = 0; i < log_std.size(); ++i) log_std[i] = flat[off++];
}

GradientBundle MlpModel::zero_gradients() const {
  GradientBundle g;
  for (size_t l = 0; l < weights.size(); ++l) {
    g.d_weights.push_back(Eigen::MatrixXd::Zero(weights[l].rows(), weights[l].cols()));
    g.d_biases.push_back(Eigen::VectorXd::Zero(biases[l].size()));
  }
  g.d_log_std = Eigen::VectorXd::Zero(log_std.size());
  return g;
}

uint64_t MlpModel::param_hash() const {
  Eigen::VectorXd flat = flatten();
  return fnv1a64(flat.data(), static_cast<size_t>(flat.size()) * sizeof(double));
}

namespace {

// Non-affine layer norm on rows: y = (x - mean) / sqrt(var + eps).
Eigen::MatrixXd layer_norm_rows(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Y(X.rows(), X.cols());
  const double d = static_cast<double>(X.cols());
  for (int i = 0; i < X.rows(); ++i) {
    double mu = X.row(i).mean();
    double var = (X.row(i).array() - mu).square().sum() / d;
    Y.row(i) = (X.row(i).array() - mu) / std::sqrt(var + kLnormEps);
  }
  return Y;
}

}  // namespace

const Eigen::MatrixXd& forward_tape(const MlpModel& model, const Eigen::MatrixXd& X,
                                    ForwardTape& tape) {
  if (X.cols() != model.spec.input_dim())
    throw Error::runtime("forward: input dim " + std::to_string(X.cols()) + " != expected " +
                         std::to_string(model.spec.input_dim()));
  const int n_layers = model.spec.num_layers();
  tape.input = X;
  tape.lin.clear();
  tape.nrm.clear();
  tape.act.clear();
  Eigen::MatrixXd h = X;
  for (int l = 0; l < n_layers - 1; ++l) {
    Eigen::MatrixXd z = (h * model.weights[l].transpose()).rowwise() + model.biases[l].transpose();
    tape.lin.push_back(z);
    Eigen::MatrixXd zn = model.spec.layer_norm ? layer_norm_rows(z) : z;
    tape.nrm.push_back(zn);
    h = zn.cwiseMax(0.0);
    tape.act.push_back(h);
  }
  tape.output =
      (h * model.weights[n_layers - 1].transpose()).rowwise() + model.biases[n_layers - 1].transpose();
  return tape.output;
}

Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& X) {
  ForwardTape tape;
  forward_tape(model, X, tape);
  return tape.output;
}

Eigen::VectorXd forward1(const MlpModel& model, const Eigen::VectorXd& x) {
  Eigen::MatrixXd X = x.transpose();
  return forward(model, X).row(0).transpose();
}

GradientBundle backward(const MlpModel& model, const ForwardTape& tape,
                        const Eigen::MatrixXd& d_output, Eigen::MatrixXd* d_input) {
  const int n_layers = model.spec.num_layers();
  if (d_output.rows() != tape.output.rows() || d_output.cols() != tape.output.cols())
    throw Error::runtime("backward: cotangent shape mismatch");

  GradientBundle g = model.zero_gradients();
  Eigen::MatrixXd delta = d_output;  // dLoss/d(layer linear output)

  for (int l = n_layers - 1; l >= 0; --l) {
    const Eigen::MatrixXd& layer_in = (l == 0) ? tape.input : tape.act[l - 1];
    g.d_weights[l] = delta.transpose() * layer_in;
    g.d_biases[l] = delta.colwise().sum().transpose();
    if (l == 0 && d_input == nullptr) break;
    Eigen::MatrixXd d_in = delta * model.weights[l];
    if (l == 0) {
      *d_input = d_in;
      break;
    }
    // through ReLU
    d_in = (tape.nrm[l - 1].array() > 0.0).select(d_in, 0.0);
    if (model.spec.layer_norm) {
      // y = (z - mu)/s with s = sqrt(var + eps):
      // dz = (dy - mean(dy) - y * mean(dy .* y)) / s
      const Eigen::MatrixXd& z = tape.lin[l - 1];
      const Eigen::MatrixXd& y = tape.nrm[l - 1];
      const double d = static_cast<double>(z.cols());
      Eigen::MatrixXd dz(z.rows(), z.cols());
      for (int i = 0; i < z.rows(); ++i) {
        double mu = z.row(i).mean();
        double var = (z.row(i).array() - mu).square().sum() / d;
        double s = std::sqrt(var + kLnormEps);
        double mean_dy = d_in.row(i).mean();
        double mean_dy_y = (d_in.row(i).array() * y.row(i).array()).mean();
        dz.row(i) = (d_in.row(i).array() - mean_dy - y.row(i).array() * mean_dy_y) / s;
      }
      delta = dz;
    } else {
      delta = d_in;
    }
  }
  return g;
}

AdamState AdamState::init(const MlpModel& model, AdamParams hp) {
  AdamState s;
  s.hp = hp;
  s.step = 0;
  s.m = model.zero_gradients();
  s.v = model.zero_gradients();
  return s;
}

namespace {
inline void adam_apply(Eigen::Ref<Eigen::MatrixXd> param, Eigen::Ref<Eigen::MatrixXd> m,
                       Eigen::Ref<Eigen::MatrixXd> v, const Eigen::MatrixXd& g,
                       const AdamParams& hp, double bc1, double bc2) {
  m = hp.beta1 * m + (1.0 - hp.beta1) * g;
  v = hp.beta2 * v.array().matrix() + (1.0 - hp.beta2) * g.array().square().matrix();
  param.array() -= hp.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + hp.epsilon);
}
}  // namespace

void adam_step(AdamState& state, MlpModel& model, const GradientBundle& grads) {
  if (!grads.finite())
    throw Error::runtime("adam_step: refusing update, non-finite gradient encountered");
  if (grads.d_weights.size() != model.weights.size())
    throw Error::runtime("adam_step: gradient/model shape mismatch");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.hp.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.hp.beta2, static_cast<double>(state.step));

  for (size_t l = 0; l < model.weights.size(); ++l) {
    adam_apply(model.weights[l], state.m.d_weights[l], state.v.d_weights[l], grads.d_weights[l],
               state.hp, bc1, bc2);
    adam_apply(model.biases[l], state.m.d_biases[l], state.v.d_biases[l], grads.d_biases[l],
               state.hp, bc1, bc2);
  }
  if (model.log_std.size() > 0) {
    adam_apply(model.log_std, state.m.d_log_std, state.v.d_log_std, grads.d_log_std, state.hp,
               bc1, bc2);
    // projection keeps the density head inside its trust range
    model.log_std = model.log_std.cwiseMax(model.spec.log_std_min).cwiseMin(model.spec.log_std_max);
  }
}

void polyak_update(MlpModel& target, const MlpModel& online, double lambda) {
  if (!target.same_architecture(online))
    throw Error::runtime("polyak_update: architecture mismatch");
  for (size_t l = 0; l < target.weights.size(); ++l) {
    target.weights[l] = lambda * online.weights[l] + (1.0 - lambda) * target.weights[l];
    target.biases[l] = lambda * online.biases[l] + (1.0 - lambda) * target.biases[l];
  }
  if (target.log_std.size() > 0)
    target.log_std = lambda * online.log_std + (1.0 - lambda) * target.log_std;
}

double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& x) {
  if (mean.size() != x.size() || mean.size() != log_std.size())
    throw Error::runtime("gaussian_log_prob: dimension mismatch");
  if (!log_std.allFinite()) throw Error::runtime("gaussian_log_prob: non-finite log_std");
  double lp = 0.0;
  for (int i = 0; i < mean.size(); ++i) {
    double z = (x[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -kHalfLog2Pi - log_std[i] - 0.5 * z * z;
  }
  return lp;
}

Eigen::VectorXd gaussian_log_prob_rows(const Eigen::MatrixXd& means,
                                       const Eigen::VectorXd& log_std,
                                       const Eigen::MatrixXd& x) {
  if (means.rows() != x.rows() || means.cols() != x.cols() || means.cols() != log_std.size())
    throw Error::runtime("gaussian_log_prob_rows: dimension mismatch");
  Eigen::ArrayXXd z =
      (x - means).array().rowwise() * (-log_std).array().exp().transpose();
  Eigen::VectorXd lp =
      (-0.5 * z.square()).rowwise().sum().matrix() +
      Eigen::VectorXd::Constant(means.rows(),
                                -(kHalfLog2Pi * means.cols()) - log_std.sum());
  return lp;
}

}  // namespace por::nn
