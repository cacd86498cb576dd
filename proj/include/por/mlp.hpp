#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "por/common.hpp"

namespace por::nn {

enum class HeadKind : uint8_t {
  kScalar = 0,    // single real output
  kVector = 1,    // deterministic vector output
  kGaussian = 2,  // diagonal Gaussian: mean vector + learned state-independent log-std
};

struct MlpSpec {
  std::vector<int> layer_sizes;  // {input, hidden..., output}; hidden may be empty
  HeadKind head = HeadKind::kScalar;
  bool layer_norm = false;  // non-affine layer norm before each hidden ReLU
  double log_std_min = -5.0;
  double log_std_max = 2.0;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

// Per-parameter partial derivatives, shaped like the model they came from.
struct GradientBundle {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
  Eigen::VectorXd d_log_std;

  bool finite() const;
  void scale(double s);
  void accumulate(const GradientBundle& other, double s = 1.0);
};

struct MlpModel {
  MlpSpec spec;
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: (out x in)
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd log_std;  // Gaussian head only; kept inside [log_std_min, log_std_max]

  static MlpModel zeros(const MlpSpec& spec);
  // He-style uniform fan-in init for hidden layers, small-uniform final layer.
  static MlpModel random_init(const MlpSpec& spec, Rng& rng);

  long param_count() const;
  bool same_architecture(const MlpModel& other) const;

  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
  GradientBundle zero_gradients() const;
  uint64_t param_hash() const;

  Eigen::VectorXd std_dev() const { return log_std.array().exp().matrix(); }
};

// Batched forward pass. X is (n x input_dim); result is (n x output_dim).
// For Gaussian heads the result is the mean; log-std lives on the model.
Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& X);
Eigen::VectorXd forward1(const MlpModel& model, const Eigen::VectorXd& x);

// Activation record of one forward pass, consumed by backward().
struct ForwardTape {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> lin;  // hidden linear outputs (pre-norm, pre-ReLU)
  std::vector<Eigen::MatrixXd> nrm;  // post layer-norm (== lin when norm disabled)
  std::vector<Eigen::MatrixXd> act;  // post-ReLU hidden activations
  Eigen::MatrixXd output;
};

const Eigen::MatrixXd& forward_tape(const MlpModel& model, const Eigen::MatrixXd& X,
                                    ForwardTape& tape);

// Reverse pass: d_output is (n x output_dim) = dLoss/dOutput. Returns parameter
// gradients; when d_input is non-null it also receives dLoss/dX (n x input_dim).
// Gradients w.r.t. log_std are NOT produced here (the losses that need them add
// them analytically); backward fills d_log_std with zeros of the right size.
GradientBundle backward(const MlpModel& model, const ForwardTape& tape,
                        const Eigen::MatrixXd& d_output, Eigen::MatrixXd* d_input = nullptr);

struct AdamParams {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamParams hp;
  long long step = 0;  // strictly +1 per update
  GradientBundle m;    // first moments, parameter-shaped
  GradientBundle v;    // second moments

  static AdamState init(const MlpModel& model, AdamParams hp);
};

// Bias-corrected Adam update in place. Refuses non-finite gradients.
// Gaussian log-std is re-projected into its clamp range after the step.
void adam_step(AdamState& state, MlpModel& model, const GradientBundle& grads);

// target <- lambda * online + (1 - lambda) * target, elementwise.
void polyak_update(MlpModel& target, const MlpModel& online, double lambda);

// Sum over dimensions of the diagonal Gaussian log-density.
double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& x);
// Row-batched version: means/x are (n x k), log_std is (k); returns (n).
Eigen::VectorXd gaussian_log_prob_rows(const Eigen::MatrixXd& means,
                                       const Eigen::VectorXd& log_std,
                                       const Eigen::MatrixXd& x);

// ---- checkpoint formats (documented in docs/formats.md) ----

std::vector<uint8_t> serialize_model(const MlpModel& model);
MlpModel deserialize_model(ByteReader& reader);

void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

// A named bundle of models in one file (e.g. a value ensemble).
void save_bundle(const std::map<std::string, const MlpModel*>& models, const std::string& path);
std::map<std::string, MlpModel> load_bundle(const std::string& path);

// Lossless text export (hexfloat parameters) and its inverse.
void export_text(const MlpModel& model, std::ostream& os);
MlpModel import_text(std::istream& is);

}  // namespace por::nn
