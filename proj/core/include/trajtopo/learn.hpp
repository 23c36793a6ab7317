/*
 Copyright 2026 trajtopo contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef TRAJTOPO_LEARN_HPP
#define TRAJTOPO_LEARN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace trajtopo {

/// Fully connected network, ReLU hidden layers, identity output.
struct Mlp {
  std::vector<int> sizes;                 // layer widths, input first
  std::vector<Eigen::MatrixXd> weights;   // weights[l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;    // biases[l]: sizes[l+1]

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int parameter_count() const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
};

/// He-initialized network (normal weights scaled by sqrt(2/fan_in), zero
/// biases), deterministic for a given seed. Needs >= 2 layer sizes, all > 0.
Mlp make_mlp(const std::vector<int>& sizes, std::uint64_t seed);

/// Numerically stable softmax; output strictly positive, sums to 1.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

enum class LossKind {
  kSquaredError,   // mean over samples of 1/2 |f(x) - y|^2
  kCrossEntropy,   // softmax cross-entropy against one-hot rows of Y
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
  double loss = 0.0;
};

/// Batch loss over rows of X/Y (samples in rows; shapes must match the net).
double mlp_loss(const Mlp& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                LossKind kind = LossKind::kSquaredError);

/// Backpropagated batch-mean gradients of mlp_loss for every layer.
MlpGradients mlp_loss_gradients(const Mlp& net, const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y,
                                LossKind kind = LossKind::kSquaredError);

/// Per-dimension affine normalization fitted on a training split.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // standard deviation floored at 1e-12

  static Standardizer fit(const Eigen::MatrixXd& X);
  static Standardizer identity(int dim);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& X) const;
};

struct TrainOptions {
  double lr = 1e-3;       // Adam step size (beta1 0.9, beta2 0.999, eps 1e-8)
  int epochs = 3000;
  int batch = 64;
  int patience = 200;     // early-stop epochs without validation improvement
  std::uint64_t seed = 0;
  LossKind loss = LossKind::kSquaredError;
};

struct TrainResult {
  double train_loss = 0.0;  // final epoch, mean over batches
  double val_loss = 0.0;    // at the restored best parameters
  int epochs_run = 0;
};

/// Mini-batch Adam on the batch-mean loss; keeps the parameters with the best
/// validation loss. Deterministic given opts.seed. Throws std::runtime_error
/// when the loss turns non-finite and std::invalid_argument on shape errors.
TrainResult train_mlp(Mlp& net, const Eigen::MatrixXd& X_train, const Eigen::MatrixXd& Y_train,
                      const Eigen::MatrixXd& X_val, const Eigen::MatrixXd& Y_val,
                      const TrainOptions& opts);

/// Disjoint shuffled train/validation/test row indices (fractions of n).
struct SplitIndices {
  std::vector<int> train, val, test;
};
SplitIndices make_splits(int n, std::uint64_t seed, double train_frac = 0.70,
                         double val_frac = 0.15);

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<int>& rows);

/// Mean of the k nearest targets under Euclidean input distance.
/// Throws std::invalid_argument when k < 1 or k > number of rows.
Eigen::VectorXd knn_predict(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                            const Eigen::VectorXd& query, int k);

/// Brute-force k in [1, k_max] minimizing validation MSE; ties to smaller k.
int knn_select_k(const Eigen::MatrixXd& train_inputs, const Eigen::MatrixXd& train_targets,
                 const Eigen::MatrixXd& val_inputs, const Eigen::MatrixXd& val_targets,
                 int k_max = 10);

/// Flattened warm-start layout: T states then T-1 controls, time-major.
struct WarmStartShape {
  int state_dim = 0;
  int control_dim = 0;
  int horizon = 0;  // T knots

  int flat_dim() const { return state_dim * horizon + control_dim * (horizon - 1); }
};

Eigen::VectorXd flatten_warm_start(const std::vector<Eigen::VectorXd>& X,
                                   const std::vector<Eigen::VectorXd>& U);
std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>> unflatten_warm_start(
    const Eigen::VectorXd& y, const WarmStartShape& shape);

/// Single network with its input/target normalization.
struct MlpRegressor {
  Mlp net;
  Standardizer in_norm, out_norm;
  WarmStartShape shape;  // zero dims when the regressor is generic
};

Eigen::VectorXd regressor_predict(const MlpRegressor& reg, const Eigen::VectorXd& x);

/// Nearest-neighbor baseline: stored training split plus selected k.
struct KnnModel {
  Eigen::MatrixXd inputs;   // standardized rows
  Eigen::MatrixXd targets;  // raw rows
  Standardizer in_norm;
  int k = 1;
  WarmStartShape shape;
};

Eigen::VectorXd knn_model_predict(const KnnModel& model, const Eigen::VectorXd& x);

/// Per-cluster experts behind a softmax gating network; shared normalization.
struct MoeModel {
  int k = 0;
  Mlp gating;                // k-way logits
  std::vector<Mlp> experts;  // k entries
  Standardizer in_norm, out_norm;
  WarmStartShape shape;
};

struct MoeOptions {
  int expert_hidden = 50;
  int gating_hidden = 50;
  TrainOptions train;  // loss kinds are fixed per part
};

/// Trains each expert on its own cluster's samples (squared error) and the
/// gating network on one-hot labels (cross-entropy) over the same splits.
/// Labels must cover [0, k) on the training split; empty clusters throw.
MoeModel train_moe(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                   const std::vector<int>& labels, int k, const SplitIndices& splits,
                   const WarmStartShape& shape, const MoeOptions& opts);

/// Gating class probabilities for a raw (unstandardized) input.
Eigen::VectorXd moe_gate_probabilities(const MoeModel& m, const Eigen::VectorXd& x);

/// Evaluates the gating, queries the argmax expert only, and unflattens the
/// denormalized prediction into state and control trajectories.
std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>> moe_predict(
    const MoeModel& m, const Eigen::VectorXd& x);

/// Model container files: magic "TWML", u32 header length, JSON header
/// (kind, architecture, shapes), then all tensors as little-endian f64.
void save_mlp_regressor(const std::string& path, const MlpRegressor& reg);
MlpRegressor load_mlp_regressor(const std::string& path);
void save_knn_model(const std::string& path, const KnnModel& model);
KnnModel load_knn_model(const std::string& path);
void save_moe_model(const std::string& path, const MoeModel& model);
MoeModel load_moe_model(const std::string& path);

}  // namespace trajtopo

#endif  // TRAJTOPO_LEARN_HPP
