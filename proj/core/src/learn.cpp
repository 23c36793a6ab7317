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

#include "trajtopo/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace trajtopo {

namespace {

void check_net(const Mlp& net) {
  if (net.sizes.size() < 2) throw std::invalid_argument("network needs >= 2 layers");
  if (net.weights.size() + 1 != net.sizes.size() || net.biases.size() != net.weights.size())
    throw std::invalid_argument("network parameter count does not match layer sizes");
}

void check_data(const Mlp& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() != Y.rows()) throw std::invalid_argument("input/target row counts differ");
  if (X.cols() != net.input_dim() || Y.cols() != net.output_dim())
    throw std::invalid_argument("data dimensions do not match the network");
}

struct ForwardTrace {
  std::vector<Eigen::MatrixXd> activations;  // activations[0] = inputs, rows = samples
};

Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::MatrixXd& X, ForwardTrace* trace) {
  Eigen::MatrixXd a = X;
  if (trace) trace->activations.push_back(a);
  const int layers = static_cast<int>(net.weights.size());
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = a * net.weights[l].transpose();
    z.rowwise() += net.biases[l].transpose();
    if (l + 1 < layers) z = z.cwiseMax(0.0);
    a = std::move(z);
    if (trace) trace->activations.push_back(a);
  }
  return a;
}

/// Batch loss and, when `grads` is set, d(loss)/d(output) in `dout`.
double output_loss(const Eigen::MatrixXd& out, const Eigen::MatrixXd& Y, LossKind kind,
                   Eigen::MatrixXd* dout) {
  const double b = static_cast<double>(out.rows());
  if (kind == LossKind::kSquaredError) {
    const Eigen::MatrixXd err = out - Y;
    if (dout) *dout = err / b;
    return 0.5 * err.squaredNorm() / b;
  }
  // Softmax cross-entropy, rows of Y one-hot.
  double loss = 0.0;
  Eigen::MatrixXd probs(out.rows(), out.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    probs.row(i) = softmax(out.row(i).transpose()).transpose();
    for (Eigen::Index c = 0; c < out.cols(); ++c)
      if (Y(i, c) != 0.0) loss -= Y(i, c) * std::log(probs(i, c));
  }
  if (dout) *dout = (probs - Y) / b;
  return loss / b;
}

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long t = 0;

  explicit AdamState(const Mlp& net) {
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      mw.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
      vw.push_back(mw.back());
      mb.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
      vb.push_back(mb.back());
    }
  }

  void update(Mlp& net, const MlpGradients& g, double lr) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++t;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      mw[l] = kBeta1 * mw[l] + (1.0 - kBeta1) * g.dW[l];
      vw[l] = kBeta2 * vw[l] + (1.0 - kBeta2) * g.dW[l].cwiseProduct(g.dW[l]);
      net.weights[l] -=
          lr * (mw[l] / c1).cwiseQuotient(((vw[l] / c2).cwiseSqrt().array() + kEps).matrix());
      mb[l] = kBeta1 * mb[l] + (1.0 - kBeta1) * g.db[l];
      vb[l] = kBeta2 * vb[l] + (1.0 - kBeta2) * g.db[l].cwiseProduct(g.db[l]);
      net.biases[l] -=
          lr * (mb[l] / c1).cwiseQuotient(((vb[l] / c2).cwiseSqrt().array() + kEps).matrix());
    }
  }
};

}  // namespace

int Mlp::parameter_count() const {
  int count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) count += (sizes[l] + 1) * sizes[l + 1];
  return count;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  check_net(*this);
  if (x.size() != input_dim()) throw std::invalid_argument("input dimension mismatch");
  Eigen::VectorXd a = x;
  const int layers = static_cast<int>(weights.size());
  for (int l = 0; l < layers; ++l) {
    Eigen::VectorXd z = weights[l] * a + biases[l];
    if (l + 1 < layers) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Mlp make_mlp(const std::vector<int>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw std::invalid_argument("network needs >= 2 layers");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  Mlp net;
  net.sizes = sizes;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double std_dev = std::sqrt(2.0 / sizes[l]);
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = std_dev * unit(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
  return net;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp();
  return e / e.sum();
}

double mlp_loss(const Mlp& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                LossKind kind) {
  check_net(net);
  check_data(net, X, Y);
  if (X.rows() == 0) throw std::invalid_argument("empty batch");
  return output_loss(forward_batch(net, X, nullptr), Y, kind, nullptr);
}

MlpGradients mlp_loss_gradients(const Mlp& net, const Eigen::MatrixXd& X,
                                const Eigen::MatrixXd& Y, LossKind kind) {
  check_net(net);
  check_data(net, X, Y);
  if (X.rows() == 0) throw std::invalid_argument("empty batch");
  ForwardTrace trace;
  const Eigen::MatrixXd out = forward_batch(net, X, &trace);
  MlpGradients g;
  Eigen::MatrixXd delta;  // d(loss)/d(pre-activation), rows = samples
  g.loss = output_loss(out, Y, kind, &delta);
  const int layers = static_cast<int>(net.weights.size());
  g.dW.resize(layers);
  g.db.resize(layers);
  for (int l = layers - 1; l >= 0; --l) {
    g.dW[l] = delta.transpose() * trace.activations[l];
    g.db[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = delta * net.weights[l];
      // ReLU mask from the post-activation values of the previous layer.
      delta = (trace.activations[l].array() > 0.0).cast<double>().matrix().cwiseProduct(delta);
    }
  }
  return g;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw std::invalid_argument("cannot fit a standardizer on no rows");
  Standardizer s;
  s.mean = X.colwise().mean().transpose();
  Eigen::MatrixXd centered = X.rowwise() - s.mean.transpose();
  s.scale = (centered.array().square().colwise().mean()).sqrt().transpose().matrix();
  s.scale = s.scale.cwiseMax(1e-12);
  return s;
}

Standardizer Standardizer::identity(int dim) {
  Standardizer s;
  s.mean = Eigen::VectorXd::Zero(dim);
  s.scale = Eigen::VectorXd::Ones(dim);
  return s;
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  if (mean.size() == 0) throw std::logic_error("standardizer is not fitted");
  return (x - mean).cwiseQuotient(scale);
}

Eigen::VectorXd Standardizer::invert(const Eigen::VectorXd& z) const {
  return z.cwiseProduct(scale) + mean;
}

Eigen::MatrixXd Standardizer::apply_rows(const Eigen::MatrixXd& X) const {
  if (mean.size() == 0) throw std::logic_error("standardizer is not fitted");
  Eigen::MatrixXd Z = X.rowwise() - mean.transpose();
  Z.array().rowwise() /= scale.transpose().array();
  return Z;
}

TrainResult train_mlp(Mlp& net, const Eigen::MatrixXd& X_train, const Eigen::MatrixXd& Y_train,
                      const Eigen::MatrixXd& X_val, const Eigen::MatrixXd& Y_val,
                      const TrainOptions& opts) {
  check_net(net);
  check_data(net, X_train, Y_train);
  if (X_val.rows() > 0) check_data(net, X_val, Y_val);
  if (X_train.rows() == 0) throw std::invalid_argument("empty training set");
  if (opts.batch < 1 || opts.epochs < 0) throw std::invalid_argument("bad training options");

  const int n = static_cast<int>(X_train.rows());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opts.seed);
  AdamState adam(net);

  const bool has_val = X_val.rows() > 0;
  Mlp best = net;
  double best_val = has_val ? mlp_loss(net, X_val, Y_val, opts.loss)
                            : std::numeric_limits<double>::quiet_NaN();
  int since_best = 0;

  TrainResult result;
  result.val_loss = best_val;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int lo = 0; lo < n; lo += opts.batch) {
      const int hi = std::min(lo + opts.batch, n);
      Eigen::MatrixXd xb(hi - lo, X_train.cols());
      Eigen::MatrixXd yb(hi - lo, Y_train.cols());
      for (int i = lo; i < hi; ++i) {
        xb.row(i - lo) = X_train.row(order[i]);
        yb.row(i - lo) = Y_train.row(order[i]);
      }
      const MlpGradients g = mlp_loss_gradients(net, xb, yb, opts.loss);
      if (!std::isfinite(g.loss))
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch));
      adam.update(net, g, opts.lr);
      epoch_loss += g.loss;
      ++batches;
    }
    result.train_loss = epoch_loss / batches;
    result.epochs_run = epoch + 1;
    if (has_val) {
      const double val = mlp_loss(net, X_val, Y_val, opts.loss);
      if (!std::isfinite(val))
        throw std::runtime_error("training diverged: non-finite validation loss at epoch " +
                                 std::to_string(epoch));
      if (val < best_val) {
        best_val = val;
        best = net;
        since_best = 0;
      } else if (++since_best >= opts.patience) {
        break;
      }
    }
  }
  if (has_val && opts.epochs > 0) {
    net = best;
    result.val_loss = best_val;
  }
  return result;
}

SplitIndices make_splits(int n, std::uint64_t seed, double train_frac, double val_frac) {
  if (n < 1) throw std::invalid_argument("cannot split an empty dataset");
  if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac > 1.0)
    throw std::invalid_argument("bad split fractions");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  int n_train = static_cast<int>(std::lround(train_frac * n));
  int n_val = static_cast<int>(std::lround(val_frac * n));
  n_train = std::max(1, std::min(n_train, n));
  n_val = std::min(n_val, n - n_train);
  if (n >= 3) {
    // Keep every split usable on small datasets.
    if (n_val == 0) n_val = 1;
    while (n_train + n_val > n - 1) --n_train;
    n_train = std::max(1, n_train);
  }
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd knn_predict(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                            const Eigen::VectorXd& query, int k) {
  const int n = static_cast<int>(inputs.rows());
  if (n == 0) throw std::invalid_argument("empty training set");
  if (inputs.rows() != targets.rows()) throw std::invalid_argument("input/target rows differ");
  if (query.size() != inputs.cols()) throw std::invalid_argument("query dimension mismatch");
  if (k < 1 || k > n) throw std::invalid_argument("k out of range");
  std::vector<std::pair<double, int>> by_distance(n);
  for (int i = 0; i < n; ++i)
    by_distance[i] = {(inputs.row(i).transpose() - query).squaredNorm(), i};
  std::sort(by_distance.begin(), by_distance.end());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(targets.cols());
  for (int i = 0; i < k; ++i) mean += targets.row(by_distance[i].second).transpose();
  return mean / k;
}

int knn_select_k(const Eigen::MatrixXd& train_inputs, const Eigen::MatrixXd& train_targets,
                 const Eigen::MatrixXd& val_inputs, const Eigen::MatrixXd& val_targets,
                 int k_max) {
  if (val_inputs.rows() == 0) throw std::invalid_argument("empty validation set");
  const int cap = std::min<int>(k_max, static_cast<int>(train_inputs.rows()));
  int best_k = 1;
  double best_mse = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= cap; ++k) {
    double mse = 0.0;
    for (Eigen::Index i = 0; i < val_inputs.rows(); ++i) {
      const Eigen::VectorXd pred =
          knn_predict(train_inputs, train_targets, val_inputs.row(i).transpose(), k);
      mse += (pred - val_targets.row(i).transpose()).squaredNorm();
    }
    if (mse < best_mse) {
      best_mse = mse;
      best_k = k;
    }
  }
  return best_k;
}

Eigen::VectorXd flatten_warm_start(const std::vector<Eigen::VectorXd>& X,
                                   const std::vector<Eigen::VectorXd>& U) {
  if (X.empty() || X.size() != U.size() + 1)
    throw std::invalid_argument("warm start needs T states and T-1 controls");
  const Eigen::Index n = X.front().size();
  const Eigen::Index m = U.empty() ? 0 : U.front().size();
  Eigen::VectorXd y(static_cast<Eigen::Index>(X.size()) * n +
                    static_cast<Eigen::Index>(U.size()) * m);
  Eigen::Index at = 0;
  for (const auto& x : X) {
    y.segment(at, n) = x;
    at += n;
  }
  for (const auto& u : U) {
    y.segment(at, m) = u;
    at += m;
  }
  return y;
}

std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>> unflatten_warm_start(
    const Eigen::VectorXd& y, const WarmStartShape& shape) {
  if (shape.state_dim < 1 || shape.control_dim < 0 || shape.horizon < 2)
    throw std::invalid_argument("bad warm-start shape");
  if (y.size() != shape.flat_dim()) throw std::invalid_argument("flat vector size mismatch");
  std::vector<Eigen::VectorXd> X(shape.horizon), U(shape.horizon - 1);
  Eigen::Index at = 0;
  for (auto& x : X) {
    x = y.segment(at, shape.state_dim);
    at += shape.state_dim;
  }
  for (auto& u : U) {
    u = y.segment(at, shape.control_dim);
    at += shape.control_dim;
  }
  return {std::move(X), std::move(U)};
}

Eigen::VectorXd regressor_predict(const MlpRegressor& reg, const Eigen::VectorXd& x) {
  return reg.out_norm.invert(reg.net.forward(reg.in_norm.apply(x)));
}

Eigen::VectorXd knn_model_predict(const KnnModel& model, const Eigen::VectorXd& x) {
  return knn_predict(model.inputs, model.targets, model.in_norm.apply(x), model.k);
}

MoeModel train_moe(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                   const std::vector<int>& labels, int k, const SplitIndices& splits,
                   const WarmStartShape& shape, const MoeOptions& opts) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (static_cast<Eigen::Index>(labels.size()) != inputs.rows())
    throw std::invalid_argument("one label per input row required");
  for (int label : labels)
    if (label < 0 || label >= k) throw std::invalid_argument("label outside [0, k)");

  MoeModel m;
  m.k = k;
  m.shape = shape;
  m.in_norm = Standardizer::fit(take_rows(inputs, splits.train));
  m.out_norm = Standardizer::fit(take_rows(targets, splits.train));

  const Eigen::MatrixXd Xtr = m.in_norm.apply_rows(take_rows(inputs, splits.train));
  const Eigen::MatrixXd Ytr = m.out_norm.apply_rows(take_rows(targets, splits.train));
  const Eigen::MatrixXd Xval = m.in_norm.apply_rows(take_rows(inputs, splits.val));
  const Eigen::MatrixXd Yval = m.out_norm.apply_rows(take_rows(targets, splits.val));

  const int in_dim = static_cast<int>(inputs.cols());
  const int out_dim = static_cast<int>(targets.cols());
  for (int expert = 0; expert < k; ++expert) {
    std::vector<int> tr, val;
    for (std::size_t i = 0; i < splits.train.size(); ++i)
      if (labels[splits.train[i]] == expert) tr.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < splits.val.size(); ++i)
      if (labels[splits.val[i]] == expert) val.push_back(static_cast<int>(i));
    if (tr.empty())
      throw std::invalid_argument("cluster " + std::to_string(expert) +
                                  " has no training samples");
    Mlp net = make_mlp({in_dim, opts.expert_hidden, out_dim},
                       opts.train.seed + 1000 + static_cast<std::uint64_t>(expert));
    TrainOptions topts = opts.train;
    topts.loss = LossKind::kSquaredError;
    train_mlp(net, take_rows(Xtr, tr), take_rows(Ytr, tr), take_rows(Xval, val),
              take_rows(Yval, val), topts);
    m.experts.push_back(std::move(net));
  }

  auto one_hot = [k](const std::vector<int>& all, const std::vector<int>& rows) {
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), k);
    for (std::size_t i = 0; i < rows.size(); ++i) Y(static_cast<Eigen::Index>(i), all[rows[i]]) = 1.0;
    return Y;
  };
  m.gating = make_mlp({in_dim, opts.gating_hidden, k}, opts.train.seed + 999);
  TrainOptions gopts = opts.train;
  gopts.loss = LossKind::kCrossEntropy;
  train_mlp(m.gating, Xtr, one_hot(labels, splits.train), Xval, one_hot(labels, splits.val),
            gopts);
  return m;
}

Eigen::VectorXd moe_gate_probabilities(const MoeModel& m, const Eigen::VectorXd& x) {
  return softmax(m.gating.forward(m.in_norm.apply(x)));
}

std::pair<std::vector<Eigen::VectorXd>, std::vector<Eigen::VectorXd>> moe_predict(
    const MoeModel& m, const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = m.in_norm.apply(x);
  Eigen::Index expert = 0;
  m.gating.forward(z).maxCoeff(&expert);
  const Eigen::VectorXd y = m.out_norm.invert(m.experts[expert].forward(z));
  return unflatten_warm_start(y, m.shape);
}

namespace {

constexpr char kModelMagic[4] = {'T', 'W', 'M', 'L'};

struct TensorOut {
  nlohmann::ordered_json header_entries = nlohmann::ordered_json::array();
  std::vector<double> blob;

  void add(const std::string& name, const Eigen::MatrixXd& t) {
    header_entries.push_back({{"name", name},
                              {"rows", static_cast<int>(t.rows())},
                              {"cols", static_cast<int>(t.cols())}});
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j) blob.push_back(t(i, j));
  }
  void add(const std::string& name, const Eigen::VectorXd& t) { add(name, Eigen::MatrixXd(t)); }

  void add_mlp(const std::string& prefix, const Mlp& net) {
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      add(prefix + ".W" + std::to_string(l), net.weights[l]);
      add(prefix + ".b" + std::to_string(l), net.biases[l]);
    }
  }
  void add_standardizers(const Standardizer& in_norm, const Standardizer& out_norm) {
    add("in_norm.mean", in_norm.mean);
    add("in_norm.scale", in_norm.scale);
    add("out_norm.mean", out_norm.mean);
    add("out_norm.scale", out_norm.scale);
  }
};

void write_model_file(const std::string& path, nlohmann::ordered_json header,
                      const TensorOut& tensors) {
  header["tensors"] = tensors.header_entries;
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("open for write failed: " + path);
  out.write(kModelMagic, 4);
  const std::uint32_t len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(tensors.blob.data()),
            static_cast<std::streamsize>(tensors.blob.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct TensorIn {
  nlohmann::json header;
  std::vector<double> blob;
  std::size_t at = 0;
  std::size_t entry = 0;
  std::string path;

  Eigen::MatrixXd take(const std::string& name) {
    const auto& entries = header.at("tensors");
    if (entry >= entries.size())
      throw std::runtime_error("missing tensor " + name + " in " + path);
    const auto& e = entries[entry++];
    if (e.at("name").get<std::string>() != name)
      throw std::runtime_error("expected tensor " + name + " in " + path);
    const Eigen::Index rows = e.at("rows").get<int>();
    const Eigen::Index cols = e.at("cols").get<int>();
    if (at + static_cast<std::size_t>(rows * cols) > blob.size())
      throw std::runtime_error("truncated tensor blob in " + path);
    Eigen::MatrixXd t(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) t(i, j) = blob[at++];
    return t;
  }
  Eigen::VectorXd take_vector(const std::string& name) { return take(name).col(0); }

  Mlp take_mlp(const std::string& prefix, const std::vector<int>& sizes) {
    Mlp net;
    net.sizes = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      net.weights.push_back(take(prefix + ".W" + std::to_string(l)));
      net.biases.push_back(take_vector(prefix + ".b" + std::to_string(l)));
    }
    return net;
  }
  void take_standardizers(Standardizer& in_norm, Standardizer& out_norm) {
    in_norm.mean = take_vector("in_norm.mean");
    in_norm.scale = take_vector("in_norm.scale");
    out_norm.mean = take_vector("out_norm.mean");
    out_norm.scale = take_vector("out_norm.scale");
  }
};

TensorIn read_model_file(const std::string& path, const std::string& expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("open for read failed: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    throw std::runtime_error("bad magic in model file: " + path);
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw std::runtime_error("truncated model header: " + path);
  TensorIn t;
  t.path = path;
  t.header = nlohmann::json::parse(text);
  if (t.header.at("kind").get<std::string>() != expected_kind)
    throw std::runtime_error("model file " + path + " holds a '" +
                             t.header.at("kind").get<std::string>() + "' model, expected '" +
                             expected_kind + "'");
  std::size_t total = 0;
  for (const auto& e : t.header.at("tensors"))
    total += static_cast<std::size_t>(e.at("rows").get<int>()) * e.at("cols").get<int>();
  t.blob.resize(total);
  in.read(reinterpret_cast<char*>(t.blob.data()),
          static_cast<std::streamsize>(total * sizeof(double)));
  if (!in) throw std::runtime_error("truncated tensor blob in " + path);
  return t;
}

nlohmann::ordered_json shape_header(const WarmStartShape& shape) {
  return {{"state_dim", shape.state_dim},
          {"control_dim", shape.control_dim},
          {"horizon", shape.horizon}};
}

WarmStartShape shape_from_header(const nlohmann::json& h) {
  WarmStartShape s;
  s.state_dim = h.at("state_dim").get<int>();
  s.control_dim = h.at("control_dim").get<int>();
  s.horizon = h.at("horizon").get<int>();
  return s;
}

}  // namespace

void save_mlp_regressor(const std::string& path, const MlpRegressor& reg) {
  TensorOut t;
  t.add_mlp("net", reg.net);
  t.add_standardizers(reg.in_norm, reg.out_norm);
  write_model_file(path,
                   {{"kind", "mlp"}, {"sizes", reg.net.sizes}, {"shape", shape_header(reg.shape)}},
                   t);
}

MlpRegressor load_mlp_regressor(const std::string& path) {
  TensorIn t = read_model_file(path, "mlp");
  MlpRegressor reg;
  reg.net = t.take_mlp("net", t.header.at("sizes").get<std::vector<int>>());
  t.take_standardizers(reg.in_norm, reg.out_norm);
  reg.shape = shape_from_header(t.header.at("shape"));
  return reg;
}

void save_knn_model(const std::string& path, const KnnModel& model) {
  TensorOut t;
  t.add("inputs", model.inputs);
  t.add("targets", model.targets);
  t.add("in_norm.mean", model.in_norm.mean);
  t.add("in_norm.scale", model.in_norm.scale);
  write_model_file(path, {{"kind", "knn"}, {"k", model.k}, {"shape", shape_header(model.shape)}},
                   t);
}

KnnModel load_knn_model(const std::string& path) {
  TensorIn t = read_model_file(path, "knn");
  KnnModel model;
  model.inputs = t.take("inputs");
  model.targets = t.take("targets");
  model.in_norm.mean = t.take_vector("in_norm.mean");
  model.in_norm.scale = t.take_vector("in_norm.scale");
  model.k = t.header.at("k").get<int>();
  model.shape = shape_from_header(t.header.at("shape"));
  return model;
}

void save_moe_model(const std::string& path, const MoeModel& model) {
  TensorOut t;
  t.add_mlp("gating", model.gating);
  for (int e = 0; e < model.k; ++e) t.add_mlp("expert" + std::to_string(e), model.experts[e]);
  t.add_standardizers(model.in_norm, model.out_norm);
  nlohmann::ordered_json expert_sizes = nlohmann::ordered_json::array();
  for (const auto& expert : model.experts) expert_sizes.push_back(expert.sizes);
  write_model_file(path,
                   {{"kind", "moe"},
                    {"k", model.k},
                    {"gating_sizes", model.gating.sizes},
                    {"expert_sizes", expert_sizes},
                    {"shape", shape_header(model.shape)}},
                   t);
}

MoeModel load_moe_model(const std::string& path) {
  TensorIn t = read_model_file(path, "moe");
  MoeModel model;
  model.k = t.header.at("k").get<int>();
  model.gating = t.take_mlp("gating", t.header.at("gating_sizes").get<std::vector<int>>());
  for (int e = 0; e < model.k; ++e)
    model.experts.push_back(t.take_mlp(
        "expert" + std::to_string(e),
        t.header.at("expert_sizes")[static_cast<std::size_t>(e)].get<std::vector<int>>()));
  t.take_standardizers(model.in_norm, model.out_norm);
  model.shape = shape_from_header(t.header.at("shape"));
  return model;
}

}  // namespace trajtopo
