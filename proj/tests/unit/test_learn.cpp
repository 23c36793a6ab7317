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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

namespace trajtopo {
namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

/// True when some hidden pre-activation sits too close to the ReLU kink for
/// central differences to be trustworthy.
bool near_relu_kink(const Mlp& net, const Eigen::MatrixXd& X, double tol) {
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    Eigen::VectorXd a = X.row(r).transpose();
    for (std::size_t l = 0; l + 1 < net.weights.size(); ++l) {
      const Eigen::VectorXd z = net.weights[l] * a + net.biases[l];
      if (z.cwiseAbs().minCoeff() < tol) return true;
      a = z.cwiseMax(0.0);
    }
  }
  return false;
}

double fd_loss(Mlp net, int layer, int i, int j, bool bias, double h, const Eigen::MatrixXd& X,
               const Eigen::MatrixXd& Y, LossKind kind) {
  if (bias)
    net.biases[layer](i) += h;
  else
    net.weights[layer](i, j) += h;
  return mlp_loss(net, X, Y, kind);
}

void expect_gradients_match(const Mlp& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                            LossKind kind) {
  const MlpGradients g = mlp_loss_gradients(net, X, Y, kind);
  const double h = 1e-6;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    double max_ref = 1.0;
    max_ref = std::max(max_ref, g.dW[l].cwiseAbs().maxCoeff());
    max_ref = std::max(max_ref, g.db[l].cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < net.weights[l].cols(); ++j) {
        const double fd = (fd_loss(net, l, i, j, false, h, X, Y, kind) -
                           fd_loss(net, l, i, j, false, -h, X, Y, kind)) /
                          (2.0 * h);
        EXPECT_NEAR(g.dW[l](i, j), fd, 1e-4 * max_ref) << "layer " << l << " W(" << i << "," << j
                                                       << ")";
      }
      const double fd = (fd_loss(net, l, i, 0, true, h, X, Y, kind) -
                         fd_loss(net, l, i, 0, true, -h, X, Y, kind)) /
                        (2.0 * h);
      EXPECT_NEAR(g.db[l](i), fd, 1e-4 * max_ref) << "layer " << l << " b(" << i << ")";
    }
  }
}

TEST(MlpForward, SingleLayerIsAffine) {
  Mlp net;
  net.sizes = {2, 2};
  Eigen::MatrixXd w(2, 2);
  w << 1.0, 2.0, -3.0, 0.5;
  net.weights = {w};
  net.biases = {Eigen::Vector2d(0.25, -1.0)};
  const Eigen::VectorXd y = net.forward(Eigen::Vector2d(1.0, -1.0));
  // Output layer has no activation, so negatives pass through.
  EXPECT_DOUBLE_EQ(y(0), 1.0 - 2.0 + 0.25);
  EXPECT_DOUBLE_EQ(y(1), -3.0 - 0.5 - 1.0);
}

TEST(MlpForward, HiddenLayerClampsAtZero) {
  Mlp net;
  net.sizes = {1, 2, 1};
  Eigen::MatrixXd w0(2, 1);
  w0 << 1.0, -1.0;
  Eigen::MatrixXd w1(1, 2);
  w1 << 1.0, 1.0;
  net.weights = {w0, w1};
  net.biases = {Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(1)};
  // ReLU keeps exactly one of (x, -x): the network computes |x|.
  EXPECT_DOUBLE_EQ(net.forward(Eigen::VectorXd::Constant(1, 3.0))(0), 3.0);
  EXPECT_DOUBLE_EQ(net.forward(Eigen::VectorXd::Constant(1, -2.0))(0), 2.0);
}

TEST(MlpForward, ParameterCountFormula) {
  const Mlp net = make_mlp({12, 200, 796}, 0);
  EXPECT_EQ(net.parameter_count(), (12 + 1) * 200 + (200 + 1) * 796);
  const Mlp tiny = make_mlp({3, 4, 2}, 0);
  EXPECT_EQ(tiny.parameter_count(), 4 * 4 + 5 * 2);
}

TEST(MlpGradients, MatchCentralDifferencesAtManyPoints) {
  std::mt19937_64 rng(101);
  int checked = 0;
  while (checked < 100) {
    const Mlp net = make_mlp({3, 5, 4, 2}, rng());
    const Eigen::MatrixXd X = random_matrix(3, 3, rng);
    const Eigen::MatrixXd Y = random_matrix(3, 2, rng);
    if (near_relu_kink(net, X, 1e-4)) continue;
    expect_gradients_match(net, X, Y, LossKind::kSquaredError);
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(MlpGradients, CrossEntropyMatchesCentralDifferences) {
  std::mt19937_64 rng(102);
  int checked = 0;
  while (checked < 100) {
    const Mlp net = make_mlp({4, 6, 3}, rng());
    const Eigen::MatrixXd X = random_matrix(2, 4, rng);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(2, 3);
    Y(0, static_cast<int>(rng() % 3)) = 1.0;
    Y(1, static_cast<int>(rng() % 3)) = 1.0;
    if (near_relu_kink(net, X, 1e-4)) continue;
    expect_gradients_match(net, X, Y, LossKind::kCrossEntropy);
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(Softmax, SumsToOneAndStaysPositive) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd logits = random_matrix(5, 1, rng, 100.0).col(0);
    const Eigen::VectorXd p = softmax(logits);
    EXPECT_NEAR(p.sum(), 1.0, 1e-9);
    EXPECT_GT(p.minCoeff(), 0.0);
  }
}

TEST(Softmax, StableUnderLargeLogitsAndShifts) {
  Eigen::VectorXd logits(3);
  logits << 1e4, 1e4 - 5.0, -1e4;
  const Eigen::VectorXd p = softmax(logits);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p.sum(), 1.0, 1e-9);
  const Eigen::VectorXd shifted = softmax((logits.array() + 123.0).matrix());
  EXPECT_LT((p - shifted).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(TrainMlp, FitsLinearMapBelowClosedFormTolerance) {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd X(100, 1), Y(100, 1);
  for (int i = 0; i < 100; ++i) {
    X(i, 0) = dist(rng);
    Y(i, 0) = 2.0 * X(i, 0);
  }
  const SplitIndices splits = make_splits(100, 7);
  Mlp net = make_mlp({1, 8, 1}, 1);
  TrainOptions opts;
  opts.epochs = 2000;
  opts.patience = 2000;  // the point is the full 2000-epoch budget
  opts.seed = 13;
  const TrainResult result = train_mlp(net, take_rows(X, splits.train), take_rows(Y, splits.train),
                                       take_rows(X, splits.val), take_rows(Y, splits.val), opts);
  EXPECT_LT(result.val_loss, 1e-4);
  // An exact linear fit exists, so the trained net must track y = 2x closely.
  for (double x : {-0.9, -0.3, 0.2, 0.8})
    EXPECT_NEAR(net.forward(Eigen::VectorXd::Constant(1, x))(0), 2.0 * x, 0.05);
}

TEST(TrainMlp, ZeroEpochsLeaveParametersUntouched) {
  std::mt19937_64 rng(105);
  Mlp net = make_mlp({2, 3, 1}, 99);
  const Mlp before = net;
  TrainOptions opts;
  opts.epochs = 0;
  train_mlp(net, random_matrix(10, 2, rng), random_matrix(10, 1, rng), Eigen::MatrixXd(0, 2),
            Eigen::MatrixXd(0, 1), opts);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    EXPECT_EQ(net.weights[l], before.weights[l]);
    EXPECT_EQ(net.biases[l], before.biases[l]);
  }
}

TEST(TrainMlp, IdenticalSeedsReproduceBitIdenticalParameters) {
  std::mt19937_64 rng(106);
  const Eigen::MatrixXd X = random_matrix(40, 2, rng);
  const Eigen::MatrixXd Y = random_matrix(40, 3, rng);
  TrainOptions opts;
  opts.epochs = 50;
  opts.seed = 21;
  Mlp a = make_mlp({2, 6, 3}, 5);
  Mlp b = make_mlp({2, 6, 3}, 5);
  train_mlp(a, X, Y, Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 3), opts);
  train_mlp(b, X, Y, Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 3), opts);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    EXPECT_EQ(a.weights[l], b.weights[l]);
    EXPECT_EQ(a.biases[l], b.biases[l]);
  }
}

TEST(TrainMlp, DivergenceRaisesWithDiagnostics) {
  std::mt19937_64 rng(107);
  const Eigen::MatrixXd X = random_matrix(16, 2, rng, 10.0);
  const Eigen::MatrixXd Y = random_matrix(16, 1, rng, 10.0);
  Mlp net = make_mlp({2, 4, 1}, 3);
  TrainOptions opts;
  opts.epochs = 50;
  opts.lr = 1e155;  // one update flings the weights past double range
  EXPECT_THROW(
      train_mlp(net, X, Y, Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 1), opts),
      std::runtime_error);
}

TEST(TrainMlp, RejectsMismatchedShapes) {
  Mlp net = make_mlp({2, 3, 1}, 1);
  Eigen::MatrixXd x(4, 2), bad_y(4, 2), y(4, 1), short_y(3, 1);
  x.setZero();
  bad_y.setZero();
  y.setZero();
  short_y.setZero();
  TrainOptions opts;
  EXPECT_THROW(train_mlp(net, x, bad_y, x, bad_y, opts), std::invalid_argument);
  EXPECT_THROW(train_mlp(net, x, short_y, x, y, opts), std::invalid_argument);
}

TEST(MakeSplits, PartitionsDeterministically) {
  const SplitIndices a = make_splits(100, 31);
  const SplitIndices b = make_splits(100, 31);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size(), 70u);
  EXPECT_EQ(a.val.size(), 15u);
  EXPECT_EQ(a.test.size(), 15u);
  std::vector<bool> seen(100, false);
  for (const auto* part : {&a.train, &a.val, &a.test})
    for (int i : *part) {
      EXPECT_FALSE(seen[i]);
      seen[i] = true;
    }
  for (bool s : seen) EXPECT_TRUE(s);
}

TEST(MakeSplits, TinyDatasetsKeepEverySplitUsable) {
  const SplitIndices s = make_splits(3, 5);
  EXPECT_EQ(s.train.size(), 1u);
  EXPECT_EQ(s.val.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_THROW(make_splits(0, 1), std::invalid_argument);
}

TEST(Standardizer, MatchesHandComputedMoments) {
  Eigen::MatrixXd X(4, 2);
  X << 1.0, 10.0, 3.0, 10.0, 5.0, 10.0, 7.0, 10.0;
  const Standardizer s = Standardizer::fit(X);
  EXPECT_DOUBLE_EQ(s.mean(0), 4.0);
  EXPECT_DOUBLE_EQ(s.mean(1), 10.0);
  EXPECT_DOUBLE_EQ(s.scale(0), std::sqrt(5.0));  // population std of {1,3,5,7}
  EXPECT_DOUBLE_EQ(s.scale(1), 1e-12);           // floored constant column
  const Eigen::VectorXd x = Eigen::Vector2d(6.0, 10.0);
  EXPECT_LT((s.invert(s.apply(x)) - x).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(KnnPredict, ExactNeighborReturnsItsTarget) {
  Eigen::MatrixXd inputs(3, 2), targets(3, 1);
  inputs << 0.0, 0.0, 1.0, 1.0, 5.0, 5.0;
  targets << 10.0, 20.0, 30.0;
  const Eigen::VectorXd pred = knn_predict(inputs, targets, Eigen::Vector2d(1.0, 1.0), 1);
  EXPECT_DOUBLE_EQ(pred(0), 20.0);
}

TEST(KnnPredict, FullNeighborhoodIsGlobalMean) {
  std::mt19937_64 rng(108);
  const Eigen::MatrixXd inputs = random_matrix(12, 3, rng);
  const Eigen::MatrixXd targets = random_matrix(12, 2, rng);
  const Eigen::VectorXd pred = knn_predict(inputs, targets, Eigen::Vector3d(0.1, 0.2, 0.3), 12);
  EXPECT_LT((pred - targets.colwise().mean().transpose()).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(KnnPredict, SmallKStaysInsideTheQueryCluster) {
  Eigen::MatrixXd inputs(6, 1), targets(6, 1);
  inputs << -1.1, -1.0, -0.9, 9.0, 10.0, 11.0;
  targets << 4.9, 5.0, 5.1, -5.0, -5.1, -4.9;
  const Eigen::VectorXd pred = knn_predict(inputs, targets, Eigen::VectorXd::Constant(1, -1.0), 3);
  EXPECT_NEAR(pred(0), 5.0, 1e-12);
}

TEST(KnnPredict, RejectsBadArguments) {
  Eigen::MatrixXd inputs(2, 1), targets(2, 1);
  inputs << 0.0, 1.0;
  targets << 0.0, 1.0;
  const Eigen::VectorXd q = Eigen::VectorXd::Zero(1);
  EXPECT_THROW(knn_predict(Eigen::MatrixXd(0, 1), Eigen::MatrixXd(0, 1), q, 1),
               std::invalid_argument);
  EXPECT_THROW(knn_predict(inputs, targets, q, 0), std::invalid_argument);
  EXPECT_THROW(knn_predict(inputs, targets, q, 3), std::invalid_argument);
  EXPECT_THROW(knn_predict(inputs, targets, Eigen::Vector2d(0, 0), 1), std::invalid_argument);
}

TEST(KnnSelectK, PicksTheClusterSizeOnAveragingData) {
  // Two far-apart clusters of three samples. The validation targets equal the
  // cluster target means, but the nearest one and two neighbors are biased,
  // so k=3 is the unique optimum; k>3 mixes clusters and is far worse.
  Eigen::MatrixXd train_in(6, 1), train_tgt(6, 1);
  train_in << -1.01, -1.0, -0.99, 0.99, 1.0, 1.01;
  train_tgt << 0.9, 1.2, 0.9, -0.9, -1.2, -0.9;
  Eigen::MatrixXd val_in(2, 1), val_tgt(2, 1);
  val_in << -1.003, 1.003;
  val_tgt << 1.0, -1.0;
  EXPECT_EQ(knn_select_k(train_in, train_tgt, val_in, val_tgt, 6), 3);
}

TEST(WarmStartShape, FlattenRoundTripsAndKeepsLayout) {
  const WarmStartShape shape{3, 2, 4};
  std::mt19937_64 rng(109);
  std::vector<Eigen::VectorXd> X, U;
  for (int t = 0; t < 4; ++t) X.push_back(random_matrix(3, 1, rng).col(0));
  for (int t = 0; t < 3; ++t) U.push_back(random_matrix(2, 1, rng).col(0));
  const Eigen::VectorXd y = flatten_warm_start(X, U);
  ASSERT_EQ(y.size(), shape.flat_dim());
  EXPECT_DOUBLE_EQ(y(0), X[0](0));
  EXPECT_DOUBLE_EQ(y(3 * 4), U[0](0));  // controls start right after the states
  const auto [X2, U2] = unflatten_warm_start(y, shape);
  ASSERT_EQ(X2.size(), 4u);
  ASSERT_EQ(U2.size(), 3u);
  for (int t = 0; t < 4; ++t) EXPECT_EQ(X2[t], X[t]);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(U2[t], U[t]);
  EXPECT_THROW(unflatten_warm_start(y.head(5), shape), std::invalid_argument);
}

/// Builds labeled two-cluster data: inputs near (-2,-2) and (2,2), targets
/// sign-flipped between the clusters so the global mean cancels.
struct TwoClusterData {
  Eigen::MatrixXd inputs, targets;
  std::vector<int> labels;
};

TwoClusterData make_two_cluster_data(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  TwoClusterData d;
  d.inputs.resize(n, 2);
  d.targets.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const double center = label == 0 ? -2.0 : 2.0;
    d.inputs(i, 0) = center + noise(rng);
    d.inputs(i, 1) = center + noise(rng);
    const double sign = label == 0 ? 1.0 : -1.0;
    for (int j = 0; j < 3; ++j) d.targets(i, j) = sign * (3.0 + 0.5 * d.inputs(i, 0)) + j;
    d.labels.push_back(label);
  }
  return d;
}

TEST(TrainMoe, GatingSeparatesWellSeparatedClusters) {
  const TwoClusterData d = make_two_cluster_data(240, 42);
  const SplitIndices splits = make_splits(240, 9);
  MoeOptions opts;
  opts.expert_hidden = 8;
  opts.gating_hidden = 8;
  opts.train.epochs = 300;
  opts.train.seed = 3;
  const WarmStartShape shape{1, 1, 2};  // targets are 3 = 2 states + 1 control
  const MoeModel m = train_moe(d.inputs, d.targets, d.labels, 2, splits, shape, opts);

  int correct = 0;
  for (int i : splits.test) {
    const Eigen::VectorXd p = moe_gate_probabilities(m, d.inputs.row(i).transpose());
    EXPECT_NEAR(p.sum(), 1.0, 1e-9);
    Eigen::Index argmax = 0;
    p.maxCoeff(&argmax);
    correct += (static_cast<int>(argmax) == d.labels[i]);
  }
  EXPECT_GE(static_cast<double>(correct) / splits.test.size(), 0.99);
}

TEST(TrainMoe, SingleClusterEqualsItsOnlyExpert) {
  const TwoClusterData d = make_two_cluster_data(60, 43);
  const std::vector<int> labels(60, 0);
  const SplitIndices splits = make_splits(60, 10);
  MoeOptions opts;
  opts.expert_hidden = 6;
  opts.gating_hidden = 4;
  opts.train.epochs = 40;
  const WarmStartShape shape{1, 1, 2};
  const MoeModel m = train_moe(d.inputs, d.targets, labels, 1, splits, shape, opts);

  const Eigen::VectorXd x = d.inputs.row(0).transpose();
  const auto [X, U] = moe_predict(m, x);
  const Eigen::VectorXd direct = m.out_norm.invert(m.experts[0].forward(m.in_norm.apply(x)));
  EXPECT_EQ(flatten_warm_start(X, U), direct);
}

TEST(TrainMoe, RejectsEmptyClustersAndBadLabels) {
  const TwoClusterData d = make_two_cluster_data(40, 44);
  const SplitIndices splits = make_splits(40, 11);
  MoeOptions opts;
  opts.train.epochs = 1;
  const WarmStartShape shape{1, 1, 2};
  const std::vector<int> all_zero(40, 0);
  EXPECT_THROW(train_moe(d.inputs, d.targets, all_zero, 2, splits, shape, opts),
               std::invalid_argument);
  std::vector<int> out_of_range(40, 0);
  out_of_range[3] = 7;
  EXPECT_THROW(train_moe(d.inputs, d.targets, out_of_range, 2, splits, shape, opts),
               std::invalid_argument);
}

/// Hand-assembled mixture whose gating is forced to a fixed expert.
MoeModel forced_gate_model(int winner) {
  MoeModel m;
  m.k = 3;
  m.shape = {1, 1, 2};
  m.in_norm = Standardizer::identity(2);
  m.out_norm = Standardizer::identity(3);
  m.gating = make_mlp({2, 3}, 1);
  m.gating.weights[0].setZero();
  m.gating.biases[0].setZero();
  m.gating.biases[0](winner) = 50.0;
  for (int e = 0; e < 3; ++e) m.experts.push_back(make_mlp({2, 4, 3}, 100 + e));
  return m;
}

TEST(MoePredict, OneHotGateReturnsThatExpertExactly) {
  const MoeModel m = forced_gate_model(2);
  const Eigen::VectorXd x = Eigen::Vector2d(0.7, -0.3);
  const Eigen::VectorXd p = moe_gate_probabilities(m, x);
  EXPECT_GT(p(2), 0.999);
  const auto [X, U] = moe_predict(m, x);
  EXPECT_EQ(flatten_warm_start(X, U), m.experts[2].forward(x));
  ASSERT_EQ(X.size(), 2u);  // horizon knots
  ASSERT_EQ(U.size(), 1u);  // one fewer control
}

TEST(MoePredict, ScalingLogitsKeepsTheSelectedExpert) {
  MoeModel m = forced_gate_model(1);
  const Eigen::VectorXd x = Eigen::Vector2d(-0.2, 0.9);
  const auto [X1, U1] = moe_predict(m, x);
  m.gating.weights[0] *= 3.0;  // positive scaling preserves the argmax
  m.gating.biases[0] *= 3.0;
  const auto [X2, U2] = moe_predict(m, x);
  EXPECT_EQ(flatten_warm_start(X1, U1), flatten_warm_start(X2, U2));
}

TEST(TrainMoe, BeatsMatchedSingleNetworkOnBimodalTargets) {
  const TwoClusterData d = make_two_cluster_data(400, 45);
  // Overlap the clusters in input space except for the first coordinate's
  // sign, and make the targets cancel: the class-conditional means are
  // opposite, so one net of matched capacity regresses toward their average.
  Eigen::MatrixXd inputs = d.inputs;
  std::mt19937_64 rng(46);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd targets(400, 2);
  std::vector<int> labels(400);
  for (int i = 0; i < 400; ++i) {
    inputs(i, 0) = u(rng);
    inputs(i, 1) = u(rng);
    labels[i] = inputs(i, 0) > 0.0 ? 1 : 0;
    const double sign = labels[i] == 0 ? 1.0 : -1.0;
    targets(i, 0) = sign * (3.0 + 0.5 * inputs(i, 0));
    targets(i, 1) = sign * (2.0 - 0.25 * inputs(i, 0));
  }
  const SplitIndices splits = make_splits(400, 12);

  MoeOptions opts;
  opts.expert_hidden = 10;
  opts.gating_hidden = 10;
  opts.train.epochs = 400;
  opts.train.seed = 4;
  const WarmStartShape shape{1, 0, 2};
  const MoeModel moe = train_moe(inputs, targets, labels, 2, splits, shape, opts);

  // Matched parameter count: 2 experts + gating vs one wider net.
  const int moe_params = moe.gating.parameter_count() + moe.experts[0].parameter_count() +
                         moe.experts[1].parameter_count();
  Mlp single = make_mlp({2, 31, 2}, 8);
  EXPECT_LT(std::abs(single.parameter_count() - moe_params),
            0.03 * static_cast<double>(moe_params));
  const Standardizer in_norm = Standardizer::fit(take_rows(inputs, splits.train));
  const Standardizer out_norm = Standardizer::fit(take_rows(targets, splits.train));
  TrainOptions sopts = opts.train;
  train_mlp(single, in_norm.apply_rows(take_rows(inputs, splits.train)),
            out_norm.apply_rows(take_rows(targets, splits.train)),
            in_norm.apply_rows(take_rows(inputs, splits.val)),
            out_norm.apply_rows(take_rows(targets, splits.val)), sopts);

  double moe_mse = 0.0, single_mse = 0.0;
  for (int i : splits.test) {
    const Eigen::VectorXd x = inputs.row(i).transpose();
    const auto [X, U] = moe_predict(moe, x);
    const Eigen::VectorXd truth = targets.row(i).transpose();
    moe_mse += (flatten_warm_start(X, U) - truth).squaredNorm();
    const Eigen::VectorXd pred = out_norm.invert(single.forward(in_norm.apply(x)));
    single_mse += (pred - truth).squaredNorm();
  }
  EXPECT_LT(moe_mse, single_mse);
}

TEST(ModelFiles, MlpRegressorRoundTripsBitExactly) {
  std::mt19937_64 rng(110);
  MlpRegressor reg;
  reg.net = make_mlp({3, 7, 5}, 55);
  reg.in_norm.mean = random_matrix(3, 1, rng).col(0);
  reg.in_norm.scale = random_matrix(3, 1, rng).col(0).cwiseAbs().array() + 0.5;
  reg.out_norm.mean = random_matrix(5, 1, rng).col(0);
  reg.out_norm.scale = random_matrix(5, 1, rng).col(0).cwiseAbs().array() + 0.5;
  reg.shape = {1, 1, 3};
  const std::string path = ::testing::TempDir() + "reg.twml";
  save_mlp_regressor(path, reg);
  const MlpRegressor back = load_mlp_regressor(path);
  const Eigen::VectorXd x = random_matrix(3, 1, rng).col(0);
  EXPECT_EQ(regressor_predict(back, x), regressor_predict(reg, x));
  EXPECT_EQ(back.shape.horizon, 3);
}

TEST(ModelFiles, KnnAndMoeRoundTrip) {
  std::mt19937_64 rng(111);
  KnnModel knn;
  knn.inputs = random_matrix(6, 2, rng);
  knn.targets = random_matrix(6, 3, rng);
  knn.in_norm = Standardizer::identity(2);
  knn.k = 2;
  knn.shape = {1, 1, 2};
  const std::string knn_path = ::testing::TempDir() + "knn.twml";
  save_knn_model(knn_path, knn);
  const KnnModel knn_back = load_knn_model(knn_path);
  const Eigen::VectorXd q = Eigen::Vector2d(0.1, -0.4);
  EXPECT_EQ(knn_model_predict(knn_back, q), knn_model_predict(knn, q));

  const MoeModel moe = forced_gate_model(1);
  const std::string moe_path = ::testing::TempDir() + "moe.twml";
  save_moe_model(moe_path, moe);
  const MoeModel moe_back = load_moe_model(moe_path);
  const Eigen::VectorXd x = Eigen::Vector2d(0.3, 0.8);
  const auto [X, U] = moe_predict(moe, x);
  const auto [Xb, Ub] = moe_predict(moe_back, x);
  EXPECT_EQ(flatten_warm_start(X, U), flatten_warm_start(Xb, Ub));
  EXPECT_EQ(flatten_warm_start(Xb, Ub), moe_back.experts[1].forward(x));
}

TEST(ModelFiles, WrongKindAndCorruptFilesAreRejected) {
  KnnModel knn;
  knn.inputs = Eigen::MatrixXd::Zero(2, 2);
  knn.targets = Eigen::MatrixXd::Zero(2, 1);
  knn.in_norm = Standardizer::identity(2);
  knn.shape = {1, 0, 2};
  const std::string path = ::testing::TempDir() + "kind.twml";
  save_knn_model(path, knn);
  EXPECT_THROW(load_mlp_regressor(path), std::runtime_error);

  const std::string bad = ::testing::TempDir() + "bad.twml";
  std::FILE* f = std::fopen(bad.c_str(), "wb");
  std::fputs("NOPE", f);
  std::fclose(f);
  EXPECT_THROW(load_knn_model(bad), std::runtime_error);
  EXPECT_THROW(load_knn_model(::testing::TempDir() + "absent.twml"), std::runtime_error);

  // Truncate the tensor blob and expect a loud failure.
  const std::string cut = ::testing::TempDir() + "cut.twml";
  std::filesystem::copy_file(path, cut, std::filesystem::copy_options::overwrite_existing);
  std::filesystem::resize_file(cut, std::filesystem::file_size(cut) - 9);
  EXPECT_THROW(load_knn_model(cut), std::runtime_error);
}

}  // namespace
}  // namespace trajtopo
