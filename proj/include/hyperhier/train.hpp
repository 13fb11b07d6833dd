#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hyperhier/embeddings.hpp"
#include "hyperhier/mlr.hpp"
#include "hyperhier/taxonomy.hpp"
#include "hyperhier/vec.hpp"

namespace hyperhier {

struct TrainConfig {
  double lr_offsets = 1e-4;    // Riemannian step on gyroplane offsets
  double lr_normals = 1e-3;    // plain step on gyroplane normals
  double lr_euclidean = 1e-3;  // plain step on euclidean weights and biases
  std::size_t steps = 5000;    // total minibatch updates
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// Normals and weights drawn from a zero-mean Gaussian with deviation
// 1/sqrt(dim); offsets and biases start at zero, so every decision surface
// initially passes through the origin.
FlatModel init_flat_model(Geometry geometry, std::size_t classes, std::size_t dim,
                          const BallConfig& ball, std::uint64_t seed);

// Gradients summed over a batch (divide by `count` for the mean). Exactly
// one arm is populated, mirroring FlatModel.
struct BatchGradients {
  std::vector<Vec> offsets;  // hyperbolic arm
  std::vector<Vec> normals;
  std::vector<Vec> weights;  // euclidean arm
  Vec biases;
  double loss = 0.0;  // summed over the batch
  std::size_t count = 0;
};

// `rows` indexes into `data`, which must already live in the model's input
// space (ball points for a hyperbolic model). The default kernel reduces
// fixed-size sample blocks in index order, so its output never depends on
// the thread count; the serial twin accumulates in plain row order and is
// kept as the reference for tests and benchmarks.
BatchGradients batch_gradients(const FlatModel& model, const LabeledEmbeddings& data,
                               std::span<const std::uint32_t> rows);
BatchGradients batch_gradients_serial(const FlatModel& model, const LabeledEmbeddings& data,
                                      std::span<const std::uint32_t> rows);

// One minibatch update from summed gradients. Gyroplane offsets move along
// exp_map(r, -lr_offsets * mean_grad / lambda(r)^2) — the euclidean gradient
// rescaled into the ball metric, retracted by the exponential map, then
// clamped inside the ball; at the origin the rescale factor is exactly 1/4.
// Normals, weights and biases take plain SGD steps. Non-finite gradients
// throw std::invalid_argument.
void rsgd_step(FlatModel& model, const BatchGradients& grads, const TrainConfig& cfg);

struct TrainResult {
  FlatModel model;
  std::vector<double> loss_trace;  // mean batch loss per step
};

// Multinomial training on raw euclidean features: hyperbolic models lift the
// whole set through the origin map once up front, matching the forward pass.
// Minibatches follow a fresh permutation per epoch keyed on (seed, epoch);
// a trailing short batch is used, not dropped. Every class must appear at
// least once and ignore labels are rejected.
TrainResult train_flat(const LabeledEmbeddings& raw, std::size_t classes, Geometry geometry,
                       const BallConfig& ball, const TrainConfig& cfg);

// Per-row argmax class of the model's posteriors (lowest index on ties).
std::vector<std::uint32_t> predict_batch(const FlatModel& model, const LabeledEmbeddings& raw);

// One binary logistic scorer per tree node.
struct NodeClassifier {
  Vec weight;
  double bias = 0.0;
};

struct TreeBaseline {
  std::vector<std::vector<NodeClassifier>> levels;  // [level][node]
  std::size_t dim = 0;
};

// Baseline that trains every tree node (leaves and ancestors) as its own
// sigmoid one-against-rest classifier on euclidean features; a node's
// positives are the samples whose ancestor at that level is the node. All
// nodes share the minibatch schedule, so one pass updates every classifier.
TreeBaseline train_onevsall_tree_baseline(const LabeledEmbeddings& raw, const LabelTree& tree,
                                          const TrainConfig& cfg);

// Labels at `level` by argmax over that level's node scores.
std::vector<std::uint32_t> predict_tree_level(const TreeBaseline& baseline,
                                              const LabeledEmbeddings& raw, std::size_t level);

}  // namespace hyperhier
