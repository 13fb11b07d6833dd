#include "hyperhier/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hyperhier/rng.hpp"

namespace hyperhier {

void TrainConfig::validate() const {
  if (!(lr_offsets > 0.0) || !(lr_normals > 0.0) || !(lr_euclidean > 0.0))
    throw std::invalid_argument("train config: learning rates must be positive");
  if (steps == 0) throw std::invalid_argument("train config: steps must be positive");
  if (batch_size == 0) throw std::invalid_argument("train config: batch size must be positive");
}

FlatModel init_flat_model(Geometry geometry, std::size_t classes, std::size_t dim,
                          const BallConfig& ball, std::uint64_t seed) {
  if (classes < 2) throw std::invalid_argument("init_flat_model: need at least 2 classes");
  if (dim == 0) throw std::invalid_argument("init_flat_model: zero dimension");
  ball.validate();
  FlatModel model;
  model.geometry = geometry;
  model.ball = ball;
  CounterRng rng = CounterRng::keyed(seed, streams::model_init);
  const double dev = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t k = 0; k < classes; ++k) {
    Vec direction(dim);
    for (double& x : direction) x = dev * rng.normal();
    if (geometry == Geometry::hyperbolic)
      model.planes.push_back(Gyroplane{BallPoint{Vec(dim, 0.0)}, Tangent{std::move(direction)}});
    else
      model.weights.push_back(Tangent{std::move(direction)});
  }
  if (geometry == Geometry::euclidean) model.biases.assign(classes, 0.0);
  model.validate();
  return model;
}

namespace {

BatchGradients zero_gradients(const FlatModel& model) {
  BatchGradients g;
  const std::size_t classes = model.classes();
  const std::size_t dim = model.dim();
  if (model.geometry == Geometry::hyperbolic) {
    g.offsets.assign(classes, Vec(dim, 0.0));
    g.normals.assign(classes, Vec(dim, 0.0));
  } else {
    g.weights.assign(classes, Vec(dim, 0.0));
    g.biases.assign(classes, 0.0);
  }
  return g;
}

// must not throw: runs inside the parallel region, where an escaping
// exception would terminate the process
void accumulate_sample(BatchGradients& g, const FlatModel& model, const LabeledEmbeddings& data,
                       std::uint32_t row) {
  const std::uint32_t y = data.labels[row];
  if (model.geometry == Geometry::hyperbolic) {
    const HyperbolicGradients s = grad_hyperbolic(data.sample(row), model.planes, model.ball, y);
    for (std::size_t k = 0; k < model.classes(); ++k) {
      add_scaled(g.offsets[k], 1.0, s.offsets[k]);
      add_scaled(g.normals[k], 1.0, s.normals[k]);
    }
    g.loss += s.loss;
  } else {
    const EuclideanGradients s =
        grad_euclidean(data.sample(row), model.weights, model.biases, y);
    for (std::size_t k = 0; k < model.classes(); ++k) {
      add_scaled(g.weights[k], 1.0, s.weights[k]);
      g.biases[k] += s.biases[k];
    }
    g.loss += s.loss;
  }
  g.count++;
}

void merge_gradients(BatchGradients& dst, const BatchGradients& src) {
  for (std::size_t k = 0; k < dst.offsets.size(); ++k) add_scaled(dst.offsets[k], 1.0, src.offsets[k]);
  for (std::size_t k = 0; k < dst.normals.size(); ++k) add_scaled(dst.normals[k], 1.0, src.normals[k]);
  for (std::size_t k = 0; k < dst.weights.size(); ++k) add_scaled(dst.weights[k], 1.0, src.weights[k]);
  for (std::size_t k = 0; k < dst.biases.size(); ++k) dst.biases[k] += src.biases[k];
  dst.loss += src.loss;
  dst.count += src.count;
}

void check_batch_inputs(const FlatModel& model, const LabeledEmbeddings& data,
                        std::span<const std::uint32_t> rows) {
  model.validate();
  data.validate();
  if (data.dim != model.dim())
    throw std::invalid_argument("batch_gradients: data and model dimension differ");
  if (rows.empty()) throw std::invalid_argument("batch_gradients: empty batch");
  for (std::uint32_t r : rows) {
    if (r >= data.count()) throw std::invalid_argument("batch_gradients: row index out of range");
    const std::uint32_t y = data.labels[r];
    if (y == kIgnoreLabel || y >= model.classes())
      throw std::invalid_argument("batch_gradients: label " + std::to_string(y) +
                                  " out of range");
    if (model.geometry == Geometry::hyperbolic &&
        model.ball.c * squared_norm(data.sample(r)) >= 1.0)
      throw std::invalid_argument("batch_gradients: sample outside the ball");
  }
}

bool gradients_finite(const BatchGradients& g) {
  for (const Vec& v : g.offsets)
    if (!all_finite(v)) return false;
  for (const Vec& v : g.normals)
    if (!all_finite(v)) return false;
  for (const Vec& v : g.weights)
    if (!all_finite(v)) return false;
  if (!all_finite(g.biases)) return false;
  return std::isfinite(g.loss);
}

}  // namespace

BatchGradients batch_gradients(const FlatModel& model, const LabeledEmbeddings& data,
                               std::span<const std::uint32_t> rows) {
  check_batch_inputs(model, data, rows);
  // fixed-size sample blocks merged in index order: the sum is a function of
  // the batch alone, never of the thread count
  constexpr std::size_t kBlock = 8;
  const std::size_t nblocks = (rows.size() + kBlock - 1) / kBlock;
  std::vector<BatchGradients> partial(nblocks);
#pragma omp parallel for schedule(static)
  for (long blk = 0; blk < static_cast<long>(nblocks); ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kBlock;
    const std::size_t hi = std::min(lo + kBlock, rows.size());
    partial[blk] = zero_gradients(model);
    for (std::size_t p = lo; p < hi; ++p) accumulate_sample(partial[blk], model, data, rows[p]);
  }
  BatchGradients out = zero_gradients(model);
  for (const BatchGradients& p : partial) merge_gradients(out, p);
  return out;
}

BatchGradients batch_gradients_serial(const FlatModel& model, const LabeledEmbeddings& data,
                                      std::span<const std::uint32_t> rows) {
  check_batch_inputs(model, data, rows);
  BatchGradients out = zero_gradients(model);
  for (std::uint32_t r : rows) accumulate_sample(out, model, data, r);
  return out;
}

void rsgd_step(FlatModel& model, const BatchGradients& grads, const TrainConfig& cfg) {
  cfg.validate();
  if (grads.count == 0) throw std::invalid_argument("rsgd_step: empty gradient batch");
  if (!gradients_finite(grads)) throw std::invalid_argument("rsgd_step: non-finite gradient");
  const double inv = 1.0 / static_cast<double>(grads.count);
  if (model.geometry == Geometry::hyperbolic) {
    if (grads.offsets.size() != model.planes.size() || grads.normals.size() != model.planes.size())
      throw std::invalid_argument("rsgd_step: gradient shape does not match model");
    for (std::size_t k = 0; k < model.planes.size(); ++k) {
      Gyroplane& plane = model.planes[k];
      // euclidean gradient -> ball metric: divide by lambda^2, retract along
      // the exponential map, stay inside the shell
      const double lam = conformal_factor(plane.offset, model.ball);
      const Tangent step{scaled(grads.offsets[k], -cfg.lr_offsets * inv / (lam * lam))};
      plane.offset = exp_map(plane.offset, step, model.ball);
      add_scaled(plane.normal.coords, -cfg.lr_normals * inv, grads.normals[k]);
    }
  } else {
    if (grads.weights.size() != model.weights.size() || grads.biases.size() != model.biases.size())
      throw std::invalid_argument("rsgd_step: gradient shape does not match model");
    for (std::size_t k = 0; k < model.weights.size(); ++k) {
      add_scaled(model.weights[k].coords, -cfg.lr_euclidean * inv, grads.weights[k]);
      model.biases[k] -= cfg.lr_euclidean * inv * grads.biases[k];
    }
  }
}

namespace {

void check_training_labels(const LabeledEmbeddings& raw, std::size_t classes) {
  std::vector<std::size_t> seen(classes, 0);
  for (std::uint32_t y : raw.labels) {
    if (y == kIgnoreLabel || y >= classes)
      throw std::invalid_argument("train: label " + std::to_string(y) + " out of range");
    seen[y]++;
  }
  for (std::size_t k = 0; k < classes; ++k)
    if (seen[k] == 0)
      throw std::invalid_argument("train: class " + std::to_string(k) + " has no samples");
}

}  // namespace

TrainResult train_flat(const LabeledEmbeddings& raw, std::size_t classes, Geometry geometry,
                       const BallConfig& ball, const TrainConfig& cfg) {
  cfg.validate();
  raw.validate();
  check_training_labels(raw, classes);
  TrainResult result;
  result.model = init_flat_model(geometry, classes, raw.dim, ball, cfg.seed);
  const LabeledEmbeddings space =
      geometry == Geometry::hyperbolic ? map_to_ball(raw, ball) : raw;
  const std::size_t n = space.count();
  result.loss_trace.reserve(cfg.steps);
  std::size_t done = 0;
  for (std::uint64_t epoch = 0; done < cfg.steps; ++epoch) {
    CounterRng rng = CounterRng::keyed(cfg.seed, streams::epoch_base + epoch);
    const std::vector<std::size_t> perm = random_permutation(n, rng);
    for (std::size_t start = 0; start < n && done < cfg.steps; start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, n);
      std::vector<std::uint32_t> rows;
      rows.reserve(stop - start);
      for (std::size_t p = start; p < stop; ++p)
        rows.push_back(static_cast<std::uint32_t>(perm[p]));
      const BatchGradients grads = batch_gradients(result.model, space, rows);
      rsgd_step(result.model, grads, cfg);
      result.loss_trace.push_back(grads.loss / static_cast<double>(grads.count));
      ++done;
    }
  }
  return result;
}

std::vector<std::uint32_t> predict_batch(const FlatModel& model, const LabeledEmbeddings& raw) {
  const std::vector<double> post = posterior_batch(model, raw);
  const std::size_t classes = model.classes();
  std::vector<std::uint32_t> labels(raw.count());
  for (std::size_t i = 0; i < raw.count(); ++i)
    labels[i] = static_cast<std::uint32_t>(
        argmax(std::span<const double>(post).subspan(i * classes, classes)));
  return labels;
}

TreeBaseline train_onevsall_tree_baseline(const LabeledEmbeddings& raw, const LabelTree& tree,
                                          const TrainConfig& cfg) {
  cfg.validate();
  raw.validate();
  if (const auto violation = validate_tree(tree))
    throw std::invalid_argument("tree baseline: bad tree: " + *violation);
  check_training_labels(raw, tree.size(0));

  TreeBaseline baseline;
  baseline.dim = raw.dim;
  CounterRng init = CounterRng::keyed(cfg.seed, streams::model_init);
  const double dev = 1.0 / std::sqrt(static_cast<double>(raw.dim));
  baseline.levels.resize(tree.depth());
  for (std::size_t level = 0; level < tree.depth(); ++level) {
    baseline.levels[level].resize(tree.size(level));
    for (NodeClassifier& node : baseline.levels[level]) {
      node.weight.resize(raw.dim);
      for (double& x : node.weight) x = dev * init.normal();
      node.bias = 0.0;
    }
  }

  // targets per level: a node is positive for the samples rooted under it
  const std::size_t n = raw.count();
  std::vector<std::vector<std::uint32_t>> level_label(tree.depth(), std::vector<std::uint32_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t level = 0; level < tree.depth(); ++level)
      level_label[level][i] =
          static_cast<std::uint32_t>(ancestor_label(raw.labels[i], level, tree));

  std::size_t done = 0;
  for (std::uint64_t epoch = 0; done < cfg.steps; ++epoch) {
    CounterRng rng = CounterRng::keyed(cfg.seed, streams::epoch_base + epoch);
    const std::vector<std::size_t> perm = random_permutation(n, rng);
    for (std::size_t start = 0; start < n && done < cfg.steps; start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, n);
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (std::size_t level = 0; level < tree.depth(); ++level)
        for (std::size_t node = 0; node < baseline.levels[level].size(); ++node) {
          NodeClassifier& clf = baseline.levels[level][node];
          Vec grad_w(raw.dim, 0.0);
          double grad_b = 0.0;
          for (std::size_t p = start; p < stop; ++p) {
            const std::size_t row = perm[p];
            const auto x = raw.sample(row);
            const double target = level_label[level][row] == node ? 1.0 : 0.0;
            const double score = dot(clf.weight, x) + clf.bias;
            const double residual = 1.0 / (1.0 + std::exp(-score)) - target;
            add_scaled(grad_w, residual, x);
            grad_b += residual;
          }
          add_scaled(clf.weight, -cfg.lr_euclidean * inv, grad_w);
          clf.bias -= cfg.lr_euclidean * inv * grad_b;
        }
      ++done;
    }
  }
  return baseline;
}

std::vector<std::uint32_t> predict_tree_level(const TreeBaseline& baseline,
                                              const LabeledEmbeddings& raw, std::size_t level) {
  raw.validate();
  if (level >= baseline.levels.size())
    throw std::invalid_argument("predict_tree_level: level out of range");
  if (raw.dim != baseline.dim)
    throw std::invalid_argument("predict_tree_level: dimension mismatch");
  const auto& nodes = baseline.levels[level];
  std::vector<std::uint32_t> labels(raw.count());
  std::vector<double> scores(nodes.size());
  for (std::size_t i = 0; i < raw.count(); ++i) {
    for (std::size_t k = 0; k < nodes.size(); ++k)
      scores[k] = dot(nodes[k].weight, raw.sample(i)) + nodes[k].bias;
    labels[i] = static_cast<std::uint32_t>(argmax(scores));
  }
  return labels;
}

}  // namespace hyperhier
