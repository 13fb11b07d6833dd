#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hyperhier/embeddings.hpp"
#include "hyperhier/metrics.hpp"
#include "hyperhier/mlr.hpp"
#include "hyperhier/synthetic.hpp"
#include "hyperhier/taxonomy.hpp"
#include "hyperhier/train.hpp"

namespace hyperhier {

// One full experiment: generate, train flat, score test data, fold child
// posteriors into parents, evaluate both levels, run the geometry
// diagnostics, and leave every artifact in out_dir.
struct RunConfig {
  Geometry geometry = Geometry::hyperbolic;
  SyntheticConfig synthetic;
  TrainConfig train;
  BallConfig ball;
  std::size_t calibration_bins = 15;
  CweceNorm cwece_norm = CweceNorm::total_samples;
  bool shuffle_tree = false;  // scramble child->parent assignments first
  std::uint64_t shuffle_seed = 1;
  std::filesystem::path out_dir;
  std::filesystem::path tree_path;  // empty: the generator's tree

  void validate() const;  // throws std::invalid_argument
};

struct LevelMetrics {
  double miou = 0.0;
  double macc = 0.0;
  double aacc = 0.0;
  double cwece = 0.0;
  std::vector<double> class_iou;
};

// Scores `test` with the model, evaluates child metrics, sums child
// posteriors into parent posteriors along the tree and evaluates those.
// Checks the bookkeeping as it goes: every evaluated sample lands exactly
// once in each confusion matrix and parent rows keep the child row's total
// probability to 1e-12 — violations throw InvariantViolation.
struct EvalResult {
  LevelMetrics child;
  LevelMetrics parent;
  std::uint64_t evaluated = 0;  // rows not carrying the ignore label
};
EvalResult evaluate_model(const FlatModel& model, const LabeledEmbeddings& test,
                          const LabelTree& tree, std::size_t bins, CweceNorm norm);

// One level's metric block as a JSON report file: sizes, the four summary
// numbers, and the per-class IoU column keyed by the level's names.
void write_level_metrics(const std::filesystem::path& path, const char* level,
                         const LevelMetrics& m, const std::vector<std::string>& names,
                         std::uint64_t evaluated);

// Geometry diagnostics for one raw euclidean dataset, written as JSON:
// per-class norm stats before and after the ball mapping, inter-class
// distance spread in both spaces, distance-to-decision-surface spread when a
// model is supplied, and the distance-map concavity table at the data's mean
// ball norm.
void write_analysis(const std::filesystem::path& path, const LabeledEmbeddings& data,
                    const FlatModel* model, std::size_t classes, const BallConfig& ball,
                    std::uint64_t seed, std::size_t pair_cap = 100000);

struct ExperimentReport {
  EvalResult eval;
  double final_loss = 0.0;
  LabelTree tree;  // the tree actually used (shuffled if requested)
};

// Writes into cfg.out_dir: train.hheb, test.hheb, tree.txt, model.ckpt,
// train.json (loss trace + run settings), metrics_child.json,
// metrics_parent.json, analysis.json. Output bytes are a pure function of
// the config — no clocks, no paths, no machine state.
ExperimentReport run_experiment(const RunConfig& cfg);

}  // namespace hyperhier
