#include "hyperhier/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hyperhier/analysis.hpp"
#include "hyperhier/checkpoint.hpp"
#include "hyperhier/errors.hpp"

namespace hyperhier {

namespace {

using ordered_json = nlohmann::ordered_json;

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << doc.dump(2) << '\n';
  if (!os) throw IoError("short write to " + path.string());
}

// cv entries averaged over every compared, non-degenerate pair slot
struct CvSummary {
  ordered_json table = ordered_json::array();
  double mean = 0.0;
  std::size_t counted = 0;
  std::size_t degenerate = 0;
};

CvSummary summarize_cv(const std::vector<std::vector<CvStat>>& per_anchor) {
  CvSummary out;
  double sum = 0.0;
  for (const auto& row : per_anchor) {
    ordered_json jrow = ordered_json::array();
    for (const CvStat& s : row) {
      jrow.push_back(s.cv);
      if (s.pairs == 0) continue;  // the anchor's own slot
      if (s.degenerate) {
        ++out.degenerate;
        continue;
      }
      sum += s.cv;
      ++out.counted;
    }
    out.table.push_back(std::move(jrow));
  }
  if (out.counted > 0) out.mean = sum / static_cast<double>(out.counted);
  return out;
}

ordered_json cv_json(const CvSummary& s) {
  ordered_json doc;
  doc["mean"] = s.mean;
  doc["compared"] = s.counted;
  doc["degenerate"] = s.degenerate;
  doc["table"] = s.table;
  return doc;
}

LevelMetrics level_metrics(const ConfusionMatrix& cm, const CalibrationBins& cb, CweceNorm norm) {
  LevelMetrics m;
  m.miou = miou(cm);
  m.macc = macc(cm);
  m.aacc = aacc(cm);
  m.cwece = cwece(cb, norm);
  m.class_iou = per_class_iou(cm);
  return m;
}

}  // namespace

void write_level_metrics(const std::filesystem::path& path, const char* level,
                         const LevelMetrics& m, const std::vector<std::string>& names,
                         std::uint64_t evaluated) {
  ordered_json doc;
  doc["level"] = level;
  doc["classes"] = names.size();
  doc["evaluated"] = evaluated;
  doc["miou"] = m.miou;
  doc["macc"] = m.macc;
  doc["aacc"] = m.aacc;
  doc["cwece"] = m.cwece;
  doc["class_names"] = names;
  doc["class_iou"] = m.class_iou;
  write_json(path, doc);
}

void RunConfig::validate() const {
  synthetic.validate();
  train.validate();
  ball.validate();
  if (calibration_bins == 0) throw std::invalid_argument("calibration_bins must be positive");
  if (out_dir.empty()) throw std::invalid_argument("out_dir must be set");
}

EvalResult evaluate_model(const FlatModel& model, const LabeledEmbeddings& test,
                          const LabelTree& tree, std::size_t bins, CweceNorm norm) {
  model.validate();
  test.validate();
  if (auto why = validate_tree(tree)) throw std::invalid_argument("evaluate_model: " + *why);
  if (tree.depth() < 2) throw std::invalid_argument("evaluate_model: tree has no parent level");
  if (tree.size(0) != model.classes())
    throw std::invalid_argument("evaluate_model: tree leaves do not match model classes");
  if (test.dim != model.dim())
    throw std::invalid_argument("evaluate_model: data dimension does not match model");
  if (test.geometry != Geometry::euclidean)
    throw std::invalid_argument(
        "evaluate_model: expects raw euclidean features; the model lifts them itself");
  if (bins == 0) throw std::invalid_argument("evaluate_model: bins must be positive");

  const std::size_t K = model.classes();
  const std::size_t P = tree.size(1);
  const std::size_t n = test.count();

  PredictionBatch child;
  child.classes = K;
  child.posteriors = posterior_batch(model, test);
  child.labels = test.labels;
  child.validate();

  std::uint64_t evaluated = 0;
  for (std::uint32_t label : test.labels)
    if (label != kIgnoreLabel) ++evaluated;

  ConfusionMatrix child_cm(K);
  CalibrationBins child_cb(K, bins);
  accumulate_parallel(child, child_cm, child_cb);
  if (child_cm.total() != evaluated)
    throw InvariantViolation("evaluate_model: child confusion matrix dropped samples");

  // Fold each posterior row one level up. Folding only regroups terms, so
  // the row total must survive to rounding.
  PredictionBatch parent;
  parent.classes = P;
  parent.posteriors.resize(n * P);
  parent.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = child.row(i);
    const std::vector<double> folded = parent_posterior(row, tree);
    double child_sum = 0.0;
    for (double p : row) child_sum += p;
    double parent_sum = 0.0;
    for (double p : folded) parent_sum += p;
    if (std::abs(parent_sum - child_sum) > 1e-12)
      throw InvariantViolation("evaluate_model: folding changed row " + std::to_string(i) +
                               " mass by " + std::to_string(parent_sum - child_sum));
    for (std::size_t p = 0; p < P; ++p) parent.posteriors[i * P + p] = folded[p];
    const std::uint32_t label = test.labels[i];
    parent.labels[i] =
        label == kIgnoreLabel
            ? kIgnoreLabel
            : static_cast<std::uint32_t>(ancestor_label(label, 1, tree));
  }
  parent.validate();

  ConfusionMatrix parent_cm(P);
  CalibrationBins parent_cb(P, bins);
  accumulate_parallel(parent, parent_cm, parent_cb);
  if (parent_cm.total() != evaluated)
    throw InvariantViolation("evaluate_model: parent confusion matrix dropped samples");

  EvalResult out;
  out.child = level_metrics(child_cm, child_cb, norm);
  out.parent = level_metrics(parent_cm, parent_cb, norm);
  out.evaluated = evaluated;
  return out;
}

void write_analysis(const std::filesystem::path& path, const LabeledEmbeddings& data,
                    const FlatModel* model, std::size_t classes, const BallConfig& ball,
                    std::uint64_t seed, std::size_t pair_cap) {
  data.validate();
  if (data.geometry != Geometry::euclidean)
    throw std::invalid_argument("write_analysis: expects raw euclidean features");
  if (classes < 2) throw std::invalid_argument("write_analysis: need at least two classes");
  if (model != nullptr) {
    model->validate();
    if (model->classes() != classes || model->dim() != data.dim)
      throw std::invalid_argument("write_analysis: model shape does not match data");
  }

  const LabeledEmbeddings mapped = map_to_ball(data, ball);
  const NormStats raw_norms = class_norm_stats(data, classes);
  const NormStats ball_norms = class_norm_stats(mapped, classes);

  CvOptions cv_opts;
  cv_opts.pair_cap = pair_cap;
  cv_opts.seed = seed;
  cv_opts.ball = ball;
  std::vector<std::vector<CvStat>> euclid_rows(classes), ball_rows(classes), plane_rows;
  for (std::size_t a = 0; a < classes; ++a) {
    euclid_rows[a] = interclass_distance_cv(data, a, classes, cv_opts);
    ball_rows[a] = interclass_distance_cv(mapped, a, classes, cv_opts);
  }
  if (model != nullptr) {
    const LabeledEmbeddings& plane_space =
        model->geometry == Geometry::hyperbolic ? mapped : data;
    plane_rows.resize(classes);
    for (std::size_t a = 0; a < classes; ++a)
      plane_rows[a] = plane_distance_cv(plane_space, *model, a);
  }
  const CvSummary euclid_cv = summarize_cv(euclid_rows);
  const CvSummary ball_cv = summarize_cv(ball_rows);

  // Concavity table at the data's own scale: norms enter the unit-ball
  // formula, so fold the curvature in before averaging.
  const double rc = std::sqrt(ball.c);
  double norm_sum = 0.0;
  for (double m : ball_norms.mean) norm_sum += m * rc;
  const double unit_norm = norm_sum / static_cast<double>(classes);
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(0.25 * i);
  const std::vector<ConcavityRow> scan = concavity_scan(unit_norm, unit_norm, grid);

  ordered_json doc;
  doc["classes"] = classes;
  doc["norms"] = {{"euclidean", {{"mean", raw_norms.mean}, {"stddev", raw_norms.stddev}}},
                  {"ball", {{"mean", ball_norms.mean}, {"stddev", ball_norms.stddev}}}};
  doc["interclass_cv"] = {{"euclidean", cv_json(euclid_cv)}, {"ball", cv_json(ball_cv)}};
  if (model != nullptr) doc["plane_cv"] = cv_json(summarize_cv(plane_rows));
  ordered_json rows = ordered_json::array();
  for (const ConcavityRow& r : scan)
    rows.push_back({{"euclidean", r.euclidean},
                    {"ball", r.hyperbolic},
                    {"slope", r.derivative},
                    {"finite_diff", r.finite_diff}});
  doc["concavity"] = {{"norm", unit_norm}, {"rows", rows}};
  write_json(path, doc);
}

ExperimentReport run_experiment(const RunConfig& cfg) {
  cfg.validate();

  SyntheticConfig syn = cfg.synthetic;
  if (!cfg.tree_path.empty()) syn.tree = load_tree(cfg.tree_path);
  const SyntheticData data = generate_synthetic(syn);
  const LabelTree tree =
      cfg.shuffle_tree ? shuffle_hierarchy(data.tree, cfg.shuffle_seed) : data.tree;

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.out_dir.string() + ": " + ec.message());

  write_embeddings(cfg.out_dir / "train.hheb", data.train);
  write_embeddings(cfg.out_dir / "test.hheb", data.test);
  save_tree(cfg.out_dir / "tree.txt", tree);

  const TrainResult trained =
      train_flat(data.train, syn.classes, cfg.geometry, cfg.ball, cfg.train);
  save_model(cfg.out_dir / "model.ckpt", trained.model);

  const EvalResult eval =
      evaluate_model(trained.model, data.test, tree, cfg.calibration_bins, cfg.cwece_norm);
  write_level_metrics(cfg.out_dir / "metrics_child.json", "child", eval.child, tree.levels[0],
                      eval.evaluated);
  write_level_metrics(cfg.out_dir / "metrics_parent.json", "parent", eval.parent, tree.levels[1],
                      eval.evaluated);

  {
    ordered_json doc;
    doc["geometry"] = geometry_name(cfg.geometry);
    doc["classes"] = syn.classes;
    doc["dim"] = syn.dim;
    doc["curvature"] = cfg.ball.c;
    doc["boundary_eps"] = cfg.ball.boundary_eps;
    doc["synthetic"] = {{"radius", syn.radius},
                        {"sigma", syn.sigma},
                        {"mean_jitter", syn.mean_jitter},
                        {"train_per_class", syn.train_per_class},
                        {"test_per_class", syn.test_per_class},
                        {"seed", syn.seed}};
    doc["train"] = {{"lr_offsets", cfg.train.lr_offsets},
                    {"lr_normals", cfg.train.lr_normals},
                    {"lr_euclidean", cfg.train.lr_euclidean},
                    {"steps", cfg.train.steps},
                    {"batch_size", cfg.train.batch_size},
                    {"seed", cfg.train.seed}};
    doc["shuffled_tree"] = cfg.shuffle_tree;
    if (cfg.shuffle_tree) doc["shuffle_seed"] = cfg.shuffle_seed;
    doc["final_loss"] = trained.loss_trace.empty() ? 0.0 : trained.loss_trace.back();
    doc["loss_trace"] = trained.loss_trace;
    write_json(cfg.out_dir / "train.json", doc);
  }

  write_analysis(cfg.out_dir / "analysis.json", data.test, &trained.model, syn.classes, cfg.ball,
                 syn.seed);

  ExperimentReport report;
  report.eval = eval;
  report.final_loss = trained.loss_trace.empty() ? 0.0 : trained.loss_trace.back();
  report.tree = tree;
  return report;
}

}  // namespace hyperhier
