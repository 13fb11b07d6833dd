#include "hyperhier/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperhier/analysis.hpp"
#include "hyperhier/checkpoint.hpp"
#include "hyperhier/errors.hpp"
#include "hyperhier/pipeline.hpp"

namespace hyperhier {

namespace {

// Exit codes, BSD sysexits where one fits. Every failure path prints a
// one-line message on standard error; machine output goes to the output
// directory (or stdout for `concavity`).
constexpr int kOk = 0;
constexpr int kUsage = 64;        // bad flags, bad values, bad shapes
constexpr int kBadFormat = 65;    // a file parsed but its content is wrong
constexpr int kMissingFile = 66;  // a named input does not exist
constexpr int kInvariant = 70;    // internal bookkeeping failed; report a bug
constexpr int kIo = 74;

// Everything the subcommands can set. One struct so the binding lambdas
// below stay short; each subcommand registers only the groups it uses.
struct CliState {
  RunConfig run;          // synthetic + train + ball + metric knobs
  std::string geometry = "hyperbolic";
  std::string cwece_norm = "samples";
  std::string out = "out";
  std::uint64_t seed = 0;  // one seed drives generation and training
  std::string data_file;
  std::string model_file;
  std::string tree_file;
  std::string config_file;
  std::size_t classes = 0;  // 0: infer from the labels
  std::size_t pair_cap = 100000;
  std::vector<double> norms{0.0, 0.0};
  std::vector<double> grid;
};

void add_out_flags(CLI::App* cmd, CliState& st) {
  cmd->add_option("--out", st.out, "output directory")
      ->envname("HYPERHIER_OUT")
      ->capture_default_str();
}

void add_config_flag(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_file,
                  "flat key=value file; explicit flags and environment win");
}

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// CLI11 only reads config files on the root app and all of this tool's
// flags live on subcommands, so the config file is applied by hand: one
// key=value per line, '#' comments, keys named like the long flags without
// the dashes. A key the command line or environment already set is left
// alone, giving precedence CLI > env > file > defaults.
void apply_config(CLI::App* cmd, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FileMissingError("config file not found: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string at = "config " + path + " line " + std::to_string(lineno);
    const std::string s = trimmed(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw FormatError(at + ": expected key=value");
    const std::string key = trimmed(s.substr(0, eq));
    const std::string value = trimmed(s.substr(eq + 1));
    if (key.empty()) throw FormatError(at + ": empty key");
    CLI::Option* op = cmd->get_option_no_throw("--" + key);
    if (op == nullptr) throw FormatError(at + ": '" + cmd->get_name() + "' has no flag --" + key);
    if (op->count() > 0) continue;
    op->add_result(value);
    op->run_callback();
  }
}

void add_ball_flags(CLI::App* cmd, CliState& st) {
  cmd->add_option("--curvature", st.run.ball.c, "ball curvature magnitude c")
      ->capture_default_str();
  cmd->add_option("--boundary-eps", st.run.ball.boundary_eps,
                  "keep points this far inside the unit sphere")
      ->capture_default_str();
}

void add_synth_flags(CLI::App* cmd, CliState& st) {
  cmd->add_option("--dim", st.run.synthetic.dim, "feature dimension")->capture_default_str();
  cmd->add_option("--classes", st.run.synthetic.classes, "child class count")
      ->capture_default_str();
  cmd->add_option("--radius", st.run.synthetic.radius, "cluster mean sphere radius")
      ->capture_default_str();
  cmd->add_option("--sigma", st.run.synthetic.sigma, "per-class standard deviation")
      ->capture_default_str();
  cmd->add_option("--jitter", st.run.synthetic.mean_jitter, "angular noise on cluster means")
      ->capture_default_str();
  cmd->add_option("--train-per-class", st.run.synthetic.train_per_class,
                  "training samples per class")
      ->capture_default_str();
  cmd->add_option("--test-per-class", st.run.synthetic.test_per_class, "test samples per class")
      ->capture_default_str();
  cmd->add_option("--tree", st.tree_file, "label tree file (default: pair adjacent classes)");
}

void add_train_flags(CLI::App* cmd, CliState& st) {
  cmd->add_option("--geometry", st.geometry, "model space")
      ->check(CLI::IsMember({"euclidean", "hyperbolic"}))
      ->capture_default_str();
  cmd->add_option("--lr-offsets", st.run.train.lr_offsets, "offset step size (manifold step)")
      ->capture_default_str();
  cmd->add_option("--lr-normals", st.run.train.lr_normals, "normal step size")
      ->capture_default_str();
  cmd->add_option("--lr-euclidean", st.run.train.lr_euclidean, "euclidean weight/bias step size")
      ->capture_default_str();
  cmd->add_option("--steps", st.run.train.steps, "minibatch updates")->capture_default_str();
  cmd->add_option("--batch-size", st.run.train.batch_size, "samples per update")
      ->capture_default_str();
}

void add_metric_flags(CLI::App* cmd, CliState& st) {
  cmd->add_option("--bins", st.run.calibration_bins, "calibration bin count")
      ->capture_default_str();
  cmd->add_option("--cwece-norm", st.cwece_norm,
                  "calibration denominator: samples (all evaluated) or trueclass")
      ->check(CLI::IsMember({"samples", "trueclass"}))
      ->capture_default_str();
}

void add_seed_flag(CLI::App* cmd, CliState& st) {
  cmd->add_option("--seed", st.seed, "seed for generation and training")->capture_default_str();
}

Geometry chosen_geometry(const CliState& st) { return parse_geometry(st.geometry); }

CweceNorm chosen_norm(const CliState& st) {
  return st.cwece_norm == "trueclass" ? CweceNorm::true_class : CweceNorm::total_samples;
}

std::size_t infer_classes(const LabeledEmbeddings& data) {
  std::uint32_t top = 0;
  bool any = false;
  for (std::uint32_t label : data.labels) {
    if (label == kIgnoreLabel) continue;
    top = std::max(top, label);
    any = true;
  }
  if (!any) throw std::invalid_argument("cannot infer the class count: no labeled samples");
  return static_cast<std::size_t>(top) + 1;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << doc.dump(2) << '\n';
  if (!os) throw IoError("short write to " + path.string());
}

void make_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

int do_gen(CliState& st, std::ostream& err) {
  SyntheticConfig syn = st.run.synthetic;
  syn.seed = st.seed;
  if (!st.tree_file.empty()) syn.tree = load_tree(st.tree_file);
  const SyntheticData data = generate_synthetic(syn);
  const std::filesystem::path out = st.out;
  make_out_dir(out);
  write_embeddings(out / "train.hheb", data.train);
  write_embeddings(out / "test.hheb", data.test);
  save_tree(out / "tree.txt", data.tree);
  err << "gen: " << data.train.count() << " train / " << data.test.count() << " test samples, "
      << syn.classes << " classes -> " << out.string() << "\n";
  return kOk;
}

void require_flag(const std::string& value, const char* flag) {
  if (value.empty()) throw std::invalid_argument(std::string(flag) + " is required");
}

int do_train(CliState& st, std::ostream& err) {
  require_flag(st.data_file, "--data");
  const LabeledEmbeddings data = read_embeddings(st.data_file);
  const std::size_t classes = st.classes != 0 ? st.classes : infer_classes(data);
  TrainConfig cfg = st.run.train;
  cfg.seed = st.seed;
  const TrainResult trained =
      train_flat(data, classes, chosen_geometry(st), st.run.ball, cfg);
  const std::filesystem::path out = st.out;
  make_out_dir(out);
  save_model(out / "model.ckpt", trained.model);

  nlohmann::ordered_json doc;
  doc["geometry"] = st.geometry;
  doc["classes"] = classes;
  doc["dim"] = data.dim;
  doc["curvature"] = st.run.ball.c;
  doc["boundary_eps"] = st.run.ball.boundary_eps;
  doc["train"] = {{"lr_offsets", cfg.lr_offsets},   {"lr_normals", cfg.lr_normals},
                  {"lr_euclidean", cfg.lr_euclidean}, {"steps", cfg.steps},
                  {"batch_size", cfg.batch_size},   {"seed", cfg.seed}};
  doc["final_loss"] = trained.loss_trace.empty() ? 0.0 : trained.loss_trace.back();
  doc["loss_trace"] = trained.loss_trace;
  write_json_file(out / "train.json", doc);

  err << "train: " << classes << " classes, " << cfg.steps << " steps, final loss "
      << doc["final_loss"].get<double>() << " -> " << (out / "model.ckpt").string() << "\n";
  return kOk;
}

int do_eval(CliState& st, std::ostream& err) {
  require_flag(st.model_file, "--model");
  require_flag(st.data_file, "--data");
  require_flag(st.tree_file, "--tree");
  const FlatModel model = load_model(st.model_file);
  const LabeledEmbeddings data = read_embeddings(st.data_file);
  const LabelTree tree = load_tree(st.tree_file);
  const EvalResult eval =
      evaluate_model(model, data, tree, st.run.calibration_bins, chosen_norm(st));
  const std::filesystem::path out = st.out;
  make_out_dir(out);
  write_level_metrics(out / "metrics_child.json", "child", eval.child, tree.levels[0],
                      eval.evaluated);
  write_level_metrics(out / "metrics_parent.json", "parent", eval.parent, tree.levels[1],
                      eval.evaluated);
  err << "eval: " << eval.evaluated << " samples, child aAcc " << eval.child.aacc
      << ", parent aAcc " << eval.parent.aacc << " -> " << out.string() << "\n";
  return kOk;
}

int do_analyze(CliState& st, std::ostream& err) {
  require_flag(st.data_file, "--data");
  const LabeledEmbeddings data = read_embeddings(st.data_file);
  const std::size_t classes = st.classes != 0 ? st.classes : infer_classes(data);
  FlatModel model;
  const bool with_model = !st.model_file.empty();
  if (with_model) model = load_model(st.model_file);
  const std::filesystem::path out = st.out;
  make_out_dir(out);
  write_analysis(out / "analysis.json", data, with_model ? &model : nullptr, classes,
                 st.run.ball, st.seed, st.pair_cap);
  err << "analyze: " << data.count() << " samples, " << classes << " classes -> "
      << (out / "analysis.json").string() << "\n";
  return kOk;
}

int do_concavity(CliState& st, std::ostream& out) {
  if (st.norms.size() != 2)
    throw std::invalid_argument("--norms wants exactly two comma-separated values");
  std::vector<double> grid = st.grid;
  if (grid.empty())
    for (int i = 0; i <= 12; ++i) grid.push_back(0.25 * i);
  const std::vector<ConcavityRow> rows = concavity_scan(st.norms[0], st.norms[1], grid);
  out << "# euclidean\tball\tslope\tfinite_diff\n";
  char line[160];
  for (const ConcavityRow& r : rows) {
    std::snprintf(line, sizeof line, "%.12g\t%.12g\t%.12g\t%.12g\n", r.euclidean, r.hyperbolic,
                  r.derivative, r.finite_diff);
    out << line;
  }
  return kOk;
}

int do_run(CliState& st, std::ostream& err) {
  RunConfig cfg = st.run;
  cfg.geometry = chosen_geometry(st);
  cfg.cwece_norm = chosen_norm(st);
  cfg.synthetic.seed = st.seed;
  cfg.train.seed = st.seed;
  cfg.out_dir = st.out;
  cfg.tree_path = st.tree_file;
  const ExperimentReport report = run_experiment(cfg);
  err << "run: " << report.eval.evaluated << " test samples, final loss " << report.final_loss
      << "\n"
      << "  child  aAcc " << report.eval.child.aacc << "  mIoU " << report.eval.child.miou
      << "  cwECE " << report.eval.child.cwece << "\n"
      << "  parent aAcc " << report.eval.parent.aacc << "  mIoU " << report.eval.parent.miou
      << "  cwECE " << report.eval.parent.cwece << "\n"
      << "  reports in " << cfg.out_dir.string() << "\n";
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliState st;
  CLI::App app{
      "flat classification in euclidean space and the Poincare ball,\n"
      "with bottom-up parent folding over a stationary label tree"};
  app.name("hyperhier");
  app.require_subcommand(1);

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic labeled dataset");
  add_synth_flags(gen, st);
  add_seed_flag(gen, st);
  add_out_flags(gen, st);
  add_config_flag(gen, st);

  CLI::App* train = app.add_subcommand("train", "train a flat model on an embedding dump");
  train->add_option("--data", st.data_file, "training embeddings (HHEB)");
  train->add_option("--classes", st.classes, "class count (default: infer from labels)");
  add_train_flags(train, st);
  add_ball_flags(train, st);
  add_seed_flag(train, st);
  add_out_flags(train, st);
  add_config_flag(train, st);

  CLI::App* eval = app.add_subcommand("eval", "score a model and fold parents over a tree");
  eval->add_option("--model", st.model_file, "model checkpoint");
  eval->add_option("--data", st.data_file, "test embeddings (HHEB)");
  eval->add_option("--tree", st.tree_file, "label tree file");
  add_metric_flags(eval, st);
  add_out_flags(eval, st);
  add_config_flag(eval, st);

  CLI::App* analyze =
      app.add_subcommand("analyze", "geometry diagnostics for an embedding dump");
  analyze->add_option("--data", st.data_file, "embeddings (HHEB, raw euclidean)");
  analyze->add_option("--model", st.model_file, "optional checkpoint for plane distances");
  analyze->add_option("--classes", st.classes, "class count (default: infer from labels)");
  analyze->add_option("--pair-cap", st.pair_cap, "max distance pairs per class pair")
      ->capture_default_str();
  add_ball_flags(analyze, st);
  add_seed_flag(analyze, st);
  add_out_flags(analyze, st);
  add_config_flag(analyze, st);

  CLI::App* concavity =
      app.add_subcommand("concavity", "tabulate ball distance against euclidean distance");
  concavity->add_option("--norms", st.norms, "the two point norms, comma separated")
      ->delimiter(',')
      ->expected(1, 2)
      ->capture_default_str();
  concavity->add_option("--grid", st.grid, "euclidean distances to tabulate, comma separated")
      ->delimiter(',');
  add_config_flag(concavity, st);

  CLI::App* run = app.add_subcommand("run", "full pipeline: gen, train, eval, analyze");
  add_synth_flags(run, st);
  add_train_flags(run, st);
  add_ball_flags(run, st);
  add_metric_flags(run, st);
  add_seed_flag(run, st);
  run->add_flag("--shuffle-tree", st.run.shuffle_tree,
                "scramble child->parent assignments before evaluating");
  run->add_option("--shuffle-seed", st.run.shuffle_seed, "seed for the scramble")
      ->capture_default_str();
  add_out_flags(run, st);
  add_config_flag(run, st);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    CLI::App* active = gen;
    for (CLI::App* cmd : {train, eval, analyze, concavity, run})
      if (app.got_subcommand(cmd)) active = cmd;
    if (!st.config_file.empty()) apply_config(active, st.config_file);
    if (active == gen) return do_gen(st, err);
    if (active == train) return do_train(st, err);
    if (active == eval) return do_eval(st, err);
    if (active == analyze) return do_analyze(st, err);
    if (active == concavity) return do_concavity(st, out);
    return do_run(st, err);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "hyperhier: " << e.what() << "\n";
    err << "run 'hyperhier --help' for usage\n";
    return kUsage;
  } catch (const FileMissingError& e) {
    err << "hyperhier: " << e.what() << "\n";
    return kMissingFile;
  } catch (const FormatError& e) {
    err << "hyperhier: " << e.what() << "\n";
    return kBadFormat;
  } catch (const IoError& e) {
    err << "hyperhier: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "hyperhier: " << e.what() << "\n";
    return kIo;
  } catch (const InvariantViolation& e) {
    err << "hyperhier: invariant violated: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::invalid_argument& e) {
    err << "hyperhier: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "hyperhier: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "hyperhier: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "hyperhier: unexpected error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hyperhier
