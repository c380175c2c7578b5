#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rcgan/data_io.hpp"
#include "rcgan/errors.hpp"
#include "rcgan/gan.hpp"
#include "rcgan/grid_io.hpp"
#include "rcgan/scoring.hpp"
#include "rcgan/theory.hpp"

namespace rcgan::cli {

namespace fs = std::filesystem;

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Reads `key = value` lines that apply to `command`: lines before any
// section header, and lines under [command].
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path,
                                                             const std::string& command) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string section;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    if (!section.empty() && section != command) continue;
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (!value.empty()) out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// Splices config-file keys in as flags unless the command line sets them.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.empty() || args[0].rfind("-", 0) == 0) return args;
  std::string config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (config.empty()) return args;
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin() + 1, args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  for (const auto& [key, value] : read_config(config, args[0])) {
    if (key == "config" || given(key)) continue;
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void echo_config(const CLI::App& cmd, const fs::path& dir) {
  std::ofstream out(dir / "config.ini");
  if (!out) throw IoError("cannot write " + (dir / "config.ini").string());
  out << "# " << cmd.get_name() << "\n" << cmd.config_to_str(true, false);
  if (!out) throw IoError("failed writing " + (dir / "config.ini").string());
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v == 0) {
      throw InvalidArgument("hidden layer widths must be positive integers, got '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> column_names(std::size_t dim) {
  if (dim == 2) return {"x", "y"};
  std::vector<std::string> names;
  for (std::size_t d = 1; d <= dim; ++d) names.push_back("x" + std::to_string(d));
  return names;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_heatmaps(const RCGANModel& model, const Grid2D& grid, const std::string& which,
                    const fs::path& dir, std::ostream& out) {
  for (auto kind : {HeatmapKind::dxz, HeatmapKind::dxx}) {
    if (which != "both" && parse_heatmap_kind(which) != kind) continue;
    const auto values = heatmap(model, grid, kind);
    const std::string stem = "heatmap_" + to_string(kind);
    write_grid_csv(dir / (stem + ".csv"), grid, values);
    write_grid_pgm(dir / (stem + ".pgm"), grid, values, 0.0, 1.0);
    out << "wrote " << (dir / (stem + ".csv")).string() << "\n";
  }
}

struct Common {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string config;
};

void add_common(CLI::App& cmd, Common& c) {
  cmd.add_option("--config", c.config, "key = value file; flags on the command line win")
      ->configurable(false);
  cmd.add_option("--seed", c.seed, "root seed; every random stream is derived from it");
  cmd.add_option("--out", c.out_dir, "output directory");
}

struct TheoryArgs {
  std::string q = "gaussian:0,0:0.25,0.25";
  std::string t = "box:2:-3:3";
  std::string grid = "-3,3,64";
};

int cmd_theory(const CLI::App& cmd, const TheoryArgs& a, const Common& c, std::ostream& out) {
  const auto result =
      theory::fig2_demo(parse_dist_spec(a.q), parse_dist_spec(a.t), parse_grid(a.grid));
  const fs::path dir = c.out_dir;
  prepare_out_dir(dir);
  echo_config(cmd, dir);
  write_grid_csv(dir / "q.csv", result.grid, result.q);
  write_grid_csv(dir / "t.csv", result.grid, result.t);
  write_grid_csv(dir / "p.csv", result.grid, result.p);
  write_grid_pgm(dir / "q.pgm", result.grid, result.q);
  write_grid_pgm(dir / "t.pgm", result.grid, result.t);
  write_grid_pgm(dir / "p.pgm", result.grid, result.p);
  write_text(dir / "beta.txt", format_number(result.beta) + "\n");
  out << "beta " << format_number(result.beta) << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string dist = "loop";
  std::size_t n = 1000;
  std::size_t outliers = 0;
  std::string outlier_dist = "box:2:-3:3";
  double margin = 0.5;
  std::string file = "data.csv";
};

int cmd_synth(const CLI::App& cmd, const SynthArgs& a, const Common& c, std::ostream& out) {
  const auto spec = parse_dist_spec(a.dist);
  Rng data_rng = make_rng(c.seed, Stream::data);
  Tensor x = sample(spec, a.n, data_rng);
  std::vector<int> labels(a.n, 0);
  if (a.outliers > 0) {
    Rng anomaly_rng = make_rng(c.seed, Stream::anomalies);
    const Tensor o = sample_outliers(spec, parse_dist_spec(a.outlier_dist), a.outliers, a.margin,
                                     anomaly_rng);
    std::vector<double> values(x.values().begin(), x.values().end());
    values.insert(values.end(), o.values().begin(), o.values().end());
    x = Tensor({a.n + a.outliers, spec.dim}, std::move(values));
    labels.resize(a.n + a.outliers, 1);
  }
  const fs::path dir = c.out_dir;
  prepare_out_dir(dir);
  echo_config(cmd, dir);
  write_numeric_csv(dir / a.file, column_names(spec.dim), x, labels);
  out << "wrote " << x.rows() << " rows to " << (dir / a.file).string() << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string dist;
  std::string data;
  std::string schema;
  double train_fraction = 0.8;
  std::size_t n = 5000;
  std::string mode = "rcgan";
  std::size_t epochs = TrainConfig{}.epochs;
  std::size_t batch = TrainConfig{}.batch_size;
  std::size_t disc_steps = TrainConfig{}.disc_steps;
  double lr = AdamConfig{}.lr;
  double beta1 = AdamConfig{}.beta1;
  std::size_t latent_dim = Architecture{}.latent_dim;
  std::string hidden = "64,64";
  std::string penalty;
  std::string grid = "-3,3,64";
};

int cmd_train(const CLI::App& cmd, const TrainArgs& a, const Common& c, std::ostream& out) {
  if (a.dist.empty() == a.data.empty()) {
    throw InvalidArgument("give exactly one of --dist and --data");
  }
  if (!a.schema.empty() && a.data.empty()) throw InvalidArgument("--schema needs --data");
  const fs::path dir = c.out_dir;

  Tensor train_x;
  std::optional<Split> tabular;
  if (!a.dist.empty()) {
    Rng rng = make_rng(c.seed, Stream::data);
    train_x = sample(parse_dist_spec(a.dist), a.n, rng);
  } else if (!a.schema.empty()) {
    const auto data = load_csv(a.data, read_schema(a.schema));
    tabular = split(data, a.train_fraction, c.seed);
    train_x = tabular->train.features;
  } else {
    const auto table = read_numeric_csv(a.data);
    std::vector<std::size_t> normal;
    for (std::size_t r = 0; r < table.x.rows(); ++r) {
      if (table.labels.empty() || table.labels[r] == 0) normal.push_back(r);
    }
    if (normal.empty()) throw InvalidArgument("training data has no normal rows");
    train_x = gather_rows(table.x, normal);
  }

  const std::size_t dim = train_x.cols();
  Architecture arch;
  arch.latent_dim = a.latent_dim;
  arch.hidden = parse_sizes(a.hidden);
  const DistSpec penalty =
      a.penalty.empty() ? DistSpec::standard_normal(dim) : parse_dist_spec(a.penalty);
  TrainConfig cfg;
  cfg.mode = parse_train_mode(a.mode);
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.disc_steps = a.disc_steps;
  cfg.disc_optimizer.lr = cfg.gen_optimizer.lr = a.lr;
  cfg.disc_optimizer.beta1 = cfg.gen_optimizer.beta1 = a.beta1;
  cfg.seed = c.seed;
  const Grid2D grid = parse_grid(a.grid);

  auto model = RCGANModel::make(dim, arch, penalty, c.seed);
  prepare_out_dir(dir);
  echo_config(cmd, dir);
  const auto report = train(model, train_x, cfg);
  save_model(dir / "model.txt", model);
  report.write_csv(dir / "losses.csv");
  out << "trained " << to_string(cfg.mode) << " for " << cfg.epochs << " epochs on "
      << train_x.rows() << " rows\n";
  if (!report.steps.empty()) {
    const auto& last = report.epoch_means().back();
    out << "final epoch losses: ano " << format_number(last.ano.disc) << " / "
        << format_number(last.ano.gen) << ", cycle " << format_number(last.cycle.disc) << " / "
        << format_number(last.cycle.gen) << "\n";
  }
  if (tabular) {
    write_numeric_csv(dir / "test.csv", tabular->test.schema.feature_names(),
                      tabular->test.features, tabular->test.labels);
    out << "wrote " << tabular->test.rows() << " held-out rows to "
        << (dir / "test.csv").string() << "\n";
  }
  if (dim == 2) write_heatmaps(model, grid, "both", dir, out);
  out << "wrote " << (dir / "model.txt").string() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string score = "dxx";
  double ratio = 0.2;
};

int cmd_eval(const CLI::App& cmd, const EvalArgs& a, const Common& c, std::ostream& out,
             std::ostream& err) {
  const auto model = load_model(a.model);
  const auto table = read_numeric_csv(a.data);
  if (table.labels.empty()) throw InvalidArgument("evaluation data needs a label column");
  ScoreReport report;
  report.kind = parse_score_kind(a.score);
  report.scores = score(model, table.x, report.kind);
  report.labels = table.labels;
  MetricSummary m = metrics_at_ratio(report, a.ratio);
  try {
    m.auroc = auroc(report);
  } catch (const InvalidArgument& e) {
    err << "warning: " << e.what() << "\n";
  }
  const fs::path dir = c.out_dir;
  prepare_out_dir(dir);
  echo_config(cmd, dir);
  report.write_csv(dir / "scores.csv");
  write_metrics_csv(dir / "metrics.csv", m);
  out << "examples " << report.size() << "\n"
      << "anomalies " << std::count(report.labels.begin(), report.labels.end(), 1) << "\n"
      << "predicted " << m.predicted << "\n"
      << "precision " << format_number(m.precision) << "\n"
      << "recall " << format_number(m.recall) << "\n"
      << "f1 " << format_number(m.f1) << "\n"
      << "auroc " << (m.auroc ? format_number(*m.auroc) : std::string("nan")) << "\n";
  return kExitOk;
}

struct HeatmapArgs {
  std::string model;
  std::string grid = "-3,3,64";
  std::string kind = "both";
};

int cmd_heatmap(const CLI::App& cmd, const HeatmapArgs& a, const Common& c, std::ostream& out) {
  const auto model = load_model(a.model);
  const Grid2D grid = parse_grid(a.grid);
  const fs::path dir = c.out_dir;
  prepare_out_dir(dir);
  echo_config(cmd, dir);
  write_heatmaps(model, grid, a.kind, dir, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anomaly detection with a penalised, cycle-consistent adversarial model"};
  app.name("rcgan");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  Common common;
  TheoryArgs theory_args;
  SynthArgs synth_args;
  TrainArgs train_args;
  EvalArgs eval_args;
  HeatmapArgs heatmap_args;

  auto* theory = app.add_subcommand("theory", "optimal generator for discretised q and t");
  add_common(*theory, common);
  theory->add_option("--q", theory_args.q, "normal data distribution");
  theory->add_option("--t", theory_args.t, "penalty distribution");
  theory->add_option("--grid", theory_args.grid, "LO,HI,N or XLO,XHI,YLO,YHI,NX,NY");

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset to CSV");
  add_common(*synth, common);
  synth->add_option("--dist", synth_args.dist, "normal data distribution");
  synth->add_option("--n", synth_args.n, "normal rows");
  synth->add_option("--outliers", synth_args.outliers, "anomalous rows (label 1)");
  synth->add_option("--outlier-dist", synth_args.outlier_dist, "where anomalies are drawn");
  synth->add_option("--margin", synth_args.margin, "minimum anomaly distance from the shape");
  synth->add_option("--file", synth_args.file, "file name inside the output directory");

  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  add_common(*train_cmd, common);
  train_cmd->add_option("--dist", train_args.dist, "synthetic normal distribution");
  train_cmd->add_option("--data", train_args.data, "CSV of training rows");
  train_cmd->add_option("--schema", train_args.schema, "schema file for tabular CSV");
  train_cmd->add_option("--train-fraction", train_args.train_fraction, "tabular training share");
  train_cmd->add_option("--n", train_args.n, "synthetic sample count");
  train_cmd->add_option("--mode", train_args.mode, "rcgan, no-penalty or alice-baseline");
  train_cmd->add_option("--epochs", train_args.epochs);
  train_cmd->add_option("--batch", train_args.batch);
  train_cmd->add_option("--disc-steps", train_args.disc_steps, "discriminator updates per step");
  train_cmd->add_option("--lr", train_args.lr, "Adam learning rate");
  train_cmd->add_option("--beta1", train_args.beta1, "Adam first moment decay");
  train_cmd->add_option("--latent-dim", train_args.latent_dim);
  train_cmd->add_option("--hidden", train_args.hidden, "hidden layer widths");
  train_cmd->add_option("--penalty", train_args.penalty, "penalty distribution (N(0, I) if empty)");
  train_cmd->add_option("--grid", train_args.grid, "heatmap window for 2-D data");

  auto* eval = app.add_subcommand("eval", "score labelled data with a checkpoint");
  add_common(*eval, common);
  eval->add_option("--model", eval_args.model, "checkpoint file")->required();
  eval->add_option("--data", eval_args.data, "CSV with a label column")->required();
  eval->add_option("--score", eval_args.score, "dxx or fm");
  eval->add_option("--ratio", eval_args.ratio, "share of examples flagged anomalous");

  auto* heat = app.add_subcommand("heatmap", "discriminator heatmaps for a 2-D checkpoint");
  add_common(*heat, common);
  heat->add_option("--model", heatmap_args.model, "checkpoint file")->required();
  heat->add_option("--grid", heatmap_args.grid, "LO,HI,N or XLO,XHI,YLO,YHI,NX,NY");
  heat->add_option("--kind", heatmap_args.kind, "dxz, dxx or both");

  try {
    auto expanded = expand_config(args);
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
    if (theory->parsed()) return cmd_theory(*theory, theory_args, common, out);
    if (synth->parsed()) return cmd_synth(*synth, synth_args, common, out);
    if (train_cmd->parsed()) return cmd_train(*train_cmd, train_args, common, out);
    if (eval->parsed()) return cmd_eval(*eval, eval_args, common, out, err);
    return cmd_heatmap(*heat, heatmap_args, common, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "io failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    err << "io failure: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "io failure: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace rcgan::cli
