// Command-line front end: simulate, run-sml, grid-search.

#include <cstdio>
#include <functional>
#include <memory>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wsnf/experiment.hpp"
#include "wsnf/report.hpp"
#include "wsnf/stream.hpp"

namespace fs = std::filesystem;
using namespace wsnf;

namespace {

constexpr int kExitIngestion = 2;
constexpr int kExitDiverged = 3;

struct ModelFlags {
  std::string model = "lin";
  std::size_t p = 8, q = 8, h = 8;
  std::optional<double> eta0, gamma, epsilon;
  std::uint64_t seed = 1;
  bool bayes_intercept = false;
  bool bayes_differenced = false;

  void add(CLI::App* app, bool allow_all) {
    app->add_option("--model", model, allow_all ? "lin | mlp | bayes | all" : "lin | mlp | bayes")
        ->check(CLI::IsMember(allow_all ? std::vector<std::string>{"lin", "mlp", "bayes", "all"}
                                        : std::vector<std::string>{"lin", "mlp", "bayes"}));
    app->add_option("--p", p, "input lags")->check(CLI::PositiveNumber);
    app->add_option("--q", q, "forecast horizon")->check(CLI::PositiveNumber);
    app->add_option("--h", h, "hidden units (mlp)")->check(CLI::PositiveNumber);
    app->add_option("--eta0", eta0, "initial learning rate");
    app->add_option("--gamma", gamma, "learning-rate decay exponent");
    app->add_option("--epsilon", epsilon, "weight decay");
    app->add_option("--seed", seed, "seed for weights and synthetic data");
    app->add_flag("--bayes-intercept", bayes_intercept, "add an intercept column to the baseline");
    app->add_flag("--bayes-differenced", bayes_differenced, "fit the baseline on first differences");
  }

  std::vector<ModelKind> kinds() const {
    if (model == "all") return {ModelKind::bayes, ModelKind::lin, ModelKind::mlp};
    return {parse_model_kind(model)};
  }

  RunConfig config(ModelKind kind) const {
    RunConfig cfg;
    cfg.model = kind;
    cfg.p = p;
    cfg.q = q;
    cfg.h = h;
    cfg.seed = seed;
    cfg.schedule = default_schedule(kind);
    if (eta0) cfg.schedule.eta0 = *eta0;
    if (gamma) cfg.schedule.gamma = *gamma;
    if (epsilon) cfg.schedule.epsilon = *epsilon;
    cfg.bayes_intercept = bayes_intercept;
    cfg.bayes_differenced = bayes_differenced;
    return cfg;
  }
};

void print_result(const ExperimentResult& r) {
  std::printf("%-6s events=%zu frames=%llu dropped=%llu resets=%llu train_steps=%llu", r.method.c_str(),
              r.errors.events(), static_cast<unsigned long long>(r.frames),
              static_cast<unsigned long long>(r.dropped_frames), static_cast<unsigned long long>(r.resets),
              static_cast<unsigned long long>(r.train_steps));
  if (r.summary) {
    const auto& s = *r.summary;
    std::printf("  min=%.3f q1=%.3f q2=%.3f mean=%.3f q3=%.3f max=%.3f", s.min, s.q1, s.median, s.mean, s.q3, s.max);
  }
  std::printf("\n");
  if (r.diverged) std::fprintf(stderr, "%s: %s\n", r.method.c_str(), r.error.c_str());
}

// Runs every requested model on a fresh source and writes <out>/<method>/*.csv
// plus a combined <out>/summary.csv.
int run_models(const ModelFlags& mf, const std::function<std::unique_ptr<FrameSource>()>& make_source,
               const std::function<void(RunConfig&)>& tweak, const std::string& out_dir) {
  std::vector<ExperimentResult> results;
  bool diverged = false;
  for (ModelKind kind : mf.kinds()) {
    RunConfig cfg = mf.config(kind);
    tweak(cfg);
    auto source = make_source();
    results.push_back(run_experiment(cfg, *source));
    print_result(results.back());
    diverged = diverged || results.back().diverged;
    if (!out_dir.empty()) {
      const fs::path dir = results.size() == 1 && mf.model != "all" ? fs::path(out_dir) : fs::path(out_dir) / results.back().method;
      write_run_outputs(dir, results.back(), cfg.q, cfg.smoothing_window);
    }
  }
  if (!out_dir.empty() && results.size() > 1) {
    fs::create_directories(out_dir);
    write_summary_csv(fs::path(out_dir) / "summary.csv", results);
  }
  return diverged ? kExitDiverged : 0;
}

std::string read_space_arg(const std::string& arg) {
  if (arg.empty()) return {};
  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) {
    std::ifstream in(arg);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  return arg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"On-line quarter-mean forecasting engine: simulation, dataset replay and grid search"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "synthetic noisy-sinus stream");
  ModelFlags sim_model;
  sim_model.add(sim, true);
  SinusConfig sinus;
  LossModel loss;
  std::optional<double> burst_at;
  std::optional<std::size_t> sim_warmup;
  std::string sim_out;
  sim->add_option("--frames", sinus.n_frames, "number of frames")->check(CLI::PositiveNumber);
  sim->add_option("--period-h", sinus.period_h, "sinus period in hours");
  sim->add_option("--noise", sinus.noise_half_width, "uniform noise half-width, C");
  sim->add_option("--nodes", sinus.nodes, "rotate frames over this many sensor node ids");
  sim->add_option("--drop-prob", loss.drop_prob, "per-frame drop probability")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--burst-gap", loss.burst_quarters, "drop every frame for this many quarters");
  sim->add_option("--burst-at", burst_at, "burst start in seconds (default: middle of the stream)");
  sim->add_option("--warmup", sim_warmup, "events excluded from mae_by_horizon (default 1.5% of frames)");
  sim->add_option("--out", sim_out, "output directory for CSV files");

  // run-sml
  auto* sml = app.add_subcommand("run-sml", "replay an equally spaced temperature dataset (UCI SML2010 layout)");
  ModelFlags sml_model;
  sml_model.add(sml, true);
  std::string data_path, delimiter, sml_out;
  int column = 2;
  std::size_t rows = 2688;
  bool implicit_time = false;
  sml->add_option("--data", data_path, "dataset file")->required();
  sml->add_option("--column", column, "zero-based value column");
  sml->add_option("--delimiter", delimiter, "field delimiter (default: whitespace)");
  sml->add_option("--rows", rows, "rows to use (0 = all)");
  sml->add_flag("--implicit-time", implicit_time, "no date/time columns; rows are 900 s apart");
  sml->add_option("--out", sml_out, "output directory for CSV files");

  // grid-search
  auto* grid = app.add_subcommand("grid-search", "rank learning schedules on a fixed-seed synthetic stream");
  ModelFlags grid_model;
  grid_model.add(grid, false);
  std::string space_arg, grid_out;
  std::uint64_t grid_frames = 100'000;
  grid->add_option("--space", space_arg, "file or inline 'eta0=..;gamma=..;epsilon=..' (JSON also accepted)");
  grid->add_option("--frames", grid_frames, "frames per evaluation")->check(CLI::PositiveNumber);
  grid->add_option("--out", grid_out, "CSV file for the ranking");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      sinus.seed = sim_model.seed;
      loss.seed = sim_model.seed + 1;
      loss.burst_start_s = burst_at.value_or(0.25 * (sinus.dt_min + sinus.dt_max) * static_cast<double>(sinus.n_frames));
      auto make = [&]() -> std::unique_ptr<FrameSource> {
        auto src = std::make_unique<SinusSource>(sinus);
        if (loss.drop_prob > 0.0 || loss.burst_quarters > 0) return std::make_unique<LossInjector>(std::move(src), loss);
        return src;
      };
      const std::size_t warmup = sim_warmup.value_or(static_cast<std::size_t>(0.015 * static_cast<double>(sinus.n_frames)));
      return run_models(sim_model, make, [&](RunConfig& c) { c.warmup_exclude = warmup; }, sim_out);
    }
    if (sml->parsed()) {
      DatasetSpec spec = DatasetSpec::uci_sml2010(data_path);
      spec.value_col = column;
      if (!delimiter.empty()) spec.delimiter = delimiter == "\\t" ? '\t' : delimiter[0];
      if (rows == 0) {
        spec.limit.reset();
        spec.expected_rows.reset();
      } else {
        spec.limit = rows;
        spec.expected_rows = rows;
      }
      if (implicit_time) spec.date_col = spec.time_col = -1;
      const auto frames = read_dataset(spec);
      std::printf("read %zu samples from %s\n", frames.size(), data_path.c_str());
      auto make = [&]() -> std::unique_ptr<FrameSource> { return std::make_unique<VectorSource>(frames); };
      return run_models(sml_model, make, [](RunConfig&) {}, sml_out);
    }
    if (grid->parsed()) {
      const std::string text = read_space_arg(space_arg);
      const GridSpace space = text.empty() ? GridSpace::defaults() : GridSpace::parse(text);
      RunConfig base = grid_model.config(parse_model_kind(grid_model.model));
      SinusConfig gs;
      gs.n_frames = grid_frames;
      gs.seed = grid_model.seed;
      const auto ranked =
          grid_search(space, base, [gs]() -> std::unique_ptr<FrameSource> { return std::make_unique<SinusSource>(gs); });
      std::printf("rank  eta0      gamma  epsilon   mae_star\n");
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& pt = ranked[i];
        std::printf("%4zu  %-8g  %-5g  %-8g  %s\n", i + 1, pt.schedule.eta0, pt.schedule.gamma, pt.schedule.epsilon,
                    pt.diverged ? "diverged" : std::to_string(pt.mae_star).c_str());
      }
      if (!grid_out.empty()) write_grid_csv(grid_out, ranked);
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.code() == Errc::ingestion) return kExitIngestion;
    if (e.code() == Errc::model_diverged) return kExitDiverged;
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
