// mmassoc: dataset generation, training, evaluation and missing-element sweeps.
//
// Exit codes: 0 ok, 2 configuration error, 3 I/O error, 4 checkpoint mismatch.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mmassoc/checkpoint.hpp"
#include "mmassoc/config.hpp"
#include "mmassoc/datagen.hpp"
#include "mmassoc/tensor_io.hpp"
#include "mmassoc/trainer.hpp"

namespace fs = std::filesystem;
using namespace mmassoc;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kCheckpoint = 4 };

std::string read_text(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text)
{
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

void ensure_dir(const fs::path& p)
{
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

std::vector<MultimodalSample> calibration_batch(const Dataset& ds, const ExperimentConfig& cfg)
{
  std::vector<MultimodalSample> out;
  const std::size_t n = std::min<std::size_t>(ds.train.size(), static_cast<std::size_t>(cfg.eval.calibration));
  for (std::size_t i = 0; i < n; ++i) out.push_back(ds.load(ds.train[i]));
  return out;
}

/// "1..5" or "1,2,4".
std::vector<int> parse_missing(const std::string& spec)
{
  std::vector<int> out;
  try {
    if (const auto dots = spec.find(".."); dots != std::string::npos) {
      const int lo = std::stoi(spec.substr(0, dots));
      const int hi = std::stoi(spec.substr(dots + 2));
      if (hi < lo) throw ConfigError("missing: empty range '" + spec + "'");
      for (int k = lo; k <= hi; ++k) out.push_back(k);
    } else {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    }
  } catch (const std::logic_error&) {
    throw ConfigError("missing: cannot parse '" + spec + "'");
  }
  if (out.empty()) throw ConfigError("missing: no values");
  return out;
}

struct GenDataArgs
{
  std::string config, out;
  std::optional<std::uint64_t> seed;
};

int cmd_gen_data(const GenDataArgs& a)
{
  DataConfig cfg = data_config_from_json(read_text(a.config));
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  build_dataset(cfg, a.out);
  std::cout << "wrote " << cfg.n_train << " train / " << cfg.n_test << " test samples to " << a.out << "\n";
  return kOk;
}

struct TrainArgs
{
  std::string config, data, out, resume, mode;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a)
{
  ExperimentConfig cfg = experiment_config_from_json(read_text(a.config));
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.seed) cfg.seed = *a.seed;
  if (!a.mode.empty()) cfg.mode = parse_train_mode(a.mode);

  const Dataset ds = load_dataset(a.data);
  cfg.data = ds.config;
  cfg.validate();

  TrainerState state = init_state(cfg);
  if (!a.resume.empty()) {
    LoadedCheckpoint ck = load_checkpoint(a.resume);
    check_compatible(ck.state, ds.config);
    if (ck.config.mode != cfg.mode || ck.config.seed != cfg.seed ||
        ck.config.train.hidden_visual != cfg.train.hidden_visual ||
        ck.config.train.hidden_audio != cfg.train.hidden_audio) {
      throw CheckpointMismatch("resume checkpoint was trained with a different mode, seed or network size");
    }
    state = std::move(ck.state);
  }

  const fs::path out(a.out);
  ensure_dir(out);
  write_text(out / "config.json", to_json(cfg) + "\n");
  std::ofstream diag(out / "diagnostics.jsonl", a.resume.empty() ? std::ios::trunc : std::ios::app);
  if (!diag) throw IoError("cannot write diagnostics");

  const auto train = ds.load_split(Split::Train);
  train_epochs(train, state, cfg, &diag, [&](const TrainerState& s) {
    diag.flush();
    if (cfg.checkpoint_every > 0 && s.epoch % cfg.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03d", s.epoch);
      save_checkpoint(out / "checkpoints" / name, s, cfg);
    }
    std::cerr << "epoch " << s.epoch << "/" << cfg.epochs << " done (" << s.skipped << " skipped)\n";
  });
  save_checkpoint(out / "final", state, cfg);

  const EvalReport report = evaluate(ds.load_split(Split::Test), calibration_batch(ds, cfg), state, cfg);
  write_text(out / "report.json", report.to_json() + "\n");
  write_text(out / "report_buckets.csv", report.buckets_csv());
  std::cout << report.to_json() << "\n";
  return kOk;
}

struct EvalArgs
{
  std::string checkpoint, data, dump_dtw, out;
  int dump_count = 3;
};

int cmd_eval(const EvalArgs& a)
{
  LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  const Dataset ds = load_dataset(a.data);
  check_compatible(ck.state, ds.config);
  const auto test = ds.load_split(Split::Test);
  const EvalReport report = evaluate(test, calibration_batch(ds, ck.config), ck.state, ck.config);

  if (!a.dump_dtw.empty()) {
    ensure_dir(a.dump_dtw);
    const std::size_t n = std::min<std::size_t>(test.size(), static_cast<std::size_t>(std::max(a.dump_count, 0)));
    for (std::size_t i = 0; i < n; ++i) dump_dtw(test[i], ck.state, fs::path(a.dump_dtw) / ds.test[i].id);
  }
  if (!a.out.empty()) {
    write_text(a.out, report.to_json() + "\n");
    fs::path csv(a.out);
    csv.replace_extension(".csv");
    write_text(csv, report.buckets_csv());
  }
  std::cout << report.to_json() << "\n";
  return kOk;
}

struct SweepArgs
{
  std::string config, missing, scenario, out;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
};

int cmd_sweep(const SweepArgs& a)
{
  ExperimentConfig cfg = experiment_config_from_json(read_text(a.config));
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.seed) {
    cfg.seed = *a.seed;
    cfg.data.seed = *a.seed;
  }
  const Scenario scenario = parse_scenario(a.scenario);
  if (scenario == Scenario::Both) throw ConfigError("scenario: sweeps need visual_full or audio_full");
  const std::vector<int> missing = parse_missing(a.missing);
  for (int k : missing) {
    if (k < 1 || k >= cfg.data.base_len) {
      throw ConfigError("missing: " + std::to_string(k) + " outside 1.." + std::to_string(cfg.data.base_len - 1));
    }
  }
  ensure_dir(a.out);
  const auto rows = run_sweep(cfg, scenario, missing, a.out);
  const std::string csv = sweep_csv(rows);
  write_text(fs::path(a.out) / "curves.csv", csv);
  std::cout << csv;
  return kOk;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Multimodal symbolic association: data generation, training, evaluation and sweeps"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic multimodal dataset");
  gen_cmd->add_option("--config", gen.config, "JSON config (data section or bare data object)")->required();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Dataset seed override");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train both networks and evaluate on the test split");
  train_cmd->add_option("--config", train.config, "Experiment JSON config")->required();
  train_cmd->add_option("--data", train.data, "Dataset directory")->required();
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--epochs", train.epochs, "Epoch count override");
  train_cmd->add_option("--seed", train.seed, "Training seed override");
  train_cmd->add_option("--mode", train.mode, "baseline_ctc | original | pooled");
  train_cmd->add_option("--resume", train.resume, "Checkpoint directory to continue from");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset's test split");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint directory")->required();
  eval_cmd->add_option("--data", eval.data, "Dataset directory")->required();
  eval_cmd->add_option("--dump-dtw", eval.dump_dtw, "Directory for DTW distance/cost/path CSVs");
  eval_cmd->add_option("--dump-count", eval.dump_count, "Number of test samples to dump");
  eval_cmd->add_option("--out", eval.out, "Report JSON path (a .csv bucket table is written next to it)");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Missing-element sweep for the original and pooled modes");
  sweep_cmd->add_option("--config", sweep.config, "Experiment JSON config")->required();
  sweep_cmd->add_option("--missing", sweep.missing, "Missing counts, e.g. 1..5 or 1,3")->required();
  sweep_cmd->add_option("--scenario", sweep.scenario, "visual_full | audio_full")->required();
  sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();
  sweep_cmd->add_option("--epochs", sweep.epochs, "Epoch count override");
  sweep_cmd->add_option("--seed", sweep.seed, "Seed override (training and data)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen);
    if (*train_cmd) return cmd_train(train);
    if (*eval_cmd) return cmd_eval(eval);
    if (*sweep_cmd) return cmd_sweep(sweep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const CheckpointMismatch& e) {
    std::cerr << "checkpoint mismatch: " << e.what() << "\n";
    return kCheckpoint;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const TensorError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
