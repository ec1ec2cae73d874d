#include "mmassoc/trainer.hpp"

#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <algorithm>

#include "json.hpp"
#include "mmassoc/align.hpp"
#include "mmassoc/ctc.hpp"
#include "mmassoc/fusion.hpp"

namespace mmassoc {
namespace {

double mean_squared_norm(const Matrix& delta) { return delta.squaredNorm() / static_cast<double>(delta.rows()); }

double churn(const Assignment& before, const Assignment& now)
{
  if (before.perm.empty()) return 0.0;
  std::size_t changed = 0;
  for (std::size_t i = 0; i < now.perm.size(); ++i) changed += before.perm[i] != now.perm[i] ? 1 : 0;
  return static_cast<double>(changed) / static_cast<double>(now.perm.size());
}

Assignment bind(const Matrix& z, const ModalityState& m, TrainMode mode)
{
  if (mode == TrainMode::BaselineCtc) return Assignment::identity(m.concepts.concepts());
  return row_column_elimination(concept_evidence(z, m.concepts).z_hat);
}

void update_modality(ModalityState& m, const LstmCache& cache, const Matrix& delta, const TrainConfig& tc)
{
  const LstmParams grad = lstm_backward(m.params, cache, delta);
  apply_momentum_sgd(m.params, grad, m.velocity, tc.learning_rate, tc.momentum);
}

} // namespace

TrainerState init_state(const ExperimentConfig& config)
{
  config.validate();
  const auto& d = config.data;
  TrainerState s;
  Rng rng_v = Rng::derive(config.seed, "init-visual");
  Rng rng_a = Rng::derive(config.seed, "init-audio");
  s.visual.params = init_params(rng_v, d.glyph_height, config.train.hidden_visual, d.vocab_size);
  s.audio.params = init_params(rng_a, d.audio_dim, config.train.hidden_audio, d.vocab_size);
  s.visual.velocity = LstmParams::zeros(d.glyph_height, config.train.hidden_visual, d.vocab_size + 1);
  s.audio.velocity = LstmParams::zeros(d.audio_dim, config.train.hidden_audio, d.vocab_size + 1);
  s.visual.concepts = ConceptVectors::ones(d.vocab_size);
  s.audio.concepts = ConceptVectors::ones(d.vocab_size);
  return s;
}

std::string StepDiagnostics::to_json() const
{
  nlohmann::ordered_json j{{"step", step},
                           {"mode", std::string(mmassoc::to_string(mode))},
                           {"loss_v", loss_visual},
                           {"loss_a", loss_audio},
                           {"assignment_churn_v", churn_visual},
                           {"assignment_churn_a", churn_audio}};
  if (skipped) j["skipped"] = true;
  return j.dump();
}

StepDiagnostics train_step(const MultimodalSample& sample, TrainerState& state, const ExperimentConfig& config)
{
  const TrainMode mode = config.mode;
  StepDiagnostics diag;
  diag.mode = mode;
  diag.step = state.step++;

  // (1) forward
  const LstmOutput out_v = lstm_forward(state.visual.params, sample.visual);
  const LstmOutput out_a = lstm_forward(state.audio.params, sample.audio);

  // (2) binding
  const Assignment perm_v = bind(out_v.z, state.visual, mode);
  const Assignment perm_a = bind(out_a.z, state.audio, mode);
  diag.churn_visual = churn(state.visual.last_assignment, perm_v);
  diag.churn_audio = churn(state.audio.last_assignment, perm_a);
  state.visual.last_assignment = perm_v;
  state.audio.last_assignment = perm_a;

  // (3) CTC targets
  Matrix y_v, y_a;
  try {
    y_v = ctc_target(ctc_lattice(out_v.z, relabel_transcript(sample.transcript_visual, perm_v)), out_v.z);
    y_a = ctc_target(ctc_lattice(out_a.z, relabel_transcript(sample.transcript_audio, perm_a)), out_a.z);
  } catch (const InfeasibleSequence&) {
    ++state.skipped;
    diag.skipped = true;
    return diag;
  }

  // (4)-(5) alignment and per-mode targets
  Matrix delta_v, delta_a;
  if (mode == TrainMode::BaselineCtc) {
    delta_v = ctc_delta(out_v.z, y_v);
    delta_a = ctc_delta(out_a.z, y_a);
  } else {
    const DtwResult aligned = dtw(out_v.z, out_a.z);
    const Matrix y_a_on_v = warp_targets(y_a, aligned.path, out_v.z.rows(), WarpDirection::SecondToFirst);
    const Matrix y_v_on_a = warp_targets(y_v, aligned.path, out_a.z.rows(), WarpDirection::FirstToSecond);
    const FusionMode fm = mode == TrainMode::Original ? FusionMode::Original : FusionMode::Pooled;
    const SharedChannelMask mask_v = shared_channel_mask(perm_v, sample.transcript_visual, sample.transcript_audio);
    const SharedChannelMask mask_a = shared_channel_mask(perm_a, sample.transcript_audio, sample.transcript_visual);
    delta_v = multimodal_delta(out_v.z, y_v, y_a_on_v, mask_v, fm);
    delta_a = multimodal_delta(out_a.z, y_a, y_v_on_a, mask_a, fm);
  }
  diag.loss_visual = mean_squared_norm(delta_v);
  diag.loss_audio = mean_squared_norm(delta_a);

  // (6) weights, then (7) concept vectors from this step's outputs
  update_modality(state.visual, out_v.cache, delta_v, config.train);
  update_modality(state.audio, out_a.cache, delta_a, config.train);
  if (mode != TrainMode::BaselineCtc) {
    update_concept_vectors(state.visual.concepts, out_v.z, perm_v, config.train.concept_learning_rate);
    update_concept_vectors(state.audio.concepts, out_a.z, perm_a, config.train.concept_learning_rate);
  }
  return diag;
}

void train_epochs(const std::vector<MultimodalSample>& samples, TrainerState& state, const ExperimentConfig& config,
                  std::ostream* diagnostics, const EpochHook& on_epoch)
{
  std::vector<std::size_t> order(samples.size());
  for (; state.epoch < config.epochs;) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng::derive(config.seed, "epoch-order", static_cast<std::uint64_t>(state.epoch));
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    for (std::size_t idx : order) {
      const StepDiagnostics d = train_step(samples[idx], state, config);
      if (diagnostics) *diagnostics << d.to_json() << '\n';
    }
    ++state.epoch;
    if (on_epoch) on_epoch(state);
  }
}

EvalAssignments freeze_assignments(const std::vector<MultimodalSample>& calibration, const TrainerState& state,
                                   TrainMode mode)
{
  const Index C = state.visual.concepts.concepts();
  if (mode == TrainMode::BaselineCtc) return {Assignment::identity(C), Assignment::identity(C)};
  if (calibration.empty()) throw InvalidArgument("freeze_assignments: empty calibration batch");
  Matrix ev_v = Matrix::Zero(C, C), ev_a = Matrix::Zero(C, C);
  for (const auto& s : calibration) {
    ev_v += concept_evidence(lstm_forward(state.visual.params, s.visual).z, state.visual.concepts).z_hat;
    ev_a += concept_evidence(lstm_forward(state.audio.params, s.audio).z, state.audio.concepts).z_hat;
  }
  const double inv = 1.0 / static_cast<double>(calibration.size());
  return {row_column_elimination(ev_v * inv), row_column_elimination(ev_a * inv)};
}

EvalReport score_outputs(const std::vector<MultimodalSample>& samples, const std::vector<DecodedPair>& outputs,
                         const EvalAssignments& assignments, const EvalConfig& config, std::uint64_t seed)
{
  if (samples.size() != outputs.size() || samples.empty()) {
    throw InvalidArgument("score_outputs: samples and outputs differ in size");
  }
  const std::size_t n = samples.size();
  const std::size_t per = std::min<std::size_t>(n, static_cast<std::size_t>(config.samples));

  auto score = [&](const std::vector<std::size_t>& idx, double& aacc, double& ler_v, double& ler_a) {
    std::vector<AssociationItem> assoc;
    std::vector<LabelItem> lv, la;
    for (std::size_t i : idx) {
      const auto& s = samples[i];
      const auto& o = outputs[i];
      assoc.push_back({o.audio, o.visual, s.transcript_audio, s.transcript_visual});
      lv.push_back({o.visual, s.transcript_visual});
      la.push_back({o.audio, s.transcript_audio});
    }
    aacc = association_accuracy(assoc);
    ler_v = label_error_rate(lv);
    ler_a = label_error_rate(la);
  };

  EvalReport report;
  report.n_samples = n;
  report.resamples = static_cast<std::size_t>(config.resamples);
  std::vector<double> aacc(report.resamples), ler_v(report.resamples), ler_a(report.resamples);
  for (std::size_t r = 0; r < report.resamples; ++r) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng = Rng::derive(seed, "eval-resample", r);
    for (std::size_t k = 0; k < per; ++k) std::swap(idx[k], idx[k + rng.below(n - k)]);
    idx.resize(per);
    score(idx, aacc[r], ler_v[r], ler_a[r]);
  }
  report.aacc = mean_std(aacc);
  report.ler_visual = mean_std(ler_v);
  report.ler_audio = mean_std(ler_a);
  report.binding_consistency = binding_consistency(assignments.visual, assignments.audio);

  std::map<int, std::vector<std::size_t>> by_missing;
  for (std::size_t i = 0; i < n; ++i) by_missing[samples[i].missing()].push_back(i);
  for (const auto& [missing, idx] : by_missing) {
    BucketReport b;
    b.missing = missing;
    b.n_samples = idx.size();
    score(idx, b.aacc, b.ler_visual, b.ler_audio);
    report.buckets.push_back(b);
  }
  return report;
}

EvalReport evaluate(const std::vector<MultimodalSample>& samples, const std::vector<MultimodalSample>& calibration,
                    const TrainerState& state, const ExperimentConfig& config)
{
  const EvalAssignments assignments = freeze_assignments(calibration, state, config.mode);
  std::vector<DecodedPair> outputs;
  outputs.reserve(samples.size());
  for (const auto& s : samples) {
    const Transcript ch_v = best_path_decode(lstm_forward(state.visual.params, s.visual).z);
    const Transcript ch_a = best_path_decode(lstm_forward(state.audio.params, s.audio).z);
    outputs.push_back({channels_to_concepts(ch_v, assignments.visual), channels_to_concepts(ch_a, assignments.audio)});
  }
  return score_outputs(samples, outputs, assignments, config.eval, config.seed);
}

void dump_dtw(const MultimodalSample& sample, const TrainerState& state, const std::filesystem::path& prefix)
{
  const Matrix z_v = lstm_forward(state.visual.params, sample.visual).z;
  const Matrix z_a = lstm_forward(state.audio.params, sample.audio).z;
  const Matrix dist = row_distances(z_v, z_a);
  const DtwResult r = dtw_from_distances(dist);

  auto write_matrix = [](const std::filesystem::path& p, const Matrix& m) {
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out.precision(17);
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
      out << '\n';
    }
  };
  write_matrix(prefix.string() + "_dist.csv", dist);
  write_matrix(prefix.string() + "_cost.csv", r.cost);
  std::ofstream path_out(prefix.string() + "_path.csv", std::ios::trunc);
  if (!path_out) throw IoError("cannot write " + prefix.string() + "_path.csv");
  path_out << "t_visual,t_audio\n";
  for (const auto& [i, j] : r.path.pairs) path_out << i << ',' << j << '\n';
}

std::string sweep_csv(const std::vector<SweepRow>& rows)
{
  std::ostringstream os;
  os.precision(17);
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.mode) << ',' << to_string(r.scenario) << ',' << r.missing << ',' << r.report.aacc.mean << ','
       << r.report.aacc.std << ',' << r.report.ler_visual.mean << ',' << r.report.ler_audio.mean << '\n';
  }
  return os.str();
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, Scenario scenario, const std::vector<int>& missing_counts,
                                const std::filesystem::path& work_dir)
{
  if (scenario == Scenario::Both) throw ConfigError("scenario: sweeps need visual_full or audio_full");
  std::vector<SweepRow> rows;
  for (int missing : missing_counts) {
    ExperimentConfig cfg = config;
    cfg.data.scenario = scenario;
    cfg.data.fixed_missing = missing;
    cfg.validate();
    const auto data_dir = work_dir / ("data_" + std::string(to_string(scenario)) + "_" + std::to_string(missing));
    build_dataset(cfg.data, data_dir);
    const Dataset ds = load_dataset(data_dir);
    const auto train = ds.load_split(Split::Train);
    const auto test = ds.load_split(Split::Test);
    const std::vector<MultimodalSample> calibration(
        train.begin(), train.begin() + std::min<std::size_t>(train.size(), static_cast<std::size_t>(cfg.eval.calibration)));
    for (TrainMode mode : {TrainMode::Original, TrainMode::Pooled}) {
      cfg.mode = mode;
      TrainerState state = init_state(cfg);
      train_epochs(train, state, cfg, nullptr);
      rows.push_back({mode, scenario, missing, evaluate(test, calibration, state, cfg)});
    }
  }
  return rows;
}

} // namespace mmassoc
