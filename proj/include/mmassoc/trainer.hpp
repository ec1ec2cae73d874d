#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mmassoc/binding.hpp"
#include "mmassoc/config.hpp"
#include "mmassoc/datagen.hpp"
#include "mmassoc/lstm.hpp"
#include "mmassoc/metrics.hpp"

namespace mmassoc {

struct ModalityState
{
  LstmParams params;
  LstmParams velocity;
  ConceptVectors concepts;
  Assignment last_assignment; // empty before the first step
};

struct TrainerState
{
  ModalityState visual;
  ModalityState audio;
  int epoch = 0;          // completed epochs
  std::uint64_t step = 0; // completed train_step calls
  std::uint64_t skipped = 0;
};

/// Fresh networks (independent seed streams per modality), unit concept
/// vectors, zero velocity.
TrainerState init_state(const ExperimentConfig& config);

struct StepDiagnostics
{
  std::uint64_t step = 0;
  TrainMode mode = TrainMode::Pooled;
  double loss_visual = 0.0; // mean over frames of ||delta_t||^2
  double loss_audio = 0.0;
  double churn_visual = 0.0; // fraction of concepts whose channel changed
  double churn_audio = 0.0;
  bool skipped = false;

  std::string to_json() const;
};

/// One online update on both modalities:
///  forward -> binding (evidence, elimination, relabel) -> CTC targets ->
///  DTW + warping -> mode target -> BPTT + momentum SGD -> concept update.
/// baseline_ctc uses identity coding and each modality's own CTC target.
/// Samples whose labeling does not fit the frame count are skipped.
StepDiagnostics train_step(const MultimodalSample& sample, TrainerState& state, const ExperimentConfig& config);

/// Called after every completed epoch with the updated state.
using EpochHook = std::function<void(const TrainerState&)>;

/// Runs epochs state.epoch .. config.epochs-1 over `samples` in a seed-shuffled
/// order per epoch. Each diagnostics record is written as one JSON line.
void train_epochs(const std::vector<MultimodalSample>& samples, TrainerState& state, const ExperimentConfig& config,
                  std::ostream* diagnostics, const EpochHook& on_epoch = {});

struct EvalAssignments
{
  Assignment visual;
  Assignment audio;
};

/// Evaluation-time binding: identity for baseline_ctc, otherwise greedy
/// elimination on evidence averaged over the calibration sequences.
EvalAssignments freeze_assignments(const std::vector<MultimodalSample>& calibration, const TrainerState& state,
                                   TrainMode mode);

/// Decoded outputs of one sample, already mapped to concept ids.
struct DecodedPair
{
  Transcript visual;
  Transcript audio;
};

/// Metric core: R resamples (without replacement) of `samples_per_resample`
/// items, mean/std of AAcc and LER, plus per-missing-count buckets.
EvalReport score_outputs(const std::vector<MultimodalSample>& samples, const std::vector<DecodedPair>& outputs,
                         const EvalAssignments& assignments, const EvalConfig& config, std::uint64_t seed);

/// Decodes every sample with best-path decoding and scores it.
EvalReport evaluate(const std::vector<MultimodalSample>& samples, const std::vector<MultimodalSample>& calibration,
                    const TrainerState& state, const ExperimentConfig& config);

/// CSV dumps of the DTW distance table, accumulated cost and path of one sample.
void dump_dtw(const MultimodalSample& sample, const TrainerState& state, const std::filesystem::path& prefix);

struct SweepRow
{
  TrainMode mode = TrainMode::Pooled;
  Scenario scenario = Scenario::VisualFull;
  int missing = 0;
  EvalReport report;
};

inline constexpr const char* kSweepHeader = "mode,scenario,missing,aacc_mean,aacc_std,ler_v,ler_a";
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// For every missing count: generate a dataset under `work_dir`, train the
/// original and pooled modes from scratch, and evaluate on the test split.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, Scenario scenario, const std::vector<int>& missing_counts,
                                const std::filesystem::path& work_dir);

} // namespace mmassoc
