#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmassoc/binding.hpp"
#include "mmassoc/ctc.hpp"

namespace mmassoc {

/// Length of the longest common subsequence of two sequences.
std::size_t lcs2(std::span<const int> a, std::span<const int> b);

/// Length of the longest sequence that is a subsequence of all four inputs.
std::size_t lcs4(std::span<const int> a, std::span<const int> b, std::span<const int> c, std::span<const int> d);

/// Levenshtein distance with unit costs.
std::size_t edit_distance(std::span<const int> a, std::span<const int> b);

struct AssociationItem
{
  Transcript out_audio;
  Transcript out_visual;
  Transcript gt_audio;
  Transcript gt_visual;
};

/// sum lcs4(out_a, out_v, gt_a, gt_v) / sum lcs2(gt_a, gt_v).
double association_accuracy(std::span<const AssociationItem> batch);

struct LabelItem
{
  Transcript output;
  Transcript truth;
};

/// Mean of ED(output, truth) / |truth|; unclipped, so it may exceed 1.
double label_error_rate(std::span<const LabelItem> batch);

/// Fraction of concepts bound to the same channel by both modalities.
double binding_consistency(const Assignment& visual, const Assignment& audio);

struct MeanStd
{
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(std::span<const double> values);

struct BucketReport
{
  int missing = 0;
  std::size_t n_samples = 0;
  double aacc = 0.0;
  double ler_visual = 0.0;
  double ler_audio = 0.0;
};

struct EvalReport
{
  MeanStd aacc;
  MeanStd ler_visual;
  MeanStd ler_audio;
  double binding_consistency = 0.0;
  std::size_t n_samples = 0;
  std::size_t resamples = 0;
  std::vector<BucketReport> buckets; // keyed by total missing elements

  std::string to_json() const;
  /// Header plus one row per missing-count bucket.
  std::string buckets_csv() const;
};

} // namespace mmassoc
