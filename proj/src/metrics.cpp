#include "mmassoc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace mmassoc {

std::size_t lcs2(std::span<const int> a, std::span<const int> b)
{
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t lcs4(std::span<const int> a, std::span<const int> b, std::span<const int> c, std::span<const int> d)
{
  const std::size_t nb = b.size() + 1, nc = c.size() + 1, nd = d.size() + 1;
  std::vector<std::size_t> table((a.size() + 1) * nb * nc * nd, 0);
  auto at = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) -> std::size_t& {
    return table[((i * nb + j) * nc + k) * nd + l];
  };
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      for (std::size_t k = 1; k <= c.size(); ++k) {
        for (std::size_t l = 1; l <= d.size(); ++l) {
          const int x = a[i - 1];
          if (x == b[j - 1] && x == c[k - 1] && x == d[l - 1]) {
            at(i, j, k, l) = at(i - 1, j - 1, k - 1, l - 1) + 1;
          } else {
            at(i, j, k, l) = std::max({at(i - 1, j, k, l), at(i, j - 1, k, l), at(i, j, k - 1, l), at(i, j, k, l - 1)});
          }
        }
      }
    }
  }
  return at(a.size(), b.size(), c.size(), d.size());
}

std::size_t edit_distance(std::span<const int> a, std::span<const int> b)
{
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double association_accuracy(std::span<const AssociationItem> batch)
{
  std::size_t num = 0, den = 0;
  for (const auto& item : batch) {
    num += lcs4(item.out_audio, item.out_visual, item.gt_audio, item.gt_visual);
    den += lcs2(item.gt_audio, item.gt_visual);
  }
  if (den == 0) throw InvalidArgument("association_accuracy: no shared ground truth");
  return static_cast<double>(num) / static_cast<double>(den);
}

double label_error_rate(std::span<const LabelItem> batch)
{
  if (batch.empty()) throw InvalidArgument("label_error_rate: empty batch");
  double total = 0.0;
  for (const auto& item : batch) {
    if (item.truth.empty()) throw InvalidArgument("label_error_rate: empty ground truth");
    total += static_cast<double>(edit_distance(item.output, item.truth)) / static_cast<double>(item.truth.size());
  }
  return total / static_cast<double>(batch.size());
}

double binding_consistency(const Assignment& visual, const Assignment& audio)
{
  if (visual.size() != audio.size() || visual.size() == 0) {
    throw InvalidArgument("binding_consistency: assignment sizes differ");
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < visual.perm.size(); ++i) same += visual.perm[i] == audio.perm[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(visual.perm.size());
}

MeanStd mean_std(std::span<const double> values)
{
  MeanStd r;
  if (values.empty()) return r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  for (double v : values) r.std += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(r.std / static_cast<double>(values.size()));
  return r;
}

std::string EvalReport::to_json() const
{
  nlohmann::ordered_json j;
  j["aacc"] = aacc.mean;
  j["aacc_std"] = aacc.std;
  j["ler_visual"] = ler_visual.mean;
  j["ler_visual_std"] = ler_visual.std;
  j["ler_audio"] = ler_audio.mean;
  j["ler_audio_std"] = ler_audio.std;
  j["binding_consistency"] = binding_consistency;
  j["n_samples"] = n_samples;
  j["resamples"] = resamples;
  auto& rows = j["buckets"] = nlohmann::ordered_json::array();
  for (const auto& b : buckets) {
    rows.push_back({{"missing", b.missing},
                    {"n_samples", b.n_samples},
                    {"aacc", b.aacc},
                    {"ler_visual", b.ler_visual},
                    {"ler_audio", b.ler_audio}});
  }
  return j.dump(2);
}

std::string EvalReport::buckets_csv() const
{
  std::ostringstream os;
  os.precision(17);
  os << "missing,n_samples,aacc,ler_v,ler_a\n";
  for (const auto& b : buckets) {
    os << b.missing << ',' << b.n_samples << ',' << b.aacc << ',' << b.ler_visual << ',' << b.ler_audio << '\n';
  }
  return os.str();
}

} // namespace mmassoc
