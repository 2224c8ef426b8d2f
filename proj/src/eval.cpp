#include "idionet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace idionet {

double mae(std::span<const PredictionRecord> records) {
  if (records.empty()) throw PreconditionError("MAE of zero predictions is undefined");
  double total = 0.0;
  for (const auto& r : records) total += r.abs_error();
  return total / static_cast<double>(records.size());
}

double kendall_tau(std::span<const RankedPair> pairs) {
  const std::size_t n = pairs.size();
  if (n < 2) throw InsufficientOverlap(fmt::format("ranking needs at least 2 films, got {}", n));

  std::vector<std::size_t> by_actual(n);
  std::iota(by_actual.begin(), by_actual.end(), std::size_t{0});
  std::vector<std::size_t> by_predicted = by_actual;

  const auto order_by = [&](double RankedPair::*field) {
    return [&pairs, field](std::size_t a, std::size_t b) {
      if (pairs[a].*field != pairs[b].*field) return pairs[a].*field > pairs[b].*field;
      return pairs[a].movie < pairs[b].movie;
    };
  };
  std::sort(by_actual.begin(), by_actual.end(), order_by(&RankedPair::actual));
  std::sort(by_predicted.begin(), by_predicted.end(), order_by(&RankedPair::predicted));
  for (std::size_t i = 1; i < n; ++i) {
    if (pairs[by_actual[i]].movie == pairs[by_actual[i - 1]].movie) {
      throw PreconditionError(fmt::format("movie {} appears twice in ranking", pairs[by_actual[i]].movie));
    }
  }

  std::vector<std::size_t> predicted_rank(n);
  for (std::size_t r = 0; r < n; ++r) predicted_rank[by_predicted[r]] = r;

  // rank[i]: predicted rank of the film holding actual rank i.
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[i] = predicted_rank[by_actual[i]];

  std::size_t discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rank[i] > rank[j]) ++discordant;
    }
  }
  const double nd = static_cast<double>(n);
  return 1.0 - 4.0 * static_cast<double>(discordant) / (nd * (nd - 1.0));
}

WilcoxonResult wilcoxon_ranks(std::span<const std::pair<double, double>> paired) {
  if (paired.empty()) throw PreconditionError("Wilcoxon test needs at least one pair");

  std::vector<double> diffs;
  diffs.reserve(paired.size());
  for (const auto& [a, b] : paired) {
    const double d = a - b;
    if (std::abs(d) > kWilcoxonTieTolerance) diffs.push_back(d);
  }
  if (diffs.empty()) throw PreconditionError("all paired differences are zero; no test possible");

  std::sort(diffs.begin(), diffs.end(),
            [](double x, double y) { return std::abs(x) < std::abs(y); });

  WilcoxonResult result;
  result.n_effective = diffs.size();
  std::size_t i = 0;
  while (i < diffs.size()) {
    std::size_t j = i + 1;
    while (j < diffs.size() && std::abs(diffs[j]) - std::abs(diffs[i]) <= kWilcoxonTieTolerance) ++j;
    // positions i..j-1 (1-based ranks i+1..j) share the mid-rank
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      (diffs[k] > 0 ? result.w_plus : result.w_minus) += mid_rank;
    }
    i = j;
  }
  return result;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double wilcoxon_p(std::size_t n_effective, double w) {
  if (n_effective < 6) {
    throw PreconditionError(fmt::format(
        "normal approximation needs at least 6 non-zero differences (got {}); use exact enumeration",
        n_effective));
  }
  const double n = static_cast<double>(n_effective);
  const double mu = n * (n + 1.0) / 4.0;
  const double sigma = std::sqrt(n * (n + 1.0) * (2.0 * n + 1.0) / 24.0);
  const double correction = w < mu ? 0.5 : (w > mu ? -0.5 : 0.0);
  const double z = (w + correction - mu) / sigma;
  return std::min(1.0, 2.0 * normal_cdf(-std::abs(z)));
}

WilcoxonResult wilcoxon_test(std::span<const std::pair<double, double>> paired) {
  WilcoxonResult result = wilcoxon_ranks(paired);
  if (result.n_effective >= 6) result.p_two_sided = wilcoxon_p(result.n_effective, result.w_plus);
  return result;
}

double median(std::vector<double> values) {
  if (values.empty()) throw PreconditionError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

Stat describe(std::span<const double> values) {
  Stat s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

Summary summarize(std::span<const PredictionRecord> records) {
  if (records.empty()) throw PreconditionError("cannot summarise zero records");

  std::vector<double> abs_error, tau, recs, overlap, reviewers, neighbors, mean_corr, inter_corr;
  Summary s;
  s.records = records.size();
  for (const auto& r : records) {
    s.fallbacks += r.fallback ? 1 : 0;
    s.errors += r.error ? 1 : 0;
    abs_error.push_back(r.abs_error());
    if (r.tau) tau.push_back(*r.tau);
    recs.push_back(static_cast<double>(r.n_recommendations));
    overlap.push_back(static_cast<double>(r.overlap_count));
    reviewers.push_back(static_cast<double>(r.reviewers_seen));
    neighbors.push_back(static_cast<double>(r.neighborhood_size));
    mean_corr.push_back(r.characteristics.mean_abs_corr_to_test);
    inter_corr.push_back(r.characteristics.mean_inter_neighbor_abs_corr);
  }
  s.abs_error = describe(abs_error);
  if (!tau.empty()) s.tau = describe(tau);
  s.recommendations = describe(recs);
  s.overlap = describe(overlap);
  s.reviewers = describe(reviewers);
  s.neighbors = describe(neighbors);
  s.mean_corr = describe(mean_corr);
  s.inter_corr = describe(inter_corr);
  return s;
}

}  // namespace idionet
