#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "idionet/dataset.hpp"
#include "idionet/error.hpp"
#include "idionet/neighborhood.hpp"

namespace idionet {

/// One reserved-vote trial.
struct PredictionRecord {
  UserId test_user = 0;
  MovieId movie = 0;
  double actual = 0.0;
  double predicted = 0.0;
  bool fallback = false;
  std::size_t neighborhood_size = 0;
  std::size_t reviewers_seen = 0;
  std::size_t n_recommendations = 0;
  std::size_t overlap_count = 0;
  std::optional<double> tau;  ///< absent when the overlap has fewer than two films
  Characteristics characteristics;
  /// Set when a module error degraded this trial to a fallback prediction.
  std::optional<std::string> error;

  double abs_error() const noexcept { return actual > predicted ? actual - predicted : predicted - actual; }
};

/// Mean absolute error over all records, fallbacks included. Throws on empty input.
double mae(std::span<const PredictionRecord> records);

struct RankedPair {
  MovieId movie = 0;
  double actual = 0.0;
  double predicted = 0.0;
};

/// Signals that fewer than two overlapping films were available for ranking.
class InsufficientOverlap : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Both lists are ranked by descending vote with ascending movie id breaking ties;
/// tau = 1 - 4 N_D / (n (n - 1)) with N_D the discordant pairs.
double kendall_tau(std::span<const RankedPair> pairs);

struct WilcoxonResult {
  std::size_t n_effective = 0;  ///< pairs with a non-zero difference
  double w_plus = 0.0;          ///< rank sum where a > b
  double w_minus = 0.0;         ///< rank sum where a < b
  std::optional<double> p_two_sided;
};

/// Differences within this distance of zero are dropped; |d| values this close share a mid-rank.
inline constexpr double kWilcoxonTieTolerance = 1e-12;

/// Signed-rank sums for paired samples (d = a - b); zero differences are dropped and
/// tied |d| receive mid-ranks. Throws PreconditionError if every difference is zero.
WilcoxonResult wilcoxon_ranks(std::span<const std::pair<double, double>> paired);

/// Two-sided p-value from the normal approximation with continuity correction.
/// Requires n_effective >= 6.
double wilcoxon_p(std::size_t n_effective, double w);

/// wilcoxon_ranks plus p when n_effective >= 6.
WilcoxonResult wilcoxon_test(std::span<const std::pair<double, double>> paired);

/// Standard normal CDF, accurate far into the tails.
double normal_cdf(double z);

double median(std::vector<double> values);

struct Stat {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};

Stat describe(std::span<const double> values);

struct Summary {
  std::size_t records = 0;
  std::size_t fallbacks = 0;
  std::size_t errors = 0;
  Stat abs_error;  ///< its mean is the MAE
  std::optional<Stat> tau;
  Stat recommendations;
  Stat overlap;
  Stat reviewers;
  Stat neighbors;
  Stat mean_corr;
  Stat inter_corr;

  double mae() const noexcept { return abs_error.mean; }
};

/// Throws PreconditionError on empty input.
Summary summarize(std::span<const PredictionRecord> records);

}  // namespace idionet
