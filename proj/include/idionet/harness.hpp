#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idionet/ais.hpp"
#include "idionet/dataset.hpp"
#include "idionet/eval.hpp"
#include "idionet/neighborhood.hpp"
#include "idionet/predictor.hpp"
#include "idionet/similarity.hpp"

namespace idionet {

enum class Algorithm { kSp, kAis, kMatchedSp };

std::string_view to_string(Algorithm algo);
std::optional<Algorithm> parse_algorithm(std::string_view text);

struct ExperimentConfig {
  Algorithm algo = Algorithm::kAis;
  SimilarityParams sim;
  AisParams ais;
  PredictionOptions pred_opts;
  std::size_t n_test_users = 100;
  std::size_t max_reviewers = 15000;
  std::size_t sp_k = 100;
  std::uint64_t seed = 1;
  std::size_t repeats = 5;
  std::size_t min_votes = 2;
  /// Worker threads for per-user processing; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
};

/// One test user's reserved-vote case and reviewer stream.
struct Trial {
  TestCase test_case;
  std::vector<const UserProfile*> reviewers;
};

/// Samples the configured test users and prepares each trial: the reserved vote and a
/// seeded shuffle of all other users truncated to max_reviewers. Trials are ordered
/// by test user id; each depends only on (dataset, seed, user id).
std::vector<Trial> prepare_trials(const Dataset& dataset, const ExperimentConfig& cfg);

/// Predicts the reserved vote and gathers recommendation and neighbourhood statistics.
PredictionRecord evaluate_neighborhood(const TestCase& test_case, const Neighborhood& nh,
                                       const PredictionOptions& opts, const SimilarityParams& sim);

/// Reserved-vote evaluation loop. A failing test user yields a fallback record with
/// its error message rather than aborting the run. Records are sorted by test user.
/// When `neighborhoods` is given it receives the selected neighbourhood per record
/// (empty for failed users); entries reference profiles in `dataset`.
std::vector<PredictionRecord> run_experiment(const Dataset& dataset, const ExperimentConfig& cfg,
                                             std::vector<Neighborhood>* neighborhoods = nullptr);

enum class SweepParam { kStimulation, kSuppression };

std::string_view to_string(SweepParam param);
std::optional<SweepParam> parse_sweep_param(std::string_view text);

struct SweepRun {
  double value = 0.0;
  std::size_t repeat = 0;
  Summary summary;
};

/// Across-repeat aggregate of the per-run means for one parameter value.
struct SweepCell {
  double value = 0.0;
  std::size_t runs = 0;
  Stat mae;
  Stat tau;
  Stat recommendations;
  Stat overlap;
  Stat neighbors;
  Stat reviewers;
  Stat mean_corr;
  Stat inter_corr;
};

struct SweepTable {
  SweepParam param = SweepParam::kStimulation;
  std::vector<SweepRun> runs;
  std::vector<SweepCell> cells;
};

/// Seed used for repeat `r` of a sweep; shared across values so that every value
/// sees the same test users within a repeat.
std::uint64_t repeat_seed(std::uint64_t base_seed, std::size_t repeat);

SweepTable sweep(const Dataset& dataset, const ExperimentConfig& base, SweepParam param,
                 std::span<const double> values);

/// The neighbourhood source in the fixed-membership experiment.
enum class Regime { kSp, kAis };

std::string_view to_string(Regime regime);

struct RegimeRecords {
  Regime predictor = Regime::kSp;
  Regime neighborhood = Regime::kSp;
  std::vector<PredictionRecord> records;
};

struct MembershipRow {
  UserId test_user = 0;
  std::size_t sp_size = 0;
  std::size_t ais_size = 0;
  Membership membership;
};

struct RegimeComparison {
  std::string metric;  ///< "abs_error" or "tau"
  Regime pred1 = Regime::kSp;
  Regime nh1 = Regime::kSp;
  Regime pred2 = Regime::kSp;
  Regime nh2 = Regime::kSp;
  std::optional<double> median1;
  std::optional<double> median2;
  std::optional<WilcoxonResult> test;  ///< absent when every difference is zero
};

struct CharacteristicComparison {
  std::string characteristic;
  double mean_sp = 0.0;
  double mean_ais = 0.0;
  std::optional<WilcoxonResult> test;
};

struct SwapResult {
  std::array<RegimeRecords, 4> regimes;
  std::vector<MembershipRow> membership;
  std::vector<RegimeComparison> comparisons;
  std::vector<CharacteristicComparison> characteristics;

  const RegimeRecords& regime(Regime predictor, Regime neighborhood) const;
};

/// Records the SP and AIS neighbourhoods per test user, then evaluates all four
/// (predictor weighting x neighbourhood) regimes with the membership held fixed.
SwapResult swap_experiment(const Dataset& dataset, const ExperimentConfig& cfg);

}  // namespace idionet
