#include "idionet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>

#include <fmt/format.h>

#include "idionet/error.hpp"

namespace idionet {

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::kSp:
      return "sp";
    case Algorithm::kAis:
      return "ais";
    case Algorithm::kMatchedSp:
      return "matched-sp";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  if (text == "sp") return Algorithm::kSp;
  if (text == "ais") return Algorithm::kAis;
  if (text == "matched-sp") return Algorithm::kMatchedSp;
  return std::nullopt;
}

std::string_view to_string(SweepParam param) {
  return param == SweepParam::kStimulation ? "stim" : "supp";
}

std::optional<SweepParam> parse_sweep_param(std::string_view text) {
  if (text == "stim" || text == "stimulation") return SweepParam::kStimulation;
  if (text == "supp" || text == "suppression") return SweepParam::kSuppression;
  return std::nullopt;
}

std::string_view to_string(Regime regime) { return regime == Regime::kSp ? "SP" : "AIS"; }

void ExperimentConfig::validate() const {
  if (repeats < 1) throw PreconditionError("repeats must be >= 1");
  if (n_test_users < 1) throw PreconditionError("test user count must be >= 1");
  if (sp_k < 1) throw PreconditionError("SP neighbourhood size must be >= 1");
  if (max_reviewers < 1) throw PreconditionError("reviewer limit must be >= 1");
  if (min_votes < 2) throw PreconditionError("test users need at least 2 votes");
  if (!(pred_opts.weight_sum_epsilon > 0.0)) throw PreconditionError("weight-sum epsilon must be positive");
  sim.validate();
  ais.validate();
}

namespace {

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

// Runs fn(i) for i in [0, jobs). Each index writes only its own output slot, so the
// result does not depend on scheduling.
void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = worker_count(threads, jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

PredictionRecord failed_record(const TestCase& tc, std::size_t reviewers_seen, const std::string& message) {
  PredictionRecord rec;
  rec.test_user = tc.original_user_id;
  rec.movie = tc.reserved.movie;
  rec.actual = tc.reserved.score.value();
  rec.predicted = mean_vote(tc.training_user);
  rec.fallback = true;
  rec.reviewers_seen = reviewers_seen;
  rec.error = message;
  return rec;
}

Neighborhood select(const Trial& trial, const ExperimentConfig& cfg) {
  const auto& tc = trial.test_case;
  const ReviewerStream stream(trial.reviewers);
  switch (cfg.algo) {
    case Algorithm::kSp:
      return select_sp(stream, tc.training_user, cfg.sp_k, tc.reserved.movie, cfg.sim);
    case Algorithm::kAis:
      return select_ais(stream, tc.training_user, cfg.ais, cfg.sim);
    case Algorithm::kMatchedSp: {
      const Neighborhood ais = select_ais(stream, tc.training_user, cfg.ais, cfg.sim);
      if (ais.empty()) return Neighborhood{tc.training_user, {}, NeighborhoodMethod::kSp, ais.reviewers_seen};
      Neighborhood sp = select_sp(stream.first(ais.reviewers_seen), tc.training_user, ais.size(),
                                  tc.reserved.movie, cfg.sim);
      sp.reviewers_seen = ais.reviewers_seen;
      return sp;
    }
  }
  throw PreconditionError("unknown algorithm");
}

}  // namespace

std::vector<Trial> prepare_trials(const Dataset& dataset, const ExperimentConfig& cfg) {
  cfg.validate();
  Rng sampler(derive_seed(cfg.seed, 0));
  auto users = sample_test_users(dataset, cfg.n_test_users, cfg.min_votes, sampler);
  std::sort(users.begin(), users.end(),
            [](const UserProfile* a, const UserProfile* b) { return a->id() < b->id(); });

  const auto all = dataset.users();
  std::vector<Trial> trials;
  trials.reserve(users.size());
  for (const UserProfile* user : users) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(user->id()) + 1));
    Trial trial{reserve_vote(*user, rng), {}};
    trial.reviewers.reserve(all.size() - 1);
    for (const auto& other : all) {
      if (other.id() != user->id()) trial.reviewers.push_back(&other);
    }
    const std::size_t keep = std::min(cfg.max_reviewers, trial.reviewers.size());
    partial_shuffle(std::span(trial.reviewers), keep, rng);
    trial.reviewers.resize(keep);
    trials.push_back(std::move(trial));
  }
  return trials;
}

PredictionRecord evaluate_neighborhood(const TestCase& test_case, const Neighborhood& nh,
                                       const PredictionOptions& opts, const SimilarityParams& sim) {
  const UserProfile& user = test_case.training_user;
  PredictionRecord rec;
  rec.test_user = test_case.original_user_id;
  rec.movie = test_case.reserved.movie;
  rec.actual = test_case.reserved.score.value();

  const Prediction p = predict(user, nh, test_case.reserved.movie, opts);
  rec.predicted = p.value;
  rec.fallback = p.fallback;
  rec.neighborhood_size = nh.size();
  rec.reviewers_seen = nh.reviewers_seen;

  const auto recs = recommend(user, nh, opts);
  rec.n_recommendations = recs.size();
  std::vector<RankedPair> seen;
  for (const auto& r : recs) {
    if (const auto actual = user.find(r.movie)) seen.push_back({r.movie, actual->value(), r.predicted_score});
  }
  rec.overlap_count = seen.size();
  if (seen.size() >= 2) rec.tau = kendall_tau(seen);
  rec.characteristics = characteristics(nh, test_case, sim);
  return rec;
}

std::vector<PredictionRecord> run_experiment(const Dataset& dataset, const ExperimentConfig& cfg,
                                             std::vector<Neighborhood>* neighborhoods) {
  const auto trials = prepare_trials(dataset, cfg);
  std::vector<PredictionRecord> records(trials.size());
  if (neighborhoods) neighborhoods->assign(trials.size(), Neighborhood{});
  parallel_for(trials.size(), cfg.threads, [&](std::size_t i) {
    const Trial& trial = trials[i];
    try {
      Neighborhood nh = select(trial, cfg);
      records[i] = evaluate_neighborhood(trial.test_case, nh, cfg.pred_opts, cfg.sim);
      if (neighborhoods) (*neighborhoods)[i] = std::move(nh);
    } catch (const std::exception& e) {
      records[i] = failed_record(trial.test_case, 0, e.what());
    }
  });
  return records;
}

std::uint64_t repeat_seed(std::uint64_t base_seed, std::size_t repeat) {
  return derive_seed(base_seed, 0x5eed0000ULL + repeat);
}

SweepTable sweep(const Dataset& dataset, const ExperimentConfig& base, SweepParam param,
                 std::span<const double> values) {
  if (values.empty()) throw PreconditionError("sweep needs at least one value");
  base.validate();

  SweepTable table;
  table.param = param;
  for (double value : values) {
    ExperimentConfig cfg = base;
    (param == SweepParam::kStimulation ? cfg.ais.stimulation : cfg.ais.suppression) = value;

    std::vector<double> mae_v, tau_v, recs_v, overlap_v, nb_v, rev_v, corr_v, inter_v;
    for (std::size_t r = 0; r < base.repeats; ++r) {
      cfg.seed = repeat_seed(base.seed, r);
      const auto records = run_experiment(dataset, cfg);
      const Summary s = summarize(records);
      table.runs.push_back({value, r, s});
      mae_v.push_back(s.mae());
      if (s.tau) tau_v.push_back(s.tau->mean);
      recs_v.push_back(s.recommendations.mean);
      overlap_v.push_back(s.overlap.mean);
      nb_v.push_back(s.neighbors.mean);
      rev_v.push_back(s.reviewers.mean);
      corr_v.push_back(s.mean_corr.mean);
      inter_v.push_back(s.inter_corr.mean);
    }
    table.cells.push_back({value, base.repeats, describe(mae_v), describe(tau_v), describe(recs_v),
                           describe(overlap_v), describe(nb_v), describe(rev_v), describe(corr_v),
                           describe(inter_v)});
  }
  return table;
}

const RegimeRecords& SwapResult::regime(Regime predictor, Regime neighborhood) const {
  for (const auto& r : regimes) {
    if (r.predictor == predictor && r.neighborhood == neighborhood) return r;
  }
  throw PreconditionError("unknown regime");
}

namespace {

constexpr std::array<std::pair<Regime, Regime>, 4> kRegimes = {{
    {Regime::kSp, Regime::kSp},
    {Regime::kAis, Regime::kSp},
    {Regime::kSp, Regime::kAis},
    {Regime::kAis, Regime::kAis},
}};

template <typename Metric>
std::optional<WilcoxonResult> paired_test(const std::vector<PredictionRecord>& a,
                                          const std::vector<PredictionRecord>& b, Metric metric,
                                          std::vector<double>* first, std::vector<double>* second) {
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::optional<double> x = metric(a[i]);
    const std::optional<double> y = metric(b[i]);
    if (!x || !y) continue;
    pairs.emplace_back(*x, *y);
    first->push_back(*x);
    second->push_back(*y);
  }
  if (pairs.empty()) return std::nullopt;
  try {
    return wilcoxon_test(pairs);
  } catch (const PreconditionError&) {
    return std::nullopt;  // every difference was zero
  }
}

}  // namespace

SwapResult swap_experiment(const Dataset& dataset, const ExperimentConfig& cfg) {
  const auto trials = prepare_trials(dataset, cfg);
  const std::size_t n = trials.size();

  SwapResult result;
  for (std::size_t r = 0; r < kRegimes.size(); ++r) {
    result.regimes[r].predictor = kRegimes[r].first;
    result.regimes[r].neighborhood = kRegimes[r].second;
    result.regimes[r].records.resize(n);
  }
  result.membership.resize(n);
  std::vector<Characteristics> sp_chars(n), ais_chars(n);

  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const Trial& trial = trials[i];
    const TestCase& tc = trial.test_case;
    const ReviewerStream stream(trial.reviewers);

    std::array<std::optional<Neighborhood>, 2> source;  // indexed by Regime
    std::array<std::string, 2> source_error;
    try {
      source[0] = select_sp(stream, tc.training_user, cfg.sp_k, tc.reserved.movie, cfg.sim);
    } catch (const std::exception& e) {
      source_error[0] = e.what();
    }
    try {
      source[1] = select_ais(stream, tc.training_user, cfg.ais, cfg.sim);
    } catch (const std::exception& e) {
      source_error[1] = e.what();
    }

    auto& row = result.membership[i];
    row.test_user = tc.original_user_id;
    if (source[0]) {
      row.sp_size = source[0]->size();
      sp_chars[i] = characteristics(*source[0], tc, cfg.sim);
    }
    if (source[1]) {
      row.ais_size = source[1]->size();
      ais_chars[i] = characteristics(*source[1], tc, cfg.sim);
    }
    if (source[0] && source[1]) row.membership = compare_membership(*source[0], *source[1]);

    for (std::size_t r = 0; r < kRegimes.size(); ++r) {
      const auto [predictor, nh_kind] = kRegimes[r];
      const auto& src = source[static_cast<std::size_t>(nh_kind)];
      auto& out = result.regimes[r].records[i];
      if (!src) {
        out = failed_record(tc, 0, source_error[static_cast<std::size_t>(nh_kind)]);
        continue;
      }
      try {
        Neighborhood fixed{tc.training_user, {}, predictor == Regime::kSp
                                                     ? NeighborhoodMethod::kFixedSpWeighted
                                                     : NeighborhoodMethod::kFixedAisWeighted,
                           0};
        if (!src->empty()) {
          const auto members = src->members();
          fixed = inject_fixed(members, tc.training_user,
                               predictor == Regime::kSp ? Weighting::kSp : Weighting::kAis, cfg.ais, cfg.sim);
        }
        fixed.reviewers_seen = src->reviewers_seen;
        out = evaluate_neighborhood(tc, fixed, cfg.pred_opts, cfg.sim);
      } catch (const std::exception& e) {
        out = failed_record(tc, src->reviewers_seen, e.what());
      }
    }
  });

  const auto abs_error = [](const PredictionRecord& r) -> std::optional<double> { return r.abs_error(); };
  const auto tau = [](const PredictionRecord& r) -> std::optional<double> { return r.tau; };
  for (int metric = 0; metric < 2; ++metric) {
    for (std::size_t a = 0; a < kRegimes.size(); ++a) {
      for (std::size_t b = a + 1; b < kRegimes.size(); ++b) {
        RegimeComparison cmp;
        cmp.metric = metric == 0 ? "abs_error" : "tau";
        cmp.pred1 = kRegimes[a].first;
        cmp.nh1 = kRegimes[a].second;
        cmp.pred2 = kRegimes[b].first;
        cmp.nh2 = kRegimes[b].second;
        std::vector<double> first, second;
        const auto& ra = result.regimes[a].records;
        const auto& rb = result.regimes[b].records;
        cmp.test = metric == 0 ? paired_test(ra, rb, abs_error, &first, &second)
                               : paired_test(ra, rb, tau, &first, &second);
        if (!first.empty()) {
          cmp.median1 = median(first);
          cmp.median2 = median(second);
        }
        result.comparisons.push_back(std::move(cmp));
      }
    }
  }

  using Getter = double (*)(const Characteristics&);
  const std::array<std::pair<const char*, Getter>, 4> table2 = {{
      {"neighbours", [](const Characteristics& c) { return static_cast<double>(c.size); }},
      {"overlap", [](const Characteristics& c) { return static_cast<double>(c.overlap_count); }},
      {"correlation", [](const Characteristics& c) { return c.mean_abs_corr_to_test; }},
      {"neighbour_correlation", [](const Characteristics& c) { return c.mean_inter_neighbor_abs_corr; }},
  }};
  for (const auto& [name, get] : table2) {
    CharacteristicComparison cmp;
    cmp.characteristic = name;
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> sp_values, ais_values;
    for (std::size_t i = 0; i < n; ++i) {
      pairs.emplace_back(get(sp_chars[i]), get(ais_chars[i]));
      sp_values.push_back(pairs.back().first);
      ais_values.push_back(pairs.back().second);
    }
    cmp.mean_sp = describe(sp_values).mean;
    cmp.mean_ais = describe(ais_values).mean;
    try {
      cmp.test = wilcoxon_test(pairs);
    } catch (const PreconditionError&) {
      cmp.test = std::nullopt;
    }
    result.characteristics.push_back(std::move(cmp));
  }
  return result;
}

}  // namespace idionet
