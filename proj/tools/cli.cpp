#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "idionet/dataset.hpp"
#include "idionet/error.hpp"
#include "idionet/eval.hpp"
#include "idionet/harness.hpp"
#include "idionet/io.hpp"

namespace idionet::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flags shared by run, sweep and swap.
struct RunFlags {
  std::string votes;
  std::string format = "raw0to5";
  std::string algo = "ais";
  std::optional<double> stim;
  std::optional<double> supp;
  double death = 0.1;
  std::size_t pool = 100;
  std::size_t test_users = 100;
  std::size_t max_reviewers = 15000;
  std::size_t sp_k = 100;
  std::uint64_t seed = 1;
  std::string default_vote = "none";
  int overlap_penalty = 100;
  std::size_t min_votes = 2;
  std::size_t threads = 0;
  std::optional<double> removal_threshold;
  std::optional<double> antigen_conc;
  std::optional<std::size_t> stability_window;
  bool self_suppression = false;
};

void add_run_flags(CLI::App& cmd, RunFlags& f, bool with_algo) {
  cmd.add_option("--votes", f.votes, "Vote file (user_id,movie_id,score)")->required();
  cmd.add_option("--format", f.format, "Score encoding: raw0to5 | normalized")->capture_default_str();
  if (with_algo) cmd.add_option("--algo", f.algo, "sp | ais | matched-sp")->capture_default_str();
  cmd.add_option("--stim", f.stim, "Stimulation rate k1");
  cmd.add_option("--supp", f.supp, "Suppression rate k2");
  cmd.add_option("--death", f.death, "Death rate k3")->capture_default_str();
  cmd.add_option("--pool", f.pool, "Antibody pool capacity")->capture_default_str();
  cmd.add_option("--test-users", f.test_users, "Number of test users")->capture_default_str();
  cmd.add_option("--max-reviewers", f.max_reviewers, "Reviewer stream length per test user")
      ->capture_default_str();
  cmd.add_option("--sp-k", f.sp_k, "Simple Pearson neighbourhood size")->capture_default_str();
  cmd.add_option("--seed", f.seed, "Experiment seed")->capture_default_str();
  cmd.add_option("--default-vote", f.default_vote, "none | one of 0,0.2,...,1")->capture_default_str();
  cmd.add_option("--overlap-penalty", f.overlap_penalty, "Overlap penalty P")->capture_default_str();
  cmd.add_option("--min-votes", f.min_votes, "Minimum votes for a test user")->capture_default_str();
  cmd.add_option("--threads", f.threads, "Worker threads (0 = hardware)")->capture_default_str();
  cmd.add_option("--removal-threshold", f.removal_threshold, "Concentration below which antibodies leave");
  cmd.add_option("--antigen-conc", f.antigen_conc, "Antigen concentration y");
  cmd.add_option("--stability-window", f.stability_window, "Iterations without size change for stability");
  cmd.add_flag("--self-suppression", f.self_suppression, "Include j = i in the suppression sum");
}

VoteFormat resolve_format(const std::string& text) {
  const auto format = parse_vote_format(text);
  if (!format) throw UsageError(fmt::format("--format must be raw0to5 or normalized, got '{}'", text));
  return *format;
}

ExperimentConfig resolve_config(const RunFlags& f, bool need_stim, bool need_supp) {
  ExperimentConfig cfg;
  const auto algo = parse_algorithm(f.algo);
  if (!algo) throw UsageError(fmt::format("--algo must be sp, ais or matched-sp, got '{}'", f.algo));
  cfg.algo = *algo;
  const bool uses_ais = cfg.algo != Algorithm::kSp;
  if (uses_ais && need_stim && !f.stim) throw UsageError("--stim is required for AIS-based algorithms");
  if (uses_ais && need_supp && !f.supp) throw UsageError("--supp is required for AIS-based algorithms");
  cfg.ais.stimulation = f.stim.value_or(0.0);
  cfg.ais.suppression = f.supp.value_or(0.0);
  cfg.ais.death = f.death;
  cfg.ais.pool_size = f.pool;
  if (f.removal_threshold) cfg.ais.removal_threshold = *f.removal_threshold;
  if (f.antigen_conc) cfg.ais.antigen_conc = *f.antigen_conc;
  if (f.stability_window) cfg.ais.stability_window = *f.stability_window;
  cfg.ais.include_self_suppression = f.self_suppression;
  cfg.sim.overlap_penalty = f.overlap_penalty;
  cfg.n_test_users = f.test_users;
  cfg.max_reviewers = f.max_reviewers;
  cfg.sp_k = f.sp_k;
  cfg.seed = f.seed;
  cfg.min_votes = f.min_votes;
  cfg.threads = f.threads;
  if (f.default_vote != "none") {
    std::optional<Score> score;
    try {
      score = Score::try_from_value(std::stod(f.default_vote));
    } catch (const std::exception&) {
    }
    if (!score) throw UsageError(fmt::format("--default-vote must be none or a quantised score, got '{}'",
                                             f.default_vote));
    cfg.pred_opts.default_vote = score;
  }
  try {
    cfg.validate();
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["algo"] = to_string(cfg.algo);
  j["seed"] = cfg.seed;
  j["test_users"] = cfg.n_test_users;
  j["min_votes"] = cfg.min_votes;
  j["max_reviewers"] = cfg.max_reviewers;
  j["sp_k"] = cfg.sp_k;
  j["repeats"] = cfg.repeats;
  j["threads"] = cfg.threads;
  j["similarity"] = {{"overlap_penalty", cfg.sim.overlap_penalty},
                     {"no_overlap_default", cfg.sim.no_overlap_default},
                     {"zero_variance_default", cfg.sim.zero_variance_default}};
  const auto& a = cfg.ais;
  j["ais"] = {{"stimulation", a.stimulation},
              {"suppression", a.suppression},
              {"death", a.death},
              {"pool_size", a.pool_size},
              {"conc_init", a.conc_init},
              {"conc_min", a.conc_min},
              {"conc_max", a.conc_max},
              {"antigen_conc", a.antigen_conc},
              {"removal_threshold", a.removal_threshold},
              {"stability_window", a.stability_window},
              {"dt", a.dt},
              {"max_differentiation_iters", a.max_differentiation_iters},
              {"include_self_suppression", a.include_self_suppression}};
  const auto& p = cfg.pred_opts;
  j["prediction"] = {{"default_vote", p.default_vote ? nlohmann::ordered_json(p.default_vote->value())
                                                     : nlohmann::ordered_json(nullptr)},
                     {"clamp_output", p.clamp_output},
                     {"weight_sum_epsilon", p.weight_sum_epsilon},
                     {"absolute_weight_denominator", p.absolute_weight_denominator}};
  return j;
}

void echo_config(std::ostream& err, std::string_view command, const nlohmann::ordered_json& body) {
  nlohmann::ordered_json j;
  j["command"] = command;
  for (const auto& [k, v] : body.items()) j[k] = v;
  err << "resolved config: " << j.dump() << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path));
  return in;
}

void print_summary(std::ostream& out, const Summary& s) {
  out << fmt::format("records={} fallbacks={} errors={} mae={} tau_mean={} (n={}) neighbours={} reviewers={}\n",
                     s.records, s.fallbacks, s.errors, format_number(s.mae()),
                     s.tau ? format_number(s.tau->mean) : std::string("NA"), s.tau ? s.tau->count : 0,
                     format_number(s.neighbors.mean), format_number(s.reviewers.mean));
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("--values: cannot parse '{}'", item));
    }
  }
  if (values.empty()) throw UsageError("--values must list at least one number");
  return values;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Immune-network collaborative filtering experiments", "idionet"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cluster-model vote file");
  SyntheticParams sp;
  std::uint64_t synth_seed = 42;
  std::string synth_out;
  std::string synth_format = "raw0to5";
  synth->add_option("--users", sp.users)->capture_default_str();
  synth->add_option("--movies", sp.movies)->capture_default_str();
  synth->add_option("--clusters", sp.clusters)->capture_default_str();
  synth->add_option("--sparsity", sp.sparsity)->capture_default_str();
  synth->add_option("--noise", sp.noise)->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--format", synth_format)->capture_default_str();
  synth->add_option("--out", synth_out)->required();

  // validate
  auto* validate = app.add_subcommand("validate", "Check a vote file and print its dimensions");
  std::string validate_votes;
  std::string validate_format = "raw0to5";
  validate->add_option("--votes", validate_votes)->required();
  validate->add_option("--format", validate_format)->capture_default_str();

  // run
  auto* run_cmd = app.add_subcommand("run", "Reserved-vote evaluation for one configuration");
  RunFlags run_flags;
  std::string run_out;
  std::string run_neighborhoods;
  add_run_flags(*run_cmd, run_flags, true);
  run_cmd->add_option("--out", run_out, "Results CSV")->required();
  run_cmd->add_option("--neighborhoods", run_neighborhoods, "Optional neighbourhood dump CSV");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Vary stimulation or suppression over repeats");
  RunFlags sweep_flags;
  std::string sweep_param;
  std::string sweep_values;
  std::size_t sweep_repeats = 5;
  std::string sweep_out;
  std::string sweep_summary_out;
  add_run_flags(*sweep_cmd, sweep_flags, true);
  sweep_cmd->add_option("--param", sweep_param, "stim | supp")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep_cmd->add_option("--repeats", sweep_repeats)->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "Per-run sweep CSV")->required();
  sweep_cmd->add_option("--summary-out", sweep_summary_out, "Per-value aggregate CSV");

  // swap
  auto* swap_cmd = app.add_subcommand("swap", "Fixed-neighbourhood experiment over four regimes");
  RunFlags swap_flags;
  std::string swap_prefix;
  add_run_flags(*swap_cmd, swap_flags, false);
  swap_cmd->add_option("--out-prefix", swap_prefix)->required();

  // wilcoxon
  auto* wilcoxon_cmd = app.add_subcommand("wilcoxon", "Signed-rank test on two columns of a CSV");
  std::string wilcoxon_in, col_a, col_b;
  wilcoxon_cmd->add_option("--in", wilcoxon_in)->required();
  wilcoxon_cmd->add_option("--col-a", col_a)->required();
  wilcoxon_cmd->add_option("--col-b", col_b)->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Summarise a results CSV");
  std::string report_in, report_out;
  report_cmd->add_option("--in", report_in)->required();
  report_cmd->add_option("--out", report_out)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (synth->parsed()) {
      const VoteFormat format = resolve_format(synth_format);
      echo_config(err, "synth",
                  {{"users", sp.users}, {"movies", sp.movies}, {"clusters", sp.clusters},
                   {"sparsity", sp.sparsity}, {"noise", sp.noise}, {"seed", synth_seed},
                   {"format", to_string(format)}, {"out", synth_out}});
      Rng rng(synth_seed);
      Dataset d;
      try {
        d = generate_synthetic(sp, rng);
      } catch (const PreconditionError& e) {
        throw UsageError(e.what());
      }
      auto file = open_output(synth_out);
      write_votes(file, d, format);
      out << fmt::format("wrote {} users, {} movies, {} votes to {}\n", d.users().size(), d.movie_ids().size(),
                         d.vote_count(), synth_out);
      return kOk;
    }

    if (validate->parsed()) {
      const VoteFormat format = resolve_format(validate_format);
      echo_config(err, "validate", {{"votes", validate_votes}, {"format", to_string(format)}});
      const Dataset d = load_votes(std::filesystem::path(validate_votes), format);
      std::size_t eligible = 0;
      for (const auto& u : d.users()) eligible += u.size() >= 2 ? 1 : 0;
      out << fmt::format("users={} movies={} votes={} users_with_2plus_votes={}\n", d.users().size(),
                         d.movie_ids().size(), d.vote_count(), eligible);
      return kOk;
    }

    if (run_cmd->parsed()) {
      const VoteFormat format = resolve_format(run_flags.format);
      const ExperimentConfig cfg = resolve_config(run_flags, true, true);
      auto j = to_json(cfg);
      j["votes"] = run_flags.votes;
      j["format"] = to_string(format);
      j["out"] = run_out;
      echo_config(err, "run", j);
      const Dataset d = load_votes(std::filesystem::path(run_flags.votes), format);
      std::vector<Neighborhood> neighborhoods;
      const auto records = run_experiment(d, cfg, run_neighborhoods.empty() ? nullptr : &neighborhoods);
      auto file = open_output(run_out);
      write_results_csv(file, records);
      if (!run_neighborhoods.empty()) {
        auto nfile = open_output(run_neighborhoods);
        bool header = true;
        for (const auto& nh : neighborhoods) {
          write_neighborhood_csv(nfile, nh, header);
          header = false;
        }
      }
      for (const auto& r : records) {
        if (r.error) err << fmt::format("test user {}: {}\n", r.test_user, *r.error);
      }
      print_summary(out, summarize(records));
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const VoteFormat format = resolve_format(sweep_flags.format);
      const auto param = parse_sweep_param(sweep_param);
      if (!param) throw UsageError(fmt::format("--param must be stim or supp, got '{}'", sweep_param));
      const auto values = parse_values(sweep_values);
      ExperimentConfig cfg = resolve_config(sweep_flags, *param != SweepParam::kStimulation,
                                            *param != SweepParam::kSuppression);
      cfg.repeats = sweep_repeats;
      try {
        cfg.validate();
      } catch (const PreconditionError& e) {
        throw UsageError(e.what());
      }
      auto j = to_json(cfg);
      j["votes"] = sweep_flags.votes;
      j["format"] = to_string(format);
      j["param"] = to_string(*param);
      j["values"] = values;
      j["out"] = sweep_out;
      echo_config(err, "sweep", j);
      const Dataset d = load_votes(std::filesystem::path(sweep_flags.votes), format);
      const SweepTable table = sweep(d, cfg, *param, values);
      auto file = open_output(sweep_out);
      write_sweep_csv(file, table);
      if (!sweep_summary_out.empty()) {
        auto sfile = open_output(sweep_summary_out);
        write_sweep_summary_csv(sfile, table);
      } else {
        write_sweep_summary_csv(out, table);
      }
      return kOk;
    }

    if (swap_cmd->parsed()) {
      const VoteFormat format = resolve_format(swap_flags.format);
      const ExperimentConfig cfg = resolve_config(swap_flags, true, true);
      auto j = to_json(cfg);
      j.erase("algo");
      j["votes"] = swap_flags.votes;
      j["format"] = to_string(format);
      j["out_prefix"] = swap_prefix;
      echo_config(err, "swap", j);
      const Dataset d = load_votes(std::filesystem::path(swap_flags.votes), format);
      const SwapResult result = swap_experiment(d, cfg);
      {
        auto f = open_output(swap_prefix + "_records.csv");
        write_swap_records_csv(f, result);
      }
      {
        auto f = open_output(swap_prefix + "_comparisons.csv");
        write_comparisons_csv(f, result);
      }
      {
        auto f = open_output(swap_prefix + "_characteristics.csv");
        write_characteristics_csv(f, result);
      }
      {
        auto f = open_output(swap_prefix + "_membership.csv");
        write_membership_csv(f, result);
      }
      write_comparisons_csv(out, result);
      return kOk;
    }

    if (wilcoxon_cmd->parsed()) {
      echo_config(err, "wilcoxon", {{"in", wilcoxon_in}, {"col_a", col_a}, {"col_b", col_b}});
      auto in = open_input(wilcoxon_in);
      const CsvTable table = read_csv(in);
      const auto ia = table.column(col_a);
      const auto ib = table.column(col_b);
      if (!ia) throw UsageError(fmt::format("column '{}' not found", col_a));
      if (!ib) throw UsageError(fmt::format("column '{}' not found", col_b));
      std::vector<std::pair<double, double>> pairs;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& a = table.rows[r][*ia];
        const auto& b = table.rows[r][*ib];
        if (a.empty() || b.empty()) continue;
        try {
          pairs.emplace_back(std::stod(a), std::stod(b));
        } catch (const std::exception&) {
          throw DataError(fmt::format("row {}: non-numeric value", r + 2));
        }
      }
      WilcoxonResult w;
      try {
        w = wilcoxon_test(pairs);
      } catch (const PreconditionError& e) {
        throw DataError(e.what());
      }
      out << "n,w_plus,w_minus,p\n"
          << w.n_effective << ',' << format_number(w.w_plus) << ',' << format_number(w.w_minus) << ','
          << (w.p_two_sided ? format_number(*w.p_two_sided) : std::string()) << '\n';
      return kOk;
    }

    if (report_cmd->parsed()) {
      echo_config(err, "report", {{"in", report_in}, {"out", report_out}});
      auto in = open_input(report_in);
      const auto records = read_results_csv(in);
      if (records.empty()) throw DataError(fmt::format("'{}' has no records", report_in));
      const Summary s = summarize(records);
      auto file = open_output(report_out);
      write_summary_csv(file, s);
      print_summary(out, s);
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const PreconditionError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace idionet::cli
