// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "cli.hpp"
#include "idionet/ais.hpp"
#include "idionet/eval.hpp"
#include "idionet/harness.hpp"
#include "idionet/io.hpp"
#include "support.hpp"

using namespace idionet;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << (ok ? "PASS " : "FAIL ") << id << ": " << detail << std::endl;
}

void info(const std::string& id, const std::string& detail) { std::cout << "INFO " << id << ": " << detail << std::endl; }

void criterion1() {
  struct Row {
    std::size_t n;
    double w, p, tol;
  };
  const Row rows[] = {{97, 2212, 0.5551, 0.015},     {83, 801, 1.917e-05, 0.015},  {84, 1706, 0.7263, 0.015},
                      {83, 707.5, 2.617e-06, 0.015}, {26, 16.5, 5.686e-05, 0.015}, {97, 151, 1.196e-15, 0.10}};
  bool ok = true;
  double worst = 0;
  for (const auto& r : rows) {
    const double rel = std::abs(wilcoxon_p(r.n, r.w) / r.p - 1.0);
    ok &= rel <= r.tol;
    worst = std::max(worst, r.tol == 0.015 ? rel : 0.0);
  }
  const double tail = std::abs(wilcoxon_p(97, 151) / 1.196e-15 - 1.0);
  report("1 wilcoxon golden", ok, fmt::format("max rel error {:.3f}% (limit 1.5%), deep tail {:.3f}% (limit 10%)", 100 * worst, 100 * tail));
}

double brute_tau(const std::vector<RankedPair>& v) {
  const auto before = [](double va, MovieId ma, double vb, MovieId mb) { return va > vb || (va == vb && ma < mb); };
  int nd = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      nd += before(v[i].actual, v[i].movie, v[j].actual, v[j].movie) !=
            before(v[i].predicted, v[i].movie, v[j].predicted, v[j].movie);
    }
  }
  const double n = static_cast<double>(v.size());
  return 1.0 - 4.0 * nd / (n * (n - 1.0));
}

void criterion2() {
  Rng rng(2);
  int mismatches = 0;
  bool extremes = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 7);
    std::vector<RankedPair> v, same, reversed;
    for (std::size_t i = 0; i < n; ++i) {
      v.push_back({static_cast<MovieId>(i + 1), uniform_index(rng, 6) / 5.0, uniform_index(rng, 6) / 5.0});
      same.push_back({static_cast<MovieId>(i + 1), double(n - i), double(n - i)});
      reversed.push_back({static_cast<MovieId>(i + 1), double(n - i), double(i)});
    }
    mismatches += kendall_tau(v) != brute_tau(v);
    extremes &= kendall_tau(same) == 1.0 && kendall_tau(reversed) == -1.0;
  }
  report("2 kendall oracle", mismatches == 0 && extremes,
         fmt::format("{} mismatches in 1000 instances; identity/reversal exact: {}", mismatches, extremes));
}

void criterion3() {
  Rng rng(3);
  double worst = 0;
  bool symmetric = true, bounded = true;
  for (int i = 0; i < 1000; ++i) {
    const auto u = testing::random_profile(1, rng, 60, 1, 60);
    const auto v = testing::random_profile(2, rng, 60, 1, 60);
    const double r = pearson_amended(u, v);
    worst = std::max(worst, std::abs(r - testing::reference_pearson(u, v)));
    symmetric &= r == pearson_amended(v, u);
    bounded &= std::abs(r) <= std::min(1.0, overlap_size(u, v) / 100.0) + 1e-15;
  }
  report("3 pearson properties", symmetric && bounded && worst <= 1e-9,
         fmt::format("symmetric {}, bounded {}, max deviation from direct evaluation {:.2e}", symmetric, bounded,
                     worst));
}

struct Pool {
  UserProfile antigen;
  std::vector<UserProfile> members;
};

Pool random_pool(Rng& rng, std::size_t size) {
  Pool p{testing::random_profile(1, rng, 15, 4, 15), {}};
  for (std::size_t i = 0; i < size; ++i) {
    p.members.push_back(testing::random_profile(static_cast<UserId>(i + 2), rng, 15, 3, 15));
  }
  return p;
}

ImmuneNetwork<> build(const Pool& pool, const AisParams& params) {
  SimilarityParams sim;
  sim.overlap_penalty = 5;
  ImmuneNetwork<> net(pool.antigen, params, sim);
  for (const auto& m : pool.members) net.add_antibody(m);
  return net;
}

void criterion4() {
  Rng rng(4);
  // (a) pure decay
  AisParams decay;
  decay.removal_threshold = 0.0;
  decay.stability_window = 1000;
  auto net = build(random_pool(rng, 8), decay);
  double worst = 0;
  for (int t = 1; t <= 50; ++t) {
    net.iterate();
    for (Eigen::Index i = 0; i < net.size(); ++i) {
      worst = std::max(worst, std::abs(net.concentrations()(i) - 10.0 * std::pow(1.0 - decay.death, t)));
    }
  }
  const bool a = worst <= 1e-9 && net.size() == 8;

  // (b) ordering without suppression
  bool b = true;
  for (int trial = 0; trial < 100; ++trial) {
    AisParams p;
    p.stimulation = 0.05 + 0.5 * uniform_unit(rng);
    p.conc_max = 1e12;
    p.removal_threshold = 0.0;
    auto n = build(random_pool(rng, 8), p);
    for (int t = 0; t < 20; ++t) {
      n.iterate_without_removal();
      for (Eigen::Index x = 0; x < n.size(); ++x) {
        for (Eigen::Index y = 0; y < n.size(); ++y) {
          if (n.antigen_match()(x) > n.antigen_match()(y)) b &= n.concentrations()(x) >= n.concentrations()(y);
        }
      }
    }
  }

  // (c) monotone suppression
  bool c = true;
  for (int trial = 0; trial < 500; ++trial) {
    const Pool pool = random_pool(rng, 10);
    AisParams lo;
    lo.stimulation = uniform_unit(rng);
    lo.suppression = uniform_unit(rng);
    lo.removal_threshold = 0.0;
    AisParams hi = lo;
    hi.suppression += uniform_unit(rng);
    auto x = build(pool, lo);
    auto y = build(pool, hi);
    x.iterate();
    y.iterate();
    c &= (y.concentrations().array() <= x.concentrations().array()).all();
  }

  // (d) clamp bounds
  bool d = true;
  std::size_t steps = 0;
  while (steps < 10000) {
    AisParams p;
    p.stimulation = 2 * uniform_unit(rng);
    p.suppression = 2 * uniform_unit(rng);
    p.death = 0.5 * uniform_unit(rng);
    p.removal_threshold = 5 * uniform_unit(rng);
    auto n = build(random_pool(rng, 12), p);
    while (n.size() > 0 && steps < 10000 && !n.is_stable()) {
      n.iterate();
      ++steps;
      d &= (n.concentrations().array() >= p.conc_min).all() && (n.concentrations().array() <= p.conc_max).all();
    }
  }
  report("4 dynamics properties", a && b && c && d,
         fmt::format("(a) decay max error {:.1e}: {}; (b) ordering: {}; (c) monotone suppression: {}; "
                     "(d) clamp over {} steps: {}",
                     worst, a, b, c, steps, d));
}

struct DeskMeans {
  double neighbors = 0, inter = 0, mae = 0, reviewers = 0;
};

DeskMeans desk_run(const Dataset& d, ExperimentConfig cfg, std::size_t repeats) {
  DeskMeans m;
  for (std::size_t r = 0; r < repeats; ++r) {
    cfg.seed = repeat_seed(1, r);
    const auto s = summarize(run_experiment(d, cfg));
    m.neighbors += s.neighbors.mean / repeats;
    m.inter += s.inter_corr.mean / repeats;
    m.mae += s.mae() / repeats;
    m.reviewers += s.reviewers.mean / repeats;
  }
  return m;
}

void criterion5() {
  Rng rng(42);
  const Dataset d = generate_synthetic(SyntheticParams{}, rng);
  constexpr std::size_t kRepeats = 5;
  ExperimentConfig base;
  base.n_test_users = 20;
  base.ais.stimulation = 0.3;
  base.ais.suppression = 0.2;

  auto cfg = base;
  cfg.algo = Algorithm::kAis;
  const auto ais = desk_run(d, cfg, kRepeats);
  cfg.algo = Algorithm::kMatchedSp;
  const auto matched = desk_run(d, cfg, kRepeats);
  cfg.algo = Algorithm::kSp;
  const auto sp = desk_run(d, cfg, kRepeats);
  cfg.ais.suppression = 0.0;
  cfg.algo = Algorithm::kAis;
  const auto simple = desk_run(d, cfg, kRepeats);
  cfg.algo = Algorithm::kMatchedSp;
  const auto simple_matched = desk_run(d, cfg, kRepeats);

  report("5a AIS neighbourhood smaller than matched SP", ais.neighbors < matched.neighbors,
         fmt::format("AIS {:.2f} vs matched SP {:.2f} (matched SP takes k = AIS size)", ais.neighbors,
                     matched.neighbors));
  info("5a plain SP k=100", fmt::format("AIS {:.2f} vs SP {:.2f}", ais.neighbors, sp.neighbors));
  report("5b AIS inter-neighbour |corr| below SP", ais.inter < sp.inter,
         fmt::format("AIS {:.5f} vs SP (k=100) {:.5f}", ais.inter, sp.inter));
  info("5b matched SP", fmt::format("matched SP {:.5f}", matched.inter));
  const double gap = std::abs(simple.mae - simple_matched.mae);
  report("5c simple AIS vs matched SP MAE", gap <= 0.05,
         fmt::format("|{:.4f} - {:.4f}| = {:.4f} (limit 0.05)", simple.mae, simple_matched.mae, gap));
  info("5 reviewers", fmt::format("AIS {:.1f}, simple AIS {:.1f}, SP {:.1f}", ais.reviewers, simple.reviewers,
                                  sp.reviewers));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion6(const std::filesystem::path& dir) {
  std::ostringstream sink;
  const auto votes = (dir / "votes.csv").string();
  bool ok = cli::run({"synth", "--seed", "42", "--out", votes}, sink, sink) == cli::kOk;
  std::string detail;
  for (const char* algo : {"ais", "sp", "matched-sp"}) {
    std::string outputs[2];
    for (int i = 0; i < 2; ++i) {
      const auto out = (dir / fmt::format("{}_{}.csv", algo, i)).string();
      ok &= cli::run({"run", "--votes", votes, "--algo", algo, "--stim", "0.3", "--supp", "0.2", "--test-users",
                      "20", "--seed", "1", "--out", out},
                     sink, sink) == cli::kOk;
      outputs[i] = slurp(out);
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    ok &= same;
    detail += fmt::format("{} {}; ", algo, same ? "identical" : "DIFFERENT");
  }
  report("6 determinism", ok, detail + "two invocations of run --seed 1");
}

void criterion7() {
  Rng rng(42);
  const Dataset d = generate_synthetic(SyntheticParams{}, rng);
  ExperimentConfig cfg;
  cfg.n_test_users = 20;
  cfg.ais.stimulation = 0.3;
  cfg.ais.suppression = 0.2;
  const auto swap = swap_experiment(d, cfg);
  bool four = swap.regimes.size() == 4;
  for (const auto& r : swap.regimes) four &= r.records.size() == cfg.n_test_users;
  cfg.algo = Algorithm::kSp;
  std::ostringstream a, b;
  write_results_csv(a, swap.regime(Regime::kSp, Regime::kSp).records);
  write_results_csv(b, run_experiment(d, cfg));
  const bool identical = a.str() == b.str();
  std::map<std::string, std::set<std::string>> pairs;
  for (const auto& c : swap.comparisons) {
    pairs[c.metric].insert(fmt::format("{}{}{}{}", to_string(c.pred1), to_string(c.nh1), to_string(c.pred2),
                                       to_string(c.nh2)));
  }
  const bool six = pairs.size() == 2 && pairs["abs_error"].size() == 6 && pairs["tau"].size() == 6 &&
                   swap.comparisons.size() == 12;
  report("7 swap structure", four && identical && six,
         fmt::format("four regimes per user: {}; SP/SP record-identical to plain SP: {}; six rows per metric: {}",
                     four, identical, six));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const auto dir = std::filesystem::temp_directory_path() / "idionet_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6(dir);
  criterion7();

  std::filesystem::remove_all(dir);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << fmt::format("{} criteria failed ({:.1f} s)", failures, seconds) << std::endl;
  return failures == 0 ? 0 : 1;
}
