#include "idionet/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "idionet/error.hpp"

namespace idionet {

std::string_view to_string(NeighborhoodMethod method) {
  switch (method) {
    case NeighborhoodMethod::kSp:
      return "SP";
    case NeighborhoodMethod::kAis:
      return "AIS";
    case NeighborhoodMethod::kFixedSpWeighted:
      return "fixed-SP-weighted";
    case NeighborhoodMethod::kFixedAisWeighted:
      return "fixed-AIS-weighted";
  }
  return "unknown";
}

std::vector<const UserProfile*> Neighborhood::members() const {
  std::vector<const UserProfile*> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.profile);
  return out;
}

Neighborhood select_sp(ReviewerStream reviewers, const UserProfile& test_user, std::size_t k,
                       std::optional<MovieId> target_movie, const SimilarityParams& sim) {
  if (k < 1) throw PreconditionError("neighbourhood size k must be >= 1");

  std::vector<NeighborEntry> candidates;
  for (const UserProfile* reviewer : reviewers) {
    if (reviewer->id() == test_user.id() || reviewer->empty()) continue;
    if (target_movie && !reviewer->has_vote(*target_movie)) continue;
    const double r = pearson_amended(test_user, *reviewer, sim);
    if (r == 0.0) continue;
    candidates.push_back(NeighborEntry{reviewer, r, std::nullopt, r});
  }

  const auto better = [](const NeighborEntry& a, const NeighborEntry& b) {
    const double ma = std::abs(a.r);
    const double mb = std::abs(b.r);
    if (ma != mb) return ma > mb;
    return a.id() < b.id();
  };
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), better);
  candidates.resize(keep);

  return Neighborhood{test_user, std::move(candidates), NeighborhoodMethod::kSp, reviewers.size()};
}

namespace {

std::vector<NeighborEntry> weighted_by_concentration(const ImmuneNetwork<double>& net,
                                                     const UserProfile& test_user,
                                                     const SimilarityParams& sim) {
  std::vector<NeighborEntry> entries;
  entries.reserve(static_cast<std::size_t>(net.size()));
  for (Eigen::Index i = 0; i < net.size(); ++i) {
    const UserProfile& member = net.profile(i);
    const double r = pearson_amended(test_user, member, sim);
    const double x = net.concentrations()(i);
    entries.push_back(NeighborEntry{&member, r, x, r * x});
  }
  return entries;
}

}  // namespace

Neighborhood select_ais(ReviewerStream reviewers, const UserProfile& test_user, const AisParams& params,
                        const SimilarityParams& sim) {
  ImmuneNetwork<double> net(test_user, params, sim);
  run_selection(net, reviewers);
  Neighborhood nh{test_user, {}, NeighborhoodMethod::kAis, net.reviewers_seen()};
  if (net.size() == 0) return nh;
  reset_and_differentiate(net);
  nh.entries = weighted_by_concentration(net, test_user, sim);
  return nh;
}

Neighborhood inject_fixed(ReviewerStream members, const UserProfile& test_user, Weighting weighting,
                          const AisParams& params, const SimilarityParams& sim) {
  if (members.empty()) throw PreconditionError("fixed neighbourhood has no members");
  std::unordered_set<UserId> ids;
  for (const UserProfile* m : members) {
    if (m->id() == test_user.id()) throw PreconditionError("fixed neighbourhood contains the test user");
    if (!ids.insert(m->id()).second) throw PreconditionError("fixed neighbourhood repeats a member");
  }

  if (weighting == Weighting::kSp) {
    Neighborhood nh{test_user, {}, NeighborhoodMethod::kFixedSpWeighted, 0};
    nh.entries.reserve(members.size());
    for (const UserProfile* m : members) {
      const double r = pearson_amended(test_user, *m, sim);
      nh.entries.push_back(NeighborEntry{m, r, std::nullopt, r});
    }
    return nh;
  }

  AisParams widened = params;
  widened.pool_size = std::max(params.pool_size, members.size());
  ImmuneNetwork<double> net(test_user, widened, sim);
  for (const UserProfile* m : members) {
    if (!net.add_antibody(*m)) throw PreconditionError("fixed neighbourhood member was not admitted");
  }
  reset_and_differentiate(net);
  return Neighborhood{test_user, weighted_by_concentration(net, test_user, sim),
                      NeighborhoodMethod::kFixedAisWeighted, 0};
}

Characteristics characteristics(const Neighborhood& nh, const TestCase& test_case,
                                const SimilarityParams& sim) {
  Characteristics c;
  c.size = nh.size();
  if (nh.empty()) return c;

  std::set<MovieId> rated_by_neighbors;
  double abs_corr = 0.0;
  for (const auto& e : nh.entries) {
    for (const Vote& v : e.profile->votes()) rated_by_neighbors.insert(v.movie);
    abs_corr += std::abs(e.r);
  }
  for (const Vote& v : test_case.training_user.votes()) {
    if (rated_by_neighbors.contains(v.movie)) ++c.overlap_count;
  }
  c.mean_abs_corr_to_test = abs_corr / static_cast<double>(nh.size());

  if (nh.size() >= 2) {
    double inter = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < nh.size(); ++i) {
      for (std::size_t j = i + 1; j < nh.size(); ++j) {
        inter += std::abs(pearson_amended(*nh.entries[i].profile, *nh.entries[j].profile, sim));
        ++pairs;
      }
    }
    c.mean_inter_neighbor_abs_corr = inter / static_cast<double>(pairs);
  }
  return c;
}

Membership compare_membership(const Neighborhood& first, const Neighborhood& second) {
  std::unordered_set<UserId> a;
  for (const auto& e : first.entries) a.insert(e.id());
  Membership m;
  for (const auto& e : second.entries) {
    if (a.contains(e.id())) {
      ++m.common;
    } else {
      ++m.unique_second;
    }
  }
  m.unique_first = a.size() - m.common;
  return m;
}

}  // namespace idionet
