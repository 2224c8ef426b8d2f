#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "idionet/ais.hpp"
#include "idionet/dataset.hpp"
#include "idionet/similarity.hpp"

namespace idionet {

enum class NeighborhoodMethod { kSp, kAis, kFixedSpWeighted, kFixedAisWeighted };

std::string_view to_string(NeighborhoodMethod method);

/// How the members of a fixed neighbourhood are weighted.
enum class Weighting { kSp, kAis };

struct NeighborEntry {
  const UserProfile* profile = nullptr;
  double r = 0.0;  ///< signed correlation to the test user
  std::optional<double> concentration;
  double weight = 0.0;

  UserId id() const noexcept { return profile->id(); }
};

/// Entries reference profiles owned elsewhere (normally the Dataset).
struct Neighborhood {
  UserProfile test_user;
  std::vector<NeighborEntry> entries;
  NeighborhoodMethod method = NeighborhoodMethod::kSp;
  std::size_t reviewers_seen = 0;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  std::vector<const UserProfile*> members() const;
};

struct Characteristics {
  std::size_t size = 0;
  std::size_t overlap_count = 0;
  double mean_abs_corr_to_test = 0.0;
  double mean_inter_neighbor_abs_corr = 0.0;
};

/// Simple Pearson: the k reviewers with the largest |r| (r != 0), ties to the lower
/// user id. With `target_movie`, reviewers who did not rate it are skipped.
Neighborhood select_sp(ReviewerStream reviewers, const UserProfile& test_user, std::size_t k,
                       std::optional<MovieId> target_movie, const SimilarityParams& sim = {});

/// Immune-network selection followed by differentiation; weights are r * concentration
/// with the signed r. Propagates DifferentiationStalled.
Neighborhood select_ais(ReviewerStream reviewers, const UserProfile& test_user, const AisParams& params,
                        const SimilarityParams& sim = {});

/// Takes the membership as given. AIS weighting admits every member to a fresh network
/// (capacity widened to fit) and runs only the differentiation pass.
Neighborhood inject_fixed(ReviewerStream members, const UserProfile& test_user, Weighting weighting,
                          const AisParams& params, const SimilarityParams& sim = {});

/// Overlap is counted against the training profile: its votes that at least one
/// neighbour also rated.
Characteristics characteristics(const Neighborhood& nh, const TestCase& test_case,
                                const SimilarityParams& sim = {});

struct Membership {
  std::size_t common = 0;
  std::size_t unique_first = 0;
  std::size_t unique_second = 0;
};

Membership compare_membership(const Neighborhood& first, const Neighborhood& second);

}  // namespace idionet
