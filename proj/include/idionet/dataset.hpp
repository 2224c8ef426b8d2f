#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "idionet/random.hpp"

namespace idionet {

using UserId = std::uint32_t;
using MovieId = std::uint32_t;

/// A vote on the six-value scale {0, 0.2, 0.4, 0.6, 0.8, 1.0}, stored as its level 0..5.
class Score {
 public:
  static constexpr int kMaxLevel = 5;

  constexpr Score() = default;

  /// Level 0..5; throws PreconditionError otherwise.
  static Score from_level(int level);
  /// Normalised value; must lie within 1e-9 of one of the six quantised values.
  static std::optional<Score> try_from_value(double value);
  static Score from_value(double value);

  constexpr int level() const noexcept { return level_; }
  constexpr double value() const noexcept { return level_ / static_cast<double>(kMaxLevel); }

  /// Canonical decimal spelling ("0", "0.2", ..., "1").
  std::string_view normalized_text() const noexcept;

  friend constexpr auto operator<=>(Score, Score) = default;

 private:
  constexpr explicit Score(std::uint8_t level) : level_(level) {}
  std::uint8_t level_ = 0;
};

struct Vote {
  MovieId movie = 0;
  Score score;

  friend bool operator==(const Vote&, const Vote&) = default;
};

/// A user's sparse vote vector. Votes are kept sorted by movie id, one per movie.
class UserProfile {
 public:
  UserProfile() = default;
  /// Throws DataError on a repeated movie id.
  UserProfile(UserId id, std::vector<Vote> votes);

  UserId id() const noexcept { return id_; }
  std::span<const Vote> votes() const noexcept { return votes_; }
  std::size_t size() const noexcept { return votes_.size(); }
  bool empty() const noexcept { return votes_.empty(); }

  std::optional<Score> find(MovieId movie) const noexcept;
  bool has_vote(MovieId movie) const noexcept { return find(movie).has_value(); }

  /// Sum of score levels over all votes; the mean vote is level_sum / (5 * size).
  std::int64_t level_sum() const noexcept { return level_sum_; }

  friend bool operator==(const UserProfile& a, const UserProfile& b) {
    return a.id_ == b.id_ && a.votes_ == b.votes_;
  }

 private:
  UserId id_ = 0;
  std::vector<Vote> votes_;
  std::int64_t level_sum_ = 0;
};

/// Mean over all of the profile's votes. Throws PreconditionError when empty.
double mean_vote(const UserProfile& profile);

/// Immutable after construction; users sorted by id.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DataError on a repeated user id.
  explicit Dataset(std::vector<UserProfile> users);

  std::span<const UserProfile> users() const noexcept { return users_; }
  std::span<const MovieId> movie_ids() const noexcept { return movie_ids_; }
  const UserProfile* find(UserId id) const noexcept;
  std::size_t vote_count() const noexcept;

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.users_ == b.users_; }

 private:
  std::vector<UserProfile> users_;
  std::vector<MovieId> movie_ids_;
};

enum class VoteFormat { kRaw0To5, kNormalized };

std::optional<VoteFormat> parse_vote_format(std::string_view text);
std::string_view to_string(VoteFormat format);

/// Parses `user_id,movie_id,score` lines. Blank lines and lines starting with '#'
/// are skipped. Throws DataError naming the 1-based line number.
Dataset load_votes(std::istream& in, VoteFormat format);
/// As above; a missing or unreadable file is a DataError carrying the path.
Dataset load_votes(const std::filesystem::path& path, VoteFormat format);

/// Writes one line per vote ordered by (user, movie); load_votes inverts it.
void write_votes(std::ostream& out, const Dataset& dataset, VoteFormat format);

struct TestCase {
  UserProfile training_user;
  Vote reserved;
  UserId original_user_id = 0;
};

/// Uniform sample without replacement among users with at least `min_votes` votes.
/// Throws PreconditionError if fewer than `count` users qualify.
std::vector<const UserProfile*> sample_test_users(const Dataset& dataset, std::size_t count,
                                                  std::size_t min_votes, Rng& rng);

/// Hides one uniformly chosen vote. Requires at least two votes.
TestCase reserve_vote(const UserProfile& profile, Rng& rng);

struct SyntheticParams {
  std::size_t users = 500;
  std::size_t movies = 200;
  std::size_t clusters = 5;
  double sparsity = 0.25;
  double noise = 0.2;
};

/// Cluster model: each cluster has a uniformly drawn preferred score per movie; each
/// user joins one cluster, rates ceil(sparsity * movies) random movies, and copies the
/// cluster preference with probability 1 - noise (otherwise a uniform score).
/// User ids are 1..users, movie ids 1..movies. When `cluster_of_user` is given it
/// receives each user's cluster, indexed by user id - 1.
Dataset generate_synthetic(const SyntheticParams& params, Rng& rng,
                           std::vector<std::size_t>* cluster_of_user = nullptr);

}  // namespace idionet
