#pragma once

#include <cmath>
#include <initializer_list>
#include <set>
#include <utility>
#include <vector>

#include "idionet/dataset.hpp"
#include "idionet/random.hpp"

namespace idionet::testing {

/// Profile from (movie, level) pairs.
inline UserProfile profile(UserId id, std::initializer_list<std::pair<MovieId, int>> votes) {
  std::vector<Vote> v;
  for (const auto& [movie, level] : votes) v.push_back({movie, Score::from_level(level)});
  return UserProfile(id, std::move(v));
}

/// Random profile over movies 1..movies with between lo and hi distinct votes.
inline UserProfile random_profile(UserId id, Rng& rng, MovieId movies, std::size_t lo, std::size_t hi) {
  std::vector<MovieId> pool(movies);
  for (MovieId m = 0; m < movies; ++m) pool[m] = m + 1;
  const std::size_t count = lo + uniform_index(rng, hi - lo + 1);
  partial_shuffle(std::span<MovieId>(pool), count, rng);
  std::vector<Vote> v;
  for (std::size_t i = 0; i < count; ++i) {
    v.push_back({pool[i], Score::from_level(static_cast<int>(uniform_index(rng, 6)))});
  }
  return UserProfile(id, std::move(v));
}

/// Textbook Pearson over shared movies with full-profile means, written with plain
/// maps and doubles, then amended: no overlap -> 0, zero variance -> 0, n < P -> * n/P.
inline double reference_pearson(const UserProfile& u, const UserProfile& v, int penalty = 100) {
  double su = 0, sv = 0;
  for (const auto& x : u.votes()) su += x.score.value();
  for (const auto& x : v.votes()) sv += x.score.value();
  const double mu = su / u.size(), mv = sv / v.size();
  double num = 0, du2 = 0, dv2 = 0;
  int n = 0;
  for (const auto& a : u.votes()) {
    for (const auto& b : v.votes()) {
      if (a.movie != b.movie) continue;
      const double da = a.score.value() - mu, db = b.score.value() - mv;
      num += da * db;
      du2 += da * da;
      dv2 += db * db;
      ++n;
    }
  }
  if (n == 0) return 0.0;
  if (du2 * dv2 < 1e-12) return 0.0;
  double r = num / std::sqrt(du2 * dv2);
  if (n < penalty) r *= static_cast<double>(n) / penalty;
  return r;
}

}  // namespace idionet::testing
