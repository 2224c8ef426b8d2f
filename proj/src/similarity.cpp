#include "idionet/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

#include "idionet/error.hpp"

namespace idionet {

void SimilarityParams::validate() const {
  if (overlap_penalty < 1) {
    throw PreconditionError(fmt::format("overlap penalty must be >= 1, got {}", overlap_penalty));
  }
}

namespace {

// Walks both sorted vote lists in lockstep and calls fn(u_vote, v_vote) per shared movie.
template <typename Fn>
void for_each_shared(const UserProfile& u, const UserProfile& v, Fn&& fn) {
  auto a = u.votes().begin();
  auto b = v.votes().begin();
  const auto a_end = u.votes().end();
  const auto b_end = v.votes().end();
  while (a != a_end && b != b_end) {
    if (a->movie < b->movie) {
      ++a;
    } else if (b->movie < a->movie) {
      ++b;
    } else {
      fn(*a, *b);
      ++a;
      ++b;
    }
  }
}

}  // namespace

std::vector<MovieId> overlap(const UserProfile& u, const UserProfile& v) {
  std::vector<MovieId> shared;
  for_each_shared(u, v, [&](const Vote& a, const Vote&) { shared.push_back(a.movie); });
  return shared;
}

std::size_t overlap_size(const UserProfile& u, const UserProfile& v) noexcept {
  std::size_t n = 0;
  for_each_shared(u, v, [&](const Vote&, const Vote&) { ++n; });
  return n;
}

double pearson_amended(const UserProfile& u, const UserProfile& v, const SimilarityParams& params) {
  if (u.empty() || v.empty()) {
    throw PreconditionError(
        fmt::format("correlation needs non-empty profiles (users {} and {})", u.id(), v.id()));
  }

  // Deviations scaled by count * 5: (N_u * level_i - sum_u) is an exact integer, so the
  // zero-variance test below needs no tolerance. The common scale cancels in r.
  const auto nu = static_cast<std::int64_t>(u.size());
  const auto nv = static_cast<std::int64_t>(v.size());
  const std::int64_t su = u.level_sum();
  const std::int64_t sv = v.level_sum();

  std::size_t n = 0;
  double cross = 0.0;
  std::int64_t var_u = 0;
  std::int64_t var_v = 0;
  for_each_shared(u, v, [&](const Vote& a, const Vote& b) {
    const std::int64_t du = nu * a.score.level() - su;
    const std::int64_t dv = nv * b.score.level() - sv;
    cross += static_cast<double>(du) * static_cast<double>(dv);
    var_u += du * du;
    var_v += dv * dv;
    ++n;
  });

  if (n == 0) return params.no_overlap_default;
  if (var_u == 0 || var_v == 0) return params.zero_variance_default;

  double r = cross / std::sqrt(static_cast<double>(var_u) * static_cast<double>(var_v));
  r = std::clamp(r, -1.0, 1.0);
  if (n < static_cast<std::size_t>(params.overlap_penalty)) {
    r *= static_cast<double>(n) / static_cast<double>(params.overlap_penalty);
  }
  return r;
}

}  // namespace idionet
