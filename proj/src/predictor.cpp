#include "idionet/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <span>

#include <fmt/format.h>

#include "idionet/error.hpp"

namespace idionet {

namespace {

void check_pairing(const UserProfile& test_user, const Neighborhood& nh) {
  if (nh.test_user.id() != test_user.id()) {
    throw PreconditionError(fmt::format("neighbourhood was built for user {}, not {}", nh.test_user.id(),
                                        test_user.id()));
  }
}

Prediction predict_with_means(double user_mean, const Neighborhood& nh, std::span<const double> neighbor_means,
                              MovieId movie, const PredictionOptions& opts) {
  double numerator = 0.0;
  double weights = 0.0;
  std::size_t contributing = 0;
  for (std::size_t k = 0; k < nh.entries.size(); ++k) {
    const auto& e = nh.entries[k];
    auto vote = e.profile->find(movie);
    if (!vote) vote = opts.default_vote;
    if (!vote) continue;
    numerator += e.weight * (vote->value() - neighbor_means[k]);
    weights += opts.absolute_weight_denominator ? std::abs(e.weight) : e.weight;
    ++contributing;
  }
  if (contributing == 0 || std::abs(weights) < opts.weight_sum_epsilon) return {user_mean, true};

  double p = user_mean + numerator / weights;
  if (opts.clamp_output) p = std::clamp(p, 0.0, 1.0);
  return {p, false};
}

std::vector<double> neighbor_means(const Neighborhood& nh) {
  std::vector<double> means;
  means.reserve(nh.entries.size());
  for (const auto& e : nh.entries) means.push_back(mean_vote(*e.profile));
  return means;
}

}  // namespace

Prediction predict(const UserProfile& test_user, const Neighborhood& nh, MovieId movie,
                   const PredictionOptions& opts) {
  check_pairing(test_user, nh);
  const double user_mean = mean_vote(test_user);
  const auto means = neighbor_means(nh);
  return predict_with_means(user_mean, nh, means, movie, opts);
}

std::vector<Recommendation> recommend(const UserProfile& test_user, const Neighborhood& nh,
                                      const PredictionOptions& opts) {
  check_pairing(test_user, nh);
  const double user_mean = mean_vote(test_user);
  const auto means = neighbor_means(nh);

  std::set<MovieId> candidates;
  for (const auto& e : nh.entries) {
    for (const Vote& v : e.profile->votes()) candidates.insert(v.movie);
  }

  std::vector<Recommendation> out;
  out.reserve(candidates.size());
  for (MovieId movie : candidates) {
    out.push_back({movie, predict_with_means(user_mean, nh, means, movie, opts).value, 0});
  }
  std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.predicted_score != b.predicted_score) return a.predicted_score > b.predicted_score;
    return a.movie < b.movie;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

}  // namespace idionet
