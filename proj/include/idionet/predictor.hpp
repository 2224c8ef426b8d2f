#pragma once

#include <optional>
#include <vector>

#include "idionet/dataset.hpp"
#include "idionet/neighborhood.hpp"

namespace idionet {

struct PredictionOptions {
  /// Vote assumed for neighbours who did not rate the movie; absent means skip them.
  std::optional<Score> default_vote;
  bool clamp_output = true;
  double weight_sum_epsilon = 1e-9;
  /// Divide by sum |w| instead of the signed sum of weights.
  bool absolute_weight_denominator = false;
};

struct Prediction {
  double value = 0.0;
  bool fallback = false;  ///< true when the user's mean was returned
};

/// p = mean(u) + sum_v w_v (v_i - mean(v)) / sum_v w_v over neighbours contributing a vote.
/// Falls back to mean(u) when nobody contributes or the weight sum is below epsilon.
Prediction predict(const UserProfile& test_user, const Neighborhood& nh, MovieId movie,
                   const PredictionOptions& opts = {});

struct Recommendation {
  MovieId movie = 0;
  double predicted_score = 0.0;
  std::size_t rank = 0;
};

/// Scores every movie any neighbour rated; ranks by descending score, then movie id.
std::vector<Recommendation> recommend(const UserProfile& test_user, const Neighborhood& nh,
                                      const PredictionOptions& opts = {});

}  // namespace idionet
