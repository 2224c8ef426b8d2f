#pragma once

#include <cstddef>
#include <vector>

#include "idionet/dataset.hpp"

namespace idionet {

struct SimilarityParams {
  /// Correlations over fewer than this many shared votes are scaled by n / P.
  int overlap_penalty = 100;
  double no_overlap_default = 0.0;
  double zero_variance_default = 0.0;

  /// Throws PreconditionError if overlap_penalty < 1.
  void validate() const;
};

/// Sorted movie ids rated by both users.
std::vector<MovieId> overlap(const UserProfile& u, const UserProfile& v);
std::size_t overlap_size(const UserProfile& u, const UserProfile& v) noexcept;

/// Pearson correlation over the shared votes, centred on each user's mean over *all*
/// of their votes, then amended in order: no overlap gives no_overlap_default, zero
/// variance over the overlap gives zero_variance_default (both unscaled), and n < P
/// scales the correlation by n / P. Symmetric; the result lies in [-1, 1].
///
/// Throws PreconditionError if either profile is empty.
double pearson_amended(const UserProfile& u, const UserProfile& v, const SimilarityParams& params = {});

}  // namespace idionet
