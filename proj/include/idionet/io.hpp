#pragma once

// CSV writers and readers for experiment artefacts. Numbers use the shortest
// round-trip decimal form so output is byte-stable for a given result.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idionet/eval.hpp"
#include "idionet/harness.hpp"
#include "idionet/neighborhood.hpp"

namespace idionet {

std::string format_number(double value);

inline constexpr std::string_view kResultsHeader =
    "test_user,movie,actual,predicted,fallback,neighbors,reviewers,recs,overlap,tau,mean_corr,inter_corr";

void write_results_csv(std::ostream& out, std::span<const PredictionRecord> records);
/// Inverse of write_results_csv (error messages are not persisted). Throws DataError.
std::vector<PredictionRecord> read_results_csv(std::istream& in);

void write_neighborhood_csv(std::ostream& out, const Neighborhood& nh, bool header = true);

void write_summary_csv(std::ostream& out, const Summary& summary);

void write_sweep_csv(std::ostream& out, const SweepTable& table);
void write_sweep_summary_csv(std::ostream& out, const SweepTable& table);

void write_swap_records_csv(std::ostream& out, const SwapResult& result);
void write_comparisons_csv(std::ostream& out, const SwapResult& result);
void write_characteristics_csv(std::ostream& out, const SwapResult& result);
void write_membership_csv(std::ostream& out, const SwapResult& result);

/// Minimal comma-separated table with a header row; no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Throws DataError on ragged rows or a missing header.
CsvTable read_csv(std::istream& in);

}  // namespace idionet
