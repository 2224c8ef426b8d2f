#include "idionet/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "idionet/error.hpp"

namespace idionet {

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  return fmt::format("{}", value);
}

namespace {

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_field(const std::string& text, std::size_t line, std::string_view column) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw DataError(fmt::format("line {}: bad {} value '{}'", line, column, text));
  }
  return value;
}

void write_stat(std::ostream& out, const Stat& s) { out << format_number(s.mean) << ',' << format_number(s.std); }

}  // namespace

void write_results_csv(std::ostream& out, std::span<const PredictionRecord> records) {
  out << kResultsHeader << '\n';
  for (const auto& r : records) {
    out << r.test_user << ',' << r.movie << ',' << format_number(r.actual) << ',' << format_number(r.predicted)
        << ',' << (r.fallback ? 1 : 0) << ',' << r.neighborhood_size << ',' << r.reviewers_seen << ','
        << r.n_recommendations << ',' << r.overlap_count << ',' << optional_number(r.tau) << ','
        << format_number(r.characteristics.mean_abs_corr_to_test) << ','
        << format_number(r.characteristics.mean_inter_neighbor_abs_corr) << '\n';
  }
}

std::vector<PredictionRecord> read_results_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  const auto expected = split(kResultsHeader);
  if (table.header != expected) throw DataError("results CSV header does not match the expected columns");

  std::vector<PredictionRecord> records;
  records.reserve(table.rows.size());
  std::size_t line = 1;
  for (const auto& row : table.rows) {
    ++line;
    PredictionRecord r;
    r.test_user = parse_field<UserId>(row[0], line, "test_user");
    r.movie = parse_field<MovieId>(row[1], line, "movie");
    r.actual = parse_field<double>(row[2], line, "actual");
    r.predicted = parse_field<double>(row[3], line, "predicted");
    r.fallback = parse_field<int>(row[4], line, "fallback") != 0;
    r.neighborhood_size = parse_field<std::size_t>(row[5], line, "neighbors");
    r.reviewers_seen = parse_field<std::size_t>(row[6], line, "reviewers");
    r.n_recommendations = parse_field<std::size_t>(row[7], line, "recs");
    r.overlap_count = parse_field<std::size_t>(row[8], line, "overlap");
    if (!row[9].empty()) r.tau = parse_field<double>(row[9], line, "tau");
    r.characteristics.size = r.neighborhood_size;
    r.characteristics.overlap_count = r.overlap_count;
    r.characteristics.mean_abs_corr_to_test = parse_field<double>(row[10], line, "mean_corr");
    r.characteristics.mean_inter_neighbor_abs_corr = parse_field<double>(row[11], line, "inter_corr");
    records.push_back(r);
  }
  return records;
}

void write_neighborhood_csv(std::ostream& out, const Neighborhood& nh, bool header) {
  if (header) out << "test_user,neighbor_user,r,concentration,weight,method\n";
  for (const auto& e : nh.entries) {
    out << nh.test_user.id() << ',' << e.id() << ',' << format_number(e.r) << ','
        << optional_number(e.concentration) << ',' << format_number(e.weight) << ',' << to_string(nh.method)
        << '\n';
  }
}

void write_summary_csv(std::ostream& out, const Summary& s) {
  out << "records,fallbacks,errors,mae,mae_std,tau_count,tau_mean,tau_std,recs_mean,recs_std,"
         "overlap_mean,overlap_std,reviewers_mean,reviewers_std,neighbors_mean,neighbors_std,"
         "mean_corr_mean,mean_corr_std,inter_corr_mean,inter_corr_std\n";
  out << s.records << ',' << s.fallbacks << ',' << s.errors << ',';
  write_stat(out, s.abs_error);
  out << ',' << (s.tau ? s.tau->count : 0) << ',';
  if (s.tau) {
    write_stat(out, *s.tau);
  } else {
    out << ',';
  }
  for (const Stat* st : {&s.recommendations, &s.overlap, &s.reviewers, &s.neighbors, &s.mean_corr, &s.inter_corr}) {
    out << ',';
    write_stat(out, *st);
  }
  out << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  out << "param,value,repeat,mae,tau_mean,recs_mean,overlap_mean,neighbors_mean,reviewers_mean,"
         "mae_std,tau_std,recs_std,overlap_std,neighbors_std,reviewers_std,"
         "mean_corr_mean,inter_corr_mean,tau_count,fallbacks,errors\n";
  for (const auto& run : table.runs) {
    const Summary& s = run.summary;
    out << to_string(table.param) << ',' << format_number(run.value) << ',' << run.repeat << ','
        << format_number(s.mae()) << ',' << (s.tau ? format_number(s.tau->mean) : std::string()) << ','
        << format_number(s.recommendations.mean) << ',' << format_number(s.overlap.mean) << ','
        << format_number(s.neighbors.mean) << ',' << format_number(s.reviewers.mean) << ','
        << format_number(s.abs_error.std) << ',' << (s.tau ? format_number(s.tau->std) : std::string()) << ','
        << format_number(s.recommendations.std) << ',' << format_number(s.overlap.std) << ','
        << format_number(s.neighbors.std) << ',' << format_number(s.reviewers.std) << ','
        << format_number(s.mean_corr.mean) << ',' << format_number(s.inter_corr.mean) << ','
        << (s.tau ? s.tau->count : 0) << ',' << s.fallbacks << ',' << s.errors << '\n';
  }
}

void write_sweep_summary_csv(std::ostream& out, const SweepTable& table) {
  out << "param,value,runs,mae_mean,mae_std,tau_mean,tau_std,recs_mean,recs_std,overlap_mean,overlap_std,"
         "neighbors_mean,neighbors_std,reviewers_mean,reviewers_std,mean_corr_mean,mean_corr_std,"
         "inter_corr_mean,inter_corr_std\n";
  for (const auto& c : table.cells) {
    out << to_string(table.param) << ',' << format_number(c.value) << ',' << c.runs;
    for (const Stat* st : {&c.mae, &c.tau, &c.recommendations, &c.overlap, &c.neighbors, &c.reviewers,
                           &c.mean_corr, &c.inter_corr}) {
      out << ',';
      if (st->count) {
        write_stat(out, *st);
      } else {
        out << ',';
      }
    }
    out << '\n';
  }
}

void write_swap_records_csv(std::ostream& out, const SwapResult& result) {
  out << "regime_predictor,regime_neighborhood,test_user,movie,actual,predicted,tau,fallback,neighbors,"
         "reviewers,recs,overlap,mean_corr,inter_corr\n";
  for (const auto& regime : result.regimes) {
    for (const auto& r : regime.records) {
      out << to_string(regime.predictor) << ',' << to_string(regime.neighborhood) << ',' << r.test_user << ','
          << r.movie << ',' << format_number(r.actual) << ',' << format_number(r.predicted) << ','
          << optional_number(r.tau) << ',' << (r.fallback ? 1 : 0) << ',' << r.neighborhood_size << ','
          << r.reviewers_seen << ',' << r.n_recommendations << ',' << r.overlap_count << ','
          << format_number(r.characteristics.mean_abs_corr_to_test) << ','
          << format_number(r.characteristics.mean_inter_neighbor_abs_corr) << '\n';
    }
  }
}

void write_comparisons_csv(std::ostream& out, const SwapResult& result) {
  out << "metric,pred1,nh1,pred2,nh2,median1,median2,n,wplus,wminus,p\n";
  for (const auto& c : result.comparisons) {
    out << c.metric << ',' << to_string(c.pred1) << ',' << to_string(c.nh1) << ',' << to_string(c.pred2) << ','
        << to_string(c.nh2) << ',' << optional_number(c.median1) << ',' << optional_number(c.median2) << ',';
    if (c.test) {
      out << c.test->n_effective << ',' << format_number(c.test->w_plus) << ',' << format_number(c.test->w_minus)
          << ',' << optional_number(c.test->p_two_sided);
    } else {
      out << "0,0,0,";
    }
    out << '\n';
  }
}

void write_characteristics_csv(std::ostream& out, const SwapResult& result) {
  out << "characteristic,mean_sp,mean_ais,n,wplus,wminus,p\n";
  for (const auto& c : result.characteristics) {
    out << c.characteristic << ',' << format_number(c.mean_sp) << ',' << format_number(c.mean_ais) << ',';
    if (c.test) {
      out << c.test->n_effective << ',' << format_number(c.test->w_plus) << ',' << format_number(c.test->w_minus)
          << ',' << optional_number(c.test->p_two_sided);
    } else {
      out << "0,0,0,";
    }
    out << '\n';
  }
}

void write_membership_csv(std::ostream& out, const SwapResult& result) {
  out << "test_user,sp_size,ais_size,common,unique_sp,unique_ais\n";
  for (const auto& m : result.membership) {
    out << m.test_user << ',' << m.sp_size << ',' << m.ais_size << ',' << m.membership.common << ','
        << m.membership.unique_first << ',' << m.membership.unique_second << '\n';
  }
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(fmt::format("line {}: expected {} fields, found {}", line_no, table.header.size(),
                                  fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw DataError("CSV input has no header row");
  return table;
}

}  // namespace idionet
