#include "idionet/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "idionet/error.hpp"

namespace idionet {

namespace {

constexpr std::array<std::string_view, 6> kNormalizedText = {"0", "0.2", "0.4", "0.6", "0.8", "1"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  text = trim(text);
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
  return value;
}

[[noreturn]] void fail_line(std::size_t line, std::string_view what) {
  throw DataError(fmt::format("line {}: {}", line, what));
}

}  // namespace

Score Score::from_level(int level) {
  if (level < 0 || level > kMaxLevel) {
    throw PreconditionError(fmt::format("score level {} outside 0..{}", level, kMaxLevel));
  }
  return Score(static_cast<std::uint8_t>(level));
}

std::optional<Score> Score::try_from_value(double value) {
  if (!std::isfinite(value)) return std::nullopt;
  const double scaled = value * kMaxLevel;
  const double nearest = std::round(scaled);
  if (nearest < 0 || nearest > kMaxLevel || std::abs(scaled - nearest) > 5e-9) return std::nullopt;
  return Score(static_cast<std::uint8_t>(nearest));
}

Score Score::from_value(double value) {
  if (auto score = try_from_value(value)) return *score;
  throw PreconditionError(fmt::format("{} is not a quantised score", value));
}

std::string_view Score::normalized_text() const noexcept { return kNormalizedText[level_]; }

UserProfile::UserProfile(UserId id, std::vector<Vote> votes) : id_(id), votes_(std::move(votes)) {
  std::sort(votes_.begin(), votes_.end(),
            [](const Vote& a, const Vote& b) { return a.movie < b.movie; });
  const auto dup = std::adjacent_find(votes_.begin(), votes_.end(),
                                      [](const Vote& a, const Vote& b) { return a.movie == b.movie; });
  if (dup != votes_.end()) {
    throw DataError(fmt::format("user {} has more than one vote on movie {}", id_, dup->movie));
  }
  for (const Vote& v : votes_) level_sum_ += v.score.level();
}

std::optional<Score> UserProfile::find(MovieId movie) const noexcept {
  const auto it = std::lower_bound(votes_.begin(), votes_.end(), movie,
                                   [](const Vote& v, MovieId m) { return v.movie < m; });
  if (it == votes_.end() || it->movie != movie) return std::nullopt;
  return it->score;
}

double mean_vote(const UserProfile& profile) {
  if (profile.empty()) {
    throw PreconditionError(fmt::format("mean vote of user {} is undefined: no votes", profile.id()));
  }
  return static_cast<double>(profile.level_sum()) /
         (static_cast<double>(Score::kMaxLevel) * static_cast<double>(profile.size()));
}

Dataset::Dataset(std::vector<UserProfile> users) : users_(std::move(users)) {
  std::sort(users_.begin(), users_.end(),
            [](const UserProfile& a, const UserProfile& b) { return a.id() < b.id(); });
  const auto dup = std::adjacent_find(
      users_.begin(), users_.end(),
      [](const UserProfile& a, const UserProfile& b) { return a.id() == b.id(); });
  if (dup != users_.end()) throw DataError(fmt::format("duplicate user id {}", dup->id()));

  for (const auto& u : users_) {
    for (const Vote& v : u.votes()) movie_ids_.push_back(v.movie);
  }
  std::sort(movie_ids_.begin(), movie_ids_.end());
  movie_ids_.erase(std::unique(movie_ids_.begin(), movie_ids_.end()), movie_ids_.end());
}

const UserProfile* Dataset::find(UserId id) const noexcept {
  const auto it = std::lower_bound(users_.begin(), users_.end(), id,
                                   [](const UserProfile& u, UserId i) { return u.id() < i; });
  return (it != users_.end() && it->id() == id) ? &*it : nullptr;
}

std::size_t Dataset::vote_count() const noexcept {
  return std::accumulate(users_.begin(), users_.end(), std::size_t{0},
                         [](std::size_t acc, const UserProfile& u) { return acc + u.size(); });
}

std::optional<VoteFormat> parse_vote_format(std::string_view text) {
  if (text == "raw0to5") return VoteFormat::kRaw0To5;
  if (text == "normalized") return VoteFormat::kNormalized;
  return std::nullopt;
}

std::string_view to_string(VoteFormat format) {
  return format == VoteFormat::kRaw0To5 ? "raw0to5" : "normalized";
}

Dataset load_votes(std::istream& in, VoteFormat format) {
  std::map<UserId, std::vector<Vote>> rows;
  std::map<std::pair<UserId, MovieId>, std::size_t> seen;
  std::string raw_line;
  std::size_t line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    const std::string_view line = trim(raw_line);
    if (line.empty() || line.front() == '#') continue;

    std::array<std::string_view, 3> fields;
    std::size_t start = 0;
    std::size_t count = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      if (count == fields.size()) fail_line(line_no, "expected 3 comma-separated fields");
      fields[count++] = line.substr(start, comma == std::string_view::npos ? comma : comma - start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (count != fields.size()) fail_line(line_no, "expected 3 comma-separated fields");

    const auto user = parse_number<UserId>(fields[0]);
    const auto movie = parse_number<MovieId>(fields[1]);
    if (!user || *user == 0) fail_line(line_no, fmt::format("bad user id '{}'", fields[0]));
    if (!movie || *movie == 0) fail_line(line_no, fmt::format("bad movie id '{}'", fields[1]));

    Score score;
    if (format == VoteFormat::kRaw0To5) {
      const auto level = parse_number<int>(fields[2]);
      if (!level) fail_line(line_no, fmt::format("bad score '{}'", trim(fields[2])));
      if (*level < 0 || *level > Score::kMaxLevel) {
        fail_line(line_no, fmt::format("score {} out of range 0..5", *level));
      }
      score = Score::from_level(*level);
    } else {
      const auto value = parse_number<double>(fields[2]);
      if (!value) fail_line(line_no, fmt::format("bad score '{}'", trim(fields[2])));
      const auto quantised = Score::try_from_value(*value);
      if (!quantised) {
        fail_line(line_no, fmt::format("score {} out of range: not one of 0,0.2,...,1", *value));
      }
      score = *quantised;
    }

    const auto [it, inserted] = seen.emplace(std::pair{*user, *movie}, line_no);
    if (!inserted) {
      fail_line(line_no, fmt::format("duplicate vote for user {} movie {} (first on line {})", *user,
                                     *movie, it->second));
    }
    rows[*user].push_back(Vote{*movie, score});
  }
  if (in.bad()) throw DataError("read error while loading votes");

  std::vector<UserProfile> users;
  users.reserve(rows.size());
  for (auto& [id, votes] : rows) users.emplace_back(id, std::move(votes));
  return Dataset(std::move(users));
}

Dataset load_votes(const std::filesystem::path& path, VoteFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open vote file '{}'", path.string()));
  try {
    return load_votes(in, format);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_votes(std::ostream& out, const Dataset& dataset, VoteFormat format) {
  for (const auto& user : dataset.users()) {
    for (const Vote& v : user.votes()) {
      if (format == VoteFormat::kRaw0To5) {
        out << user.id() << ',' << v.movie << ',' << v.score.level() << '\n';
      } else {
        out << user.id() << ',' << v.movie << ',' << v.score.normalized_text() << '\n';
      }
    }
  }
}

std::vector<const UserProfile*> sample_test_users(const Dataset& dataset, std::size_t count,
                                                  std::size_t min_votes, Rng& rng) {
  if (count < 1) throw PreconditionError("test user count must be at least 1");
  if (min_votes < 2) throw PreconditionError("test users need at least 2 votes");

  std::vector<const UserProfile*> eligible;
  for (const auto& u : dataset.users()) {
    if (u.size() >= min_votes) eligible.push_back(&u);
  }
  if (eligible.size() < count) {
    throw PreconditionError(fmt::format("requested {} test users but only {} have >= {} votes ({} short)",
                                        count, eligible.size(), min_votes, count - eligible.size()));
  }
  partial_shuffle(std::span(eligible), count, rng);
  eligible.resize(count);
  return eligible;
}

TestCase reserve_vote(const UserProfile& profile, Rng& rng) {
  if (profile.size() < 2) {
    throw PreconditionError(
        fmt::format("user {} has {} vote(s); reserving one needs at least 2", profile.id(), profile.size()));
  }
  const auto votes = profile.votes();
  const std::size_t hidden = uniform_index(rng, votes.size());
  std::vector<Vote> remaining;
  remaining.reserve(votes.size() - 1);
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (i != hidden) remaining.push_back(votes[i]);
  }
  return TestCase{UserProfile(profile.id(), std::move(remaining)), votes[hidden], profile.id()};
}

Dataset generate_synthetic(const SyntheticParams& params, Rng& rng,
                           std::vector<std::size_t>* cluster_of_user) {
  if (params.users == 0 || params.movies == 0) {
    throw PreconditionError("synthetic dataset needs at least one user and one movie");
  }
  if (params.clusters < 1) throw PreconditionError("synthetic dataset needs at least one cluster");
  if (!(params.sparsity > 0.0 && params.sparsity <= 1.0)) {
    throw PreconditionError("sparsity must lie in (0, 1]");
  }
  if (!(params.noise >= 0.0 && params.noise <= 1.0)) throw PreconditionError("noise must lie in [0, 1]");

  constexpr std::size_t kLevels = Score::kMaxLevel + 1;
  std::vector<std::vector<int>> preference(params.clusters, std::vector<int>(params.movies));
  for (auto& cluster : preference) {
    for (int& level : cluster) level = static_cast<int>(uniform_index(rng, kLevels));
  }

  const auto per_user = std::min<std::size_t>(
      params.movies,
      static_cast<std::size_t>(std::ceil(params.sparsity * static_cast<double>(params.movies) - 1e-9)));

  std::vector<MovieId> movie_pool(params.movies);
  std::iota(movie_pool.begin(), movie_pool.end(), MovieId{1});

  if (cluster_of_user) cluster_of_user->assign(params.users, 0);
  std::vector<UserProfile> users;
  users.reserve(params.users);
  for (std::size_t u = 0; u < params.users; ++u) {
    const std::size_t cluster = uniform_index(rng, params.clusters);
    if (cluster_of_user) (*cluster_of_user)[u] = cluster;
    partial_shuffle(std::span(movie_pool), per_user, rng);
    std::vector<Vote> votes;
    votes.reserve(per_user);
    for (std::size_t k = 0; k < per_user; ++k) {
      const MovieId movie = movie_pool[k];
      int level = preference[cluster][movie - 1];
      if (uniform_unit(rng) < params.noise) level = static_cast<int>(uniform_index(rng, kLevels));
      votes.push_back(Vote{movie, Score::from_level(level)});
    }
    users.emplace_back(static_cast<UserId>(u + 1), std::move(votes));
  }
  return Dataset(std::move(users));
}

}  // namespace idionet
