#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "idionet/dataset.hpp"
#include "idionet/error.hpp"
#include "idionet/similarity.hpp"
#include "support.hpp"

namespace idionet {
namespace {

using testing::profile;

Dataset parse(const std::string& text, VoteFormat format = VoteFormat::kRaw0To5) {
  std::istringstream in(text);
  return load_votes(in, format);
}

TEST(ScoreTest, LevelsMapToSixValues) {
  EXPECT_DOUBLE_EQ(Score::from_level(4).value(), 0.8);
  EXPECT_EQ(Score::from_value(0.6).level(), 3);
  EXPECT_EQ(Score::from_level(5).normalized_text(), "1");
  EXPECT_EQ(Score::from_level(1).normalized_text(), "0.2");
  EXPECT_FALSE(Score::try_from_value(0.5));
  EXPECT_FALSE(Score::try_from_value(1.2));
  EXPECT_THROW(Score::from_level(6), PreconditionError);
  EXPECT_THROW(Score::from_level(-1), PreconditionError);
}

TEST(LoadVotesTest, RawAndNormalizedAgree) {
  const Dataset raw = parse("7,42,4\n");
  const Dataset norm = parse("7,42,0.8\n", VoteFormat::kNormalized);
  ASSERT_EQ(raw.users().size(), 1u);
  EXPECT_EQ(raw.users()[0].id(), 7u);
  EXPECT_DOUBLE_EQ(raw.users()[0].find(42)->value(), 0.8);
  EXPECT_EQ(raw, norm);
}

TEST(LoadVotesTest, SkipsCommentsAndBlankLines) {
  const Dataset d = parse("# header\n\n1,2,3\n  \n1,3,5\r\n2,2,0\n");
  EXPECT_EQ(d.users().size(), 2u);
  EXPECT_EQ(d.vote_count(), 3u);
  EXPECT_EQ(std::vector<MovieId>(d.movie_ids().begin(), d.movie_ids().end()), (std::vector<MovieId>{2, 3}));
}

TEST(LoadVotesTest, RejectsMalformedInput) {
  const auto message = [](const std::string& text, VoteFormat f = VoteFormat::kRaw0To5) {
    try {
      parse(text, f);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("7,42,7\n").find("out of range"), std::string::npos);
  EXPECT_NE(message("1,1,1\n7,42,7\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("1,1\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("1,1,1,1\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("a,1,1\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("1,1,2.5\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("1,1,0.5\n", VoteFormat::kNormalized).find("line 1"), std::string::npos);
  EXPECT_NE(message("1,5,1\n1,5,2\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("0,5,1\n").find("line 1"), std::string::npos);
}

TEST(LoadVotesTest, MissingFileNamesPath) {
  try {
    load_votes(std::filesystem::path("/nonexistent/votes.csv"), VoteFormat::kRaw0To5);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/votes.csv"), std::string::npos);
  }
}

TEST(LoadVotesTest, RoundTripsThroughBothFormats) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    SyntheticParams p;
    p.users = 30;
    p.movies = 25;
    p.clusters = 3;
    p.sparsity = 0.3;
    const Dataset d = generate_synthetic(p, rng);
    for (auto f : {VoteFormat::kRaw0To5, VoteFormat::kNormalized}) {
      std::stringstream s;
      write_votes(s, d, f);
      EXPECT_EQ(load_votes(s, f), d);
    }
  }
}

TEST(FormatTest, ParsesNames) {
  EXPECT_EQ(parse_vote_format("raw0to5"), VoteFormat::kRaw0To5);
  EXPECT_EQ(parse_vote_format("normalized"), VoteFormat::kNormalized);
  EXPECT_FALSE(parse_vote_format("csv"));
  EXPECT_EQ(to_string(VoteFormat::kNormalized), "normalized");
}

TEST(MeanVoteTest, UsesEveryVote) {
  EXPECT_NEAR(mean_vote(profile(1, {{1, 1}, {2, 2}, {3, 3}})), 0.4, 1e-12);
  EXPECT_DOUBLE_EQ(mean_vote(profile(1, {{1, 5}})), 1.0);
  EXPECT_DOUBLE_EQ(mean_vote(profile(1, {{1, 0}, {2, 5}, {3, 5}, {4, 5}})), 0.75);
  EXPECT_THROW(mean_vote(UserProfile(1, {})), PreconditionError);
}

TEST(ProfileTest, RejectsDuplicatesAndSorts) {
  EXPECT_THROW(profile(1, {{3, 1}, {3, 2}}), DataError);
  const auto p = profile(1, {{9, 1}, {2, 2}});
  EXPECT_EQ(p.votes()[0].movie, 2u);
  EXPECT_EQ(p.level_sum(), 3);
  EXPECT_THROW(Dataset({profile(4, {{1, 1}}), profile(4, {{2, 1}})}), DataError);
}

Dataset small_dataset(std::size_t users, std::size_t votes_each) {
  std::vector<UserProfile> v;
  for (UserId u = 1; u <= users; ++u) {
    std::vector<Vote> votes;
    for (MovieId m = 1; m <= votes_each; ++m) votes.push_back({m, Score::from_level(static_cast<int>(m % 6))});
    v.emplace_back(u, std::move(votes));
  }
  return Dataset(std::move(v));
}

TEST(SampleTest, ExhaustiveSampleReturnsEveryone) {
  const Dataset d = small_dataset(10, 3);
  Rng rng(5);
  auto s = sample_test_users(d, 10, 2, rng);
  std::set<UserId> ids;
  for (const auto* p : s) ids.insert(p->id());
  EXPECT_EQ(ids.size(), 10u);
}

TEST(SampleTest, DeterministicAndRespectsEligibility) {
  std::vector<UserProfile> users;
  for (UserId u = 1; u <= 100; ++u) {
    users.push_back(u % 2 ? profile(u, {{1, 1}, {2, 2}}) : profile(u, {{1, 1}}));
  }
  const Dataset d(std::move(users));
  Rng a(11), b(11);
  const auto s1 = sample_test_users(d, 3, 2, a);
  const auto s2 = sample_test_users(d, 3, 2, b);
  EXPECT_EQ(s1, s2);
  for (const auto* p : s1) EXPECT_GE(p->size(), 2u);
  Rng c(1);
  EXPECT_NO_THROW(sample_test_users(d, 50, 2, c));
  try {
    sample_test_users(d, 51, 2, c);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
  EXPECT_THROW(sample_test_users(d, 0, 2, c), PreconditionError);
  EXPECT_THROW(sample_test_users(d, 1, 1, c), PreconditionError);
}

TEST(ReserveVoteTest, PartitionsTheProfile) {
  const auto p = profile(3, {{1, 2}, {2, 4}});
  Rng a(9), b(9);
  const auto t1 = reserve_vote(p, a);
  const auto t2 = reserve_vote(p, b);
  EXPECT_EQ(t1.reserved, t2.reserved);
  EXPECT_EQ(t1.original_user_id, 3u);
  ASSERT_EQ(t1.training_user.size(), 1u);
  EXPECT_NE(t1.training_user.votes()[0].movie, t1.reserved.movie);
  EXPECT_THROW(reserve_vote(profile(3, {{1, 2}}), a), PreconditionError);
}

TEST(ReserveVoteTest, TrainingPlusReservedIsOriginal) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = testing::random_profile(1, rng, 30, 2, 30);
    const auto t = reserve_vote(p, rng);
    EXPECT_FALSE(t.training_user.has_vote(t.reserved.movie));
    std::vector<Vote> all(t.training_user.votes().begin(), t.training_user.votes().end());
    all.push_back(t.reserved);
    EXPECT_EQ(UserProfile(p.id(), all), p);
  }
}

TEST(ReserveVoteTest, ChoosesUniformly) {
  const auto p = profile(1, {{1, 0}, {2, 1}, {3, 2}, {4, 3}});
  Rng rng(3);
  std::array<int, 5> counts{};
  for (int i = 0; i < 4000; ++i) ++counts[reserve_vote(p, rng).reserved.movie];
  for (int m = 1; m <= 4; ++m) EXPECT_NEAR(counts[m], 1000, 120);
}

TEST(SyntheticTest, DegenerateGeneratorGivesIdenticalProfiles) {
  Rng rng(4);
  const Dataset d = generate_synthetic({.users = 8, .movies = 12, .clusters = 1, .sparsity = 1.0, .noise = 0.0}, rng);
  ASSERT_EQ(d.users().size(), 8u);
  for (const auto& u : d.users()) {
    EXPECT_EQ(u.size(), 12u);
    EXPECT_TRUE(std::ranges::equal(u.votes(), d.users()[0].votes()));
  }
}

TEST(SyntheticTest, DeterministicAndShaped) {
  Rng a(42), b(42);
  const SyntheticParams p;
  const Dataset d1 = generate_synthetic(p, a);
  const Dataset d2 = generate_synthetic(p, b);
  EXPECT_EQ(d1, d2);
  EXPECT_EQ(d1.users().size(), 500u);
  for (const auto& u : d1.users()) EXPECT_EQ(u.size(), 50u);
  EXPECT_EQ(d1.users().front().id(), 1u);
  EXPECT_EQ(d1.users().back().id(), 500u);
  Rng bad(1);
  EXPECT_THROW(generate_synthetic({.users = 0}, bad), PreconditionError);
  EXPECT_THROW(generate_synthetic({.movies = 0}, bad), PreconditionError);
  EXPECT_THROW(generate_synthetic({.clusters = 0}, bad), PreconditionError);
  EXPECT_THROW(generate_synthetic({.sparsity = 0.0}, bad), PreconditionError);
  EXPECT_THROW(generate_synthetic({.noise = 1.5}, bad), PreconditionError);
}

// Oracle: mean raw Pearson over all within-cluster and all cross-cluster pairs,
// evaluated directly with the reference formula and no overlap penalty.
TEST(SyntheticTest, WithinClusterCorrelationExceedsCrossCluster) {
  Rng rng(42);
  std::vector<std::size_t> cluster;
  const Dataset d = generate_synthetic(SyntheticParams{}, rng, &cluster);
  ASSERT_EQ(cluster.size(), 500u);
  double within = 0, cross = 0;
  std::size_t nw = 0, nc = 0;
  const auto users = d.users();
  for (std::size_t i = 0; i < users.size(); ++i) {
    for (std::size_t j = i + 1; j < users.size(); ++j) {
      const double r = testing::reference_pearson(users[i], users[j], 1);
      if (cluster[i] == cluster[j]) {
        within += r;
        ++nw;
      } else {
        cross += r;
        ++nc;
      }
    }
  }
  EXPECT_GT(within / nw, cross / nc + 0.3);
}

}  // namespace
}  // namespace idionet
