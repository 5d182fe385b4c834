#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "data.hpp"
#include "error.hpp"
#include "helpers.hpp"

using namespace pslf;

TEST_CASE("parse_ratings handles the ML-1M line format") {
  std::istringstream in("1::1193::5::978300760\n");
  const auto tuples = parse_ratings(in, FormatSpec::ml1m());
  REQUIRE(tuples.size() == 1);
  CHECK(tuples[0].user == "1");
  CHECK(tuples[0].item == "1193");
  CHECK(tuples[0].rating == 5.0);
}

TEST_CASE("parse_ratings on an empty stream yields an empty list") {
  std::istringstream in("");
  CHECK(parse_ratings(in, FormatSpec::csv()).empty());
}

TEST_CASE("parse_ratings rejects a non-numeric rating with the line number") {
  std::istringstream in("a,b,x\n");
  CHECK_THROWS_WITH_AS(parse_ratings(in, FormatSpec::csv()),
                       doctest::Contains("line 1"), DataError);
}

TEST_CASE("parse_ratings reports the offending line for short rows") {
  std::istringstream in("1,2,3\n4,5\n");
  CHECK_THROWS_WITH_AS(parse_ratings(in, FormatSpec::csv()),
                       doctest::Contains("line 2"), DataError);
}

TEST_CASE("parse_ratings handles CRLF line endings") {
  std::istringstream in("7,9,2.5\r\n8,9,3\r\n");
  const auto tuples = parse_ratings(in, FormatSpec::csv());
  REQUIRE(tuples.size() == 2);
  CHECK(tuples[0].rating == 2.5);
  CHECK(tuples[1].user == "8");
}

TEST_CASE("parse_ratings ignores extra columns and header when asked") {
  std::istringstream in("user\titem\trating\n7\t9\t2.5\textra\n");
  FormatSpec fmt = FormatSpec::tsv();
  fmt.skip_header = true;
  const auto tuples = parse_ratings(in, fmt);
  REQUIRE(tuples.size() == 1);
  CHECK(tuples[0].rating == 2.5);
}

TEST_CASE("FormatSpec::parse understands the delim clause") {
  const FormatSpec fmt = FormatSpec::parse("delim=|;cols=2,0,1;header");
  CHECK(fmt.delimiter == "|");
  CHECK(fmt.user_col == 2);
  CHECK(fmt.item_col == 0);
  CHECK(fmt.rating_col == 1);
  CHECK(fmt.skip_header);
  CHECK_THROWS_AS(FormatSpec::parse("nope"), ConfigError);
}

TEST_CASE("build_hdi assigns dense ids in first-appearance order") {
  const std::vector<RatingTuple> tuples{
      {"u1", "i1", 5.0}, {"u1", "i2", 3.0}, {"u2", "i1", 4.0}};
  const HdiMatrix m = build_hdi(tuples);
  CHECK(m.num_users() == 2);
  CHECK(m.num_items() == 2);
  CHECK(m.num_entries() == 3);
  CHECK(m.user_ids() == std::vector<std::string>{"u1", "u2"});
  CHECK(m.item_ids() == std::vector<std::string>{"i1", "i2"});

  // K_u1 = {e0, e1}, K_u2 = {e2}, K_i1 = {e0, e2}, K_i2 = {e1}
  const auto ku1 = m.user_entries(0);
  REQUIRE(ku1.size() == 2);
  CHECK(ku1[0] == 0);
  CHECK(ku1[1] == 1);
  REQUIRE(m.user_entries(1).size() == 1);
  CHECK(m.user_entries(1)[0] == 2);
  const auto ki1 = m.item_entries(0);
  REQUIRE(ki1.size() == 2);
  CHECK(ki1[0] == 0);
  CHECK(ki1[1] == 2);
  REQUIRE(m.item_entries(1).size() == 1);
  CHECK(m.item_entries(1)[0] == 1);
}

TEST_CASE("build_hdi singleton") {
  const std::vector<RatingTuple> tuples{{"a", "b", 1.5}};
  const HdiMatrix m = build_hdi(tuples);
  CHECK(m.num_users() == 1);
  CHECK(m.num_items() == 1);
  CHECK(m.num_entries() == 1);
}

TEST_CASE("build_hdi rejects duplicate pairs naming the pair") {
  const std::vector<RatingTuple> tuples{
      {"u1", "i1", 5.0}, {"u2", "i1", 3.0}, {"u1", "i1", 4.0}};
  CHECK_THROWS_WITH_AS(build_hdi(tuples), doctest::Contains("(u1,i1)"),
                       DataError);
}

TEST_CASE("build_hdi rejects empty input") {
  CHECK_THROWS_AS(build_hdi({}), DataError);
}

TEST_CASE("adjacency round-trips the entry multiset") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testutil::random_instance(rng);
    std::set<std::uint32_t> seen;
    for (std::size_t u = 0; u < inst.matrix.num_users(); ++u) {
      for (const auto k : inst.matrix.user_entries(u)) {
        CHECK(inst.matrix.entry(k).user == u);
        CHECK(seen.insert(k).second);
      }
    }
    CHECK(seen.size() == inst.matrix.num_entries());

    std::size_t total = 0;
    for (std::size_t i = 0; i < inst.matrix.num_items(); ++i) {
      for (const auto k : inst.matrix.item_entries(i)) {
        CHECK(inst.matrix.entry(k).item == i);
      }
      total += inst.matrix.item_degree(i);
    }
    CHECK(total == inst.matrix.num_entries());
  }
}

TEST_CASE("partition splits 10 entries as (6,2,2)") {
  std::vector<Entry> entries;
  for (std::uint32_t k = 0; k < 10; ++k) entries.push_back({k, 0, 1.0});
  const HdiMatrix m(10, 1, std::move(entries));
  const Partition part = make_partition(m, {0.6, 0.2, 0.2}, 7);
  CHECK(part.train.num_entries() == 6);
  CHECK(part.validation.size() == 2);
  CHECK(part.test.size() == 2);
}

TEST_CASE("partition cut points at benchmark size") {
  // 1,000,290 entries at 60/20/20 must land exactly on the floor rule.
  std::vector<Entry> entries;
  entries.reserve(1000290);
  for (std::uint32_t k = 0; k < 1000290; ++k) {
    entries.push_back({k / 1000, k % 1000, 1.0});
  }
  const HdiMatrix m(1001, 1000, std::move(entries));
  const Partition part = make_partition(m, {0.6, 0.2, 0.2}, 1);
  CHECK(part.train.num_entries() == 600174);
  CHECK(part.validation.size() == 200058);
  CHECK(part.test.size() == 200058);
}

TEST_CASE("partition is deterministic for a fixed seed") {
  const HdiMatrix m = testutil::rank_k_dataset(12, 9, 2, 0.5, 3);
  const Partition a = make_partition(m, {0.6, 0.2, 0.2}, 7);
  const Partition b = make_partition(m, {0.6, 0.2, 0.2}, 7);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.validation_indices == b.validation_indices);
  CHECK(a.test_indices == b.test_indices);
}

TEST_CASE("partition rejects non-positive ratios") {
  const HdiMatrix m = testutil::instance_a_matrix();
  CHECK_THROWS_AS(make_partition(m, {1.0, 0.0, 0.0}, 1), ConfigError);
  CHECK_THROWS_AS(make_partition(m, {0.7, 0.4, -0.1}, 1), ConfigError);
}

TEST_CASE("partition disjointness and coverage hold for random inputs") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = testutil::random_instance(rng);
    const double a = 0.1 + rng.uniform(0.0, 0.5);
    const double b = 0.05 + rng.uniform(0.0, (1.0 - a) * 0.8);
    const SplitRatios ratios{a, b, 1.0 - a - b};
    const Partition part = make_partition(inst.matrix, ratios, rng.next());

    std::set<std::uint32_t> all;
    for (const auto k : part.train_indices) CHECK(all.insert(k).second);
    for (const auto k : part.validation_indices) CHECK(all.insert(k).second);
    for (const auto k : part.test_indices) CHECK(all.insert(k).second);
    CHECK(all.size() == inst.matrix.num_entries());
    CHECK(*all.rbegin() == inst.matrix.num_entries() - 1);

    const auto n = static_cast<double>(inst.matrix.num_entries());
    CHECK(std::abs(static_cast<double>(part.train.num_entries()) - ratios.train * n) <= 1.0);
    CHECK(std::abs(static_cast<double>(part.validation.size()) - ratios.validation * n) <= 1.0);
    CHECK(std::abs(static_cast<double>(part.test.size()) - ratios.test * n) <= 1.0);
  }
}

TEST_CASE("partition train matrix keeps source dimensions and entries") {
  const HdiMatrix m = testutil::rank_k_dataset(8, 6, 2, 0.6, 5);
  const Partition part = make_partition(m, {0.6, 0.2, 0.2}, 11);
  CHECK(part.train.num_users() == m.num_users());
  CHECK(part.train.num_items() == m.num_items());
  for (std::size_t k = 0; k < part.train_indices.size(); ++k) {
    const Entry& source = m.entry(part.train_indices[k]);
    const Entry& got = part.train.entry(k);
    CHECK(got.user == source.user);
    CHECK(got.item == source.item);
    CHECK(got.rating == source.rating);
  }
}

TEST_CASE("density") {
  CHECK(density(testutil::instance_a_matrix()) == doctest::Approx(0.75));
  // Published dataset shapes, pure arithmetic (no files needed).
  CHECK(1000290.0 / (6040.0 * 3952.0) == doctest::Approx(0.0419).epsilon(0.01));
  CHECK(1028751.0 / (1820.0 * 35196.0) == doctest::Approx(0.0161).epsilon(0.01));
}
