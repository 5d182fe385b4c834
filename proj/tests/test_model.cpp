#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "error.hpp"
#include "helpers.hpp"
#include "model.hpp"
#include "oracle.hpp"

using namespace pslf;

TEST_CASE("init_latent draws from [0, 0.04) and is seed-deterministic") {
  const LatentState a = init_latent(13, 9, 20, 42);
  const LatentState b = init_latent(13, 9, 20, 42);
  const LatentState c = init_latent(13, 9, 20, 43);
  CHECK(a.values().size() == (13 + 9) * 20);
  for (const double x : a.values()) {
    CHECK(x >= 0.0);
    CHECK(x < 0.04);
  }
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST_CASE("f = 0 is a config error") {
  CHECK_THROWS_AS(init_latent(2, 2, 0, 1), ConfigError);
}

TEST_CASE("predict on the worked instance") {
  const auto state = testutil::instance_a_state();
  CHECK(state.predict(0, 0) == doctest::Approx(1.0));
  CHECK(state.predict(1, 0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(state.predict(2, 0), DataError);
  CHECK_THROWS_AS(state.predict(0, 2), DataError);
}

TEST_CASE("predict is zero for the all-zero state") {
  const LatentState zero(3, 4, 2);
  for (std::size_t u = 0; u < 3; ++u) {
    for (std::size_t i = 0; i < 4; ++i) CHECK(zero.predict(u, i) == 0.0);
  }
}

TEST_CASE("predict is bilinear in the user factors") {
  Rng rng(7);
  auto inst = testutil::random_instance(rng);
  const double alpha = 3.25;
  std::vector<double> before;
  for (const Entry& e : inst.matrix.entries()) {
    before.push_back(inst.state.predict(e.user, e.item));
  }
  for (std::size_t u = 0; u < inst.matrix.num_users(); ++u) {
    double* row = inst.state.user_row(u);
    for (std::size_t d = 0; d < inst.state.f(); ++d) row[d] *= alpha;
  }
  std::size_t k = 0;
  for (const Entry& e : inst.matrix.entries()) {
    CHECK(inst.state.predict(e.user, e.item) ==
          doctest::Approx(alpha * before[k++]).epsilon(1e-12));
  }
}

TEST_CASE("residuals on the worked instance") {
  const auto m = testutil::instance_a_matrix();
  const auto state = testutil::instance_a_state();
  const EntryErrors e = residuals(state, m);
  REQUIRE(e.size() == 3);
  CHECK(e[0] == doctest::Approx(4.0));
  CHECK(e[1] == doctest::Approx(2.0));
  CHECK(e[2] == doctest::Approx(2.0));
}

TEST_CASE("residuals are zero under a perfect fit and equal ratings at zero") {
  const auto m = testutil::rank_k_dataset(5, 6, 2, 0.5, 9);
  LatentState zero(5, 6, 2);
  const EntryErrors at_zero = residuals(zero, m);
  for (std::size_t k = 0; k < m.num_entries(); ++k) {
    CHECK(at_zero[k] == m.entry(k).rating);
  }

  // Perfect fit: feed predictions back in as ratings.
  LatentState state = init_latent(5, 6, 2, 4);
  std::vector<Entry> entries(m.entries().begin(), m.entries().end());
  for (Entry& e : entries) e.rating = state.predict(e.user, e.item);
  const HdiMatrix exact(5, 6, std::move(entries));
  for (const double e : residuals(state, exact)) CHECK(e == 0.0);
}

TEST_CASE("residuals reject mismatched dimensions") {
  const auto m = testutil::instance_a_matrix();
  const LatentState wrong(3, 2, 1);
  CHECK_THROWS_AS(residuals(wrong, m), DataError);
}

TEST_CASE("objective on the worked instance") {
  const auto m = testutil::instance_a_matrix();
  const auto state = testutil::instance_a_state();
  CHECK(objective(state, m, 0.0) == doctest::Approx(12.0));
  CHECK(objective(state, m, 0.1) == doctest::Approx(12.45));
}

TEST_CASE("objective vanishes for zero ratings and zero state") {
  const HdiMatrix zeros(2, 2, {{0, 0, 0.0}, {1, 1, 0.0}});
  const LatentState state(2, 2, 3);
  CHECK(objective(state, zeros, 0.0) == 0.0);
  CHECK(objective(state, zeros, 5.0) == 0.0);
}

TEST_CASE("objective is invariant under entry permutation") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = testutil::random_instance(rng);
    const double base = objective(inst.state, inst.matrix, 0.07);

    std::vector<Entry> shuffled(inst.matrix.entries().begin(),
                                inst.matrix.entries().end());
    rng.shuffle(std::span<Entry>(shuffled));
    const HdiMatrix permuted(inst.matrix.num_users(), inst.matrix.num_items(),
                             std::move(shuffled));
    const double after = objective(inst.state, permuted, 0.07);
    CHECK(after == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("negative_gradient on the worked instance") {
  const auto m = testutil::instance_a_matrix();
  const auto state = testutil::instance_a_state();
  const ParamVector g = negative_gradient(state, residuals(state, m), m, 0.0);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == doctest::Approx(6.0));
  CHECK(g[1] == doctest::Approx(2.0));
  CHECK(g[2] == doctest::Approx(8.0));
  CHECK(g[3] == doctest::Approx(2.0));
}

TEST_CASE("negative_gradient with zero errors") {
  const auto m = testutil::instance_a_matrix();
  const auto state = testutil::instance_a_state();
  const EntryErrors zeros(3, 0.0);

  const ParamVector plain = negative_gradient(state, zeros, m, 0.0);
  for (const double x : plain) CHECK(x == 0.0);

  // Pure shrinkage: -lambda * |K_u| * x per coordinate.
  const double lambda = 0.3;
  const ParamVector shrink = negative_gradient(state, zeros, m, lambda);
  const double degs[] = {2, 1, 2, 1};
  const double xs[] = {1, 2, 1, 1};
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(shrink[k] == doctest::Approx(-lambda * degs[k] * xs[k]));
  }
}

TEST_CASE("negative_gradient rejects a wrong-length error vector") {
  const auto m = testutil::instance_a_matrix();
  const auto state = testutil::instance_a_state();
  CHECK_THROWS_AS(negative_gradient(state, EntryErrors(2, 0.0), m, 0.0), DataError);
}

TEST_CASE("negative_gradient(raw residuals) matches finite differences") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const auto inst = testutil::random_instance(rng);
    const double lambda = trial % 2 == 0 ? 0.0 : 0.05;
    const ParamVector neg =
        negative_gradient(inst.state, residuals(inst.state, inst.matrix),
                          inst.matrix, lambda);
    const ParamVector fd = fd_gradient(inst.state, inst.matrix, lambda, 1e-6);
    ParamVector negated(fd.size());
    for (std::size_t k = 0; k < fd.size(); ++k) negated[k] = -fd[k];
    CHECK(testutil::relative_l2_error(neg, negated) <= 1e-5);
  }
}

TEST_CASE("rmse on the worked instance and small sets") {
  const auto m = testutil::instance_a_matrix();
  const auto state = testutil::instance_a_state();
  CHECK(rmse(state, m.entries()) == doctest::Approx(2.82843).epsilon(1e-5));

  // residual pair (1, 0): sqrt(1/2)
  LatentState s(1, 2, 1);
  s.user_row(0)[0] = 1.0;
  s.item_row(0)[0] = 4.0;
  s.item_row(1)[0] = 3.0;
  const std::vector<Entry> omega{{0, 0, 5.0}, {0, 1, 3.0}};
  CHECK(rmse(s, omega) == doctest::Approx(0.70711).epsilon(1e-5));
}

TEST_CASE("rmse is zero exactly when every residual is zero") {
  Rng rng(31);
  const auto inst = testutil::random_instance(rng);
  std::vector<Entry> exact(inst.matrix.entries().begin(), inst.matrix.entries().end());
  for (Entry& e : exact) e.rating = inst.state.predict(e.user, e.item);
  CHECK(rmse(inst.state, exact) == 0.0);

  exact[0].rating += 0.25;
  CHECK(rmse(inst.state, exact) > 0.0);
}

TEST_CASE("rmse of an empty set is an error") {
  const auto state = testutil::instance_a_state();
  CHECK_THROWS_AS(rmse(state, std::span<const Entry>{}), DataError);
}
