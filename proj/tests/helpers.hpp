#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "data.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace testutil {

// Worked 2x2 instance used throughout: f = 1,
// K = {(u0,i0,5), (u0,i1,3), (u1,i0,4)}, X_U = [1,2], X_I = [1,1].
inline pslf::HdiMatrix instance_a_matrix() {
  return pslf::HdiMatrix(2, 2,
                         {{0, 0, 5.0}, {0, 1, 3.0}, {1, 0, 4.0}},
                         {"u1", "u2"}, {"i1", "i2"});
}

inline pslf::LatentState instance_a_state() {
  pslf::LatentState state(2, 2, 1);
  state.user_row(0)[0] = 1.0;
  state.user_row(1)[0] = 2.0;
  state.item_row(0)[0] = 1.0;
  state.item_row(1)[0] = 1.0;
  return state;
}

struct RandomInstance {
  pslf::HdiMatrix matrix;
  pslf::LatentState state;
};

// Small random instance: |U| <= 6, |I| <= 8, f <= 4, X in [0, 0.04),
// ratings in [1, 5), each pair kept with probability ~0.4 (at least one).
inline RandomInstance random_instance(pslf::Rng& rng) {
  const std::size_t nu = 1 + rng.uniform_index(6);
  const std::size_t ni = 1 + rng.uniform_index(8);
  const std::size_t f = 1 + rng.uniform_index(4);

  std::vector<pslf::Entry> entries;
  for (std::uint32_t u = 0; u < nu; ++u) {
    for (std::uint32_t i = 0; i < ni; ++i) {
      if (rng.uniform(0.0, 1.0) < 0.4) {
        entries.push_back({u, i, rng.uniform(1.0, 5.0)});
      }
    }
  }
  if (entries.empty()) {
    entries.push_back({static_cast<std::uint32_t>(rng.uniform_index(nu)),
                       static_cast<std::uint32_t>(rng.uniform_index(ni)),
                       rng.uniform(1.0, 5.0)});
  }

  pslf::LatentState state(nu, ni, f);
  for (double& x : state.values()) x = rng.uniform(0.0, 0.04);
  return {pslf::HdiMatrix(nu, ni, std::move(entries)), std::move(state)};
}

inline std::vector<double> random_vector(pslf::Rng& rng, std::size_t n,
                                         double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Noiseless exactly-rank-`rank` ratings on a random sparsity pattern with
// exactly floor(density * nu * ni) known entries; factors U(0, 1).
inline pslf::HdiMatrix rank_k_dataset(std::size_t nu, std::size_t ni,
                                      std::size_t rank, double density,
                                      std::uint64_t seed) {
  pslf::Rng rng(seed);
  std::vector<double> user_factors(nu * rank), item_factors(ni * rank);
  for (double& x : user_factors) x = rng.uniform(0.0, 1.0);
  for (double& x : item_factors) x = rng.uniform(0.0, 1.0);

  std::vector<std::uint64_t> pairs(nu * ni);
  for (std::uint64_t p = 0; p < pairs.size(); ++p) pairs[p] = p;
  rng.shuffle(std::span<std::uint64_t>(pairs));
  const auto keep = static_cast<std::size_t>(
      std::floor(density * static_cast<double>(nu * ni)));

  std::vector<pslf::Entry> entries;
  entries.reserve(keep);
  for (std::size_t p = 0; p < keep; ++p) {
    const auto u = static_cast<std::uint32_t>(pairs[p] / ni);
    const auto i = static_cast<std::uint32_t>(pairs[p] % ni);
    double r = 0.0;
    for (std::size_t d = 0; d < rank; ++d) {
      r += user_factors[u * rank + d] * item_factors[i * rank + d];
    }
    entries.push_back({u, i, r});
  }
  return pslf::HdiMatrix(nu, ni, std::move(entries));
}

// Partition stand-in for tiny trainer tests: trains, validates and tests
// on the same entries (no disjointness needed at this scale).
inline pslf::Partition reuse_partition(const pslf::HdiMatrix& matrix) {
  pslf::Partition part;
  part.train = matrix;
  part.validation.assign(matrix.entries().begin(), matrix.entries().end());
  part.test = part.validation;
  for (std::uint32_t k = 0; k < matrix.num_entries(); ++k) {
    part.train_indices.push_back(k);
    part.validation_indices.push_back(k);
    part.test_indices.push_back(k);
  }
  return part;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a[k] - b[k]));
  }
  return m;
}

inline double l2_norm(std::span<const double> a) {
  double s = 0.0;
  for (const double x : a) s += x * x;
  return std::sqrt(s);
}

inline double relative_l2_error(std::span<const double> got,
                                std::span<const double> want) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    diff += (got[k] - want[k]) * (got[k] - want[k]);
    ref += want[k] * want[k];
  }
  if (ref == 0.0) return std::sqrt(diff);
  return std::sqrt(diff / ref);
}

}  // namespace testutil
