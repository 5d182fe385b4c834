#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "data.hpp"

namespace pslf {

// Flat layout shared by every (|U|+|I|)*f vector in the library: all user
// rows first, then all item rows, f contiguous factors per entity.
struct ParamLayout {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t f = 0;

  std::size_t size() const { return (num_users + num_items) * f; }
  std::size_t user_offset(std::size_t u) const { return u * f; }
  std::size_t item_offset(std::size_t i) const { return (num_users + i) * f; }
};

// Sign convention: every gradient-like ParamVector produced by this
// library stores the NEGATIVE gradient (the CG right-hand side and
// initial direction). fd_gradient in the oracle module is the one
// exception and says so.
using ParamVector = std::vector<double>;

// Per-known-entry values aligned with HdiMatrix entry order.
using EntryErrors = std::vector<double>;

// The decision parameter X = (X_U, X_I), stored contiguously in
// ParamLayout order so X += delta is a flat vector add.
class LatentState {
 public:
  LatentState() = default;
  LatentState(std::size_t num_users, std::size_t num_items, std::size_t f);

  const ParamLayout& layout() const { return layout_; }
  std::size_t f() const { return layout_.f; }

  double* user_row(std::size_t u) { return values_.data() + layout_.user_offset(u); }
  const double* user_row(std::size_t u) const { return values_.data() + layout_.user_offset(u); }
  double* item_row(std::size_t i) { return values_.data() + layout_.item_offset(i); }
  const double* item_row(std::size_t i) const { return values_.data() + layout_.item_offset(i); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  // sigma(X)_{u,i}, bounds-checked.
  double predict(std::size_t u, std::size_t i) const;

  void add(std::span<const double> delta);  // X += delta

 private:
  ParamLayout layout_;
  std::vector<double> values_;
};

// Every factor drawn i.i.d. uniform on [0, 0.04), in layout order.
LatentState init_latent(std::size_t num_users, std::size_t num_items,
                        std::size_t f, std::uint64_t seed);

// errors[k] = r_k - sigma_{u_k,i_k}, in entry order.
EntryErrors residuals(const LatentState& state, const HdiMatrix& matrix);

// (1/2) sum_K [ (r - sigma)^2 + lambda * sum_d (x_u,d^2 + x_i,d^2) ].
// The regularizer sits inside the per-entry sum, so each x_u,d^2 is
// weighted by |K_u| (and x_i,d^2 by |K_i|).
double objective(const LatentState& state, const HdiMatrix& matrix, double lambda);

// Negative gradient assembled from (possibly refined) per-entry errors:
//   out_u,d = sum_{i in K_u} (e_{u,i} * x_i,d - lambda * x_u,d)
//   out_i,d = sum_{u in K_i} (e_{u,i} * x_u,d - lambda * x_i,d)
// With raw residuals this is exactly -grad of objective(). Accumulates
// sequentially in entry order.
ParamVector negative_gradient(const LatentState& state,
                              std::span<const double> errors,
                              const HdiMatrix& matrix, double lambda);

double rmse(const LatentState& state, std::span<const Entry> eval_set);

}  // namespace pslf
