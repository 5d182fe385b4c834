#include "model.hpp"

#include <cmath>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace pslf {

namespace {

double dot(const double* a, const double* b, std::size_t f) {
  double s = 0.0;
  for (std::size_t d = 0; d < f; ++d) s += a[d] * b[d];
  return s;
}

void require_dims(const LatentState& state, const HdiMatrix& matrix) {
  if (state.layout().num_users != matrix.num_users() ||
      state.layout().num_items != matrix.num_items()) {
    throw DataError("latent state is " +
                    std::to_string(state.layout().num_users) + "x" +
                    std::to_string(state.layout().num_items) +
                    " but matrix is " + std::to_string(matrix.num_users()) +
                    "x" + std::to_string(matrix.num_items()));
  }
}

}  // namespace

LatentState::LatentState(std::size_t num_users, std::size_t num_items, std::size_t f)
    : layout_{num_users, num_items, f}, values_(layout_.size(), 0.0) {
  if (f == 0) throw ConfigError("latent dimension f must be >= 1");
}

double LatentState::predict(std::size_t u, std::size_t i) const {
  if (u >= layout_.num_users) {
    throw DataError("user index " + std::to_string(u) + " out of range");
  }
  if (i >= layout_.num_items) {
    throw DataError("item index " + std::to_string(i) + " out of range");
  }
  return dot(user_row(u), item_row(i), layout_.f);
}

void LatentState::add(std::span<const double> delta) {
  if (delta.size() != values_.size()) {
    throw DataError("increment length " + std::to_string(delta.size()) +
                    " != parameter count " + std::to_string(values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += delta[k];
}

LatentState init_latent(std::size_t num_users, std::size_t num_items,
                        std::size_t f, std::uint64_t seed) {
  LatentState state(num_users, num_items, f);
  Rng rng(seed);
  for (double& x : state.values()) x = rng.uniform(0.0, 0.04);
  return state;
}

EntryErrors residuals(const LatentState& state, const HdiMatrix& matrix) {
  require_dims(state, matrix);
  const std::size_t f = state.f();
  EntryErrors errors(matrix.num_entries());
  const auto entries = matrix.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    errors[k] = e.rating - dot(state.user_row(e.user), state.item_row(e.item), f);
  }
  return errors;
}

double objective(const LatentState& state, const HdiMatrix& matrix, double lambda) {
  require_dims(state, matrix);
  const std::size_t f = state.f();
  double total = 0.0;
  for (const Entry& e : matrix.entries()) {
    const double* xu = state.user_row(e.user);
    const double* xi = state.item_row(e.item);
    const double err = e.rating - dot(xu, xi, f);
    double reg = 0.0;
    for (std::size_t d = 0; d < f; ++d) reg += xu[d] * xu[d] + xi[d] * xi[d];
    total += err * err + lambda * reg;
  }
  return 0.5 * total;
}

ParamVector negative_gradient(const LatentState& state,
                              std::span<const double> errors,
                              const HdiMatrix& matrix, double lambda) {
  require_dims(state, matrix);
  if (errors.size() != matrix.num_entries()) {
    throw DataError("error vector length " + std::to_string(errors.size()) +
                    " != known entry count " +
                    std::to_string(matrix.num_entries()));
  }
  const std::size_t f = state.f();
  ParamVector out(state.layout().size(), 0.0);
  const auto entries = matrix.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    const double err = errors[k];
    const double* xu = state.user_row(e.user);
    const double* xi = state.item_row(e.item);
    double* gu = out.data() + state.layout().user_offset(e.user);
    double* gi = out.data() + state.layout().item_offset(e.item);
    for (std::size_t d = 0; d < f; ++d) {
      gu[d] += err * xi[d] - lambda * xu[d];
      gi[d] += err * xu[d] - lambda * xi[d];
    }
  }
  return out;
}

double rmse(const LatentState& state, std::span<const Entry> eval_set) {
  if (eval_set.empty()) throw DataError("RMSE over an empty evaluation set");
  const std::size_t f = state.f();
  double sum = 0.0;
  for (const Entry& e : eval_set) {
    const double err =
        e.rating - dot(state.user_row(e.user), state.item_row(e.item), f);
    sum += err * err;
  }
  return std::sqrt(sum / static_cast<double>(eval_set.size()));
}

}  // namespace pslf
