#include "second_order.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace pslf {

namespace {

void require_param_length(const LatentState& state, std::size_t got,
                          const char* what) {
  if (got != state.layout().size()) {
    throw DataError(std::string(what) + " length " + std::to_string(got) +
                    " != parameter count " +
                    std::to_string(state.layout().size()));
  }
}

double norm_of(std::span<const double> r, CgNorm norm) {
  double acc = 0.0;
  if (norm == CgNorm::L2) {
    for (const double x : r) acc += x * x;
    return std::sqrt(acc);
  }
  for (const double x : r) acc = std::max(acc, std::abs(x));
  return acc;
}

}  // namespace

void jvp(const LatentState& state, std::span<const double> v,
         const HdiMatrix& matrix, std::span<double> out) {
  require_param_length(state, v.size(), "direction");
  if (out.size() != matrix.num_entries()) {
    throw DataError("jvp output length mismatch");
  }
  const std::size_t f = state.f();
  const ParamLayout& layout = state.layout();
  const auto entries = matrix.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    const double* xu = state.user_row(e.user);
    const double* xi = state.item_row(e.item);
    const double* vu = v.data() + layout.user_offset(e.user);
    const double* vi = v.data() + layout.item_offset(e.item);
    double s = 0.0;
    for (std::size_t d = 0; d < f; ++d) s += vu[d] * xi[d] + xu[d] * vi[d];
    out[k] = s;
  }
}

std::vector<double> jvp(const LatentState& state, std::span<const double> v,
                        const HdiMatrix& matrix) {
  std::vector<double> out(matrix.num_entries());
  jvp(state, v, matrix, out);
  return out;
}

void jtvp(const LatentState& state, std::span<const double> w,
          const HdiMatrix& matrix, std::span<double> out) {
  if (w.size() != matrix.num_entries()) {
    throw DataError("entry vector length " + std::to_string(w.size()) +
                    " != known entry count " +
                    std::to_string(matrix.num_entries()));
  }
  require_param_length(state, out.size(), "jtvp output");
  const std::size_t f = state.f();
  const ParamLayout& layout = state.layout();
  std::fill(out.begin(), out.end(), 0.0);
  const auto entries = matrix.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    const double wk = w[k];
    const double* xu = state.user_row(e.user);
    const double* xi = state.item_row(e.item);
    double* ou = out.data() + layout.user_offset(e.user);
    double* oi = out.data() + layout.item_offset(e.item);
    for (std::size_t d = 0; d < f; ++d) {
      ou[d] += xi[d] * wk;
      oi[d] += xu[d] * wk;
    }
  }
}

ParamVector jtvp(const LatentState& state, std::span<const double> w,
                 const HdiMatrix& matrix) {
  ParamVector out(state.layout().size());
  jtvp(state, w, matrix, out);
  return out;
}

GaussNewtonOperator::GaussNewtonOperator(const LatentState& state,
                                         const HdiMatrix& matrix,
                                         const HvpConfig& cfg)
    : state_(&state), matrix_(&matrix), cfg_(cfg) {
  if (cfg.lambda < 0.0 || cfg.gamma < 0.0) {
    throw ConfigError("lambda and gamma must be non-negative");
  }
}

void GaussNewtonOperator::apply(std::span<const double> v,
                                std::span<double> out) const {
  require_param_length(*state_, v.size(), "direction");
  require_param_length(*state_, out.size(), "HVP output");
  const ParamLayout& layout = state_->layout();
  const std::size_t f = layout.f;

  // Fused Jt(Jv): per entry, form the JVP element and scatter it right
  // away. Same arithmetic and accumulation order as the two-pass
  // jvp/jtvp route, one sweep over the entries instead of two.
  std::fill(out.begin(), out.end(), 0.0);
  const auto entries = matrix_->entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    const double* xu = state_->user_row(e.user);
    const double* xi = state_->item_row(e.item);
    const double* vu = v.data() + layout.user_offset(e.user);
    const double* vi = v.data() + layout.item_offset(e.item);
    double s = 0.0;
    for (std::size_t d = 0; d < f; ++d) s += vu[d] * xi[d] + xu[d] * vi[d];
    double* ou = out.data() + layout.user_offset(e.user);
    double* oi = out.data() + layout.item_offset(e.item);
    for (std::size_t d = 0; d < f; ++d) {
      ou[d] += xi[d] * s;
      oi[d] += xu[d] * s;
    }
  }
  if (cfg_.lambda != 0.0) {
    for (std::size_t u = 0; u < layout.num_users; ++u) {
      const double w = cfg_.lambda * static_cast<double>(matrix_->user_degree(u));
      double* o = out.data() + layout.user_offset(u);
      const double* x = v.data() + layout.user_offset(u);
      for (std::size_t d = 0; d < f; ++d) o[d] += w * x[d];
    }
    for (std::size_t i = 0; i < layout.num_items; ++i) {
      const double w = cfg_.lambda * static_cast<double>(matrix_->item_degree(i));
      double* o = out.data() + layout.item_offset(i);
      const double* x = v.data() + layout.item_offset(i);
      for (std::size_t d = 0; d < f; ++d) o[d] += w * x[d];
    }
  }
  if (cfg_.gamma != 0.0) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += cfg_.gamma * v[k];
  }
}

ParamVector GaussNewtonOperator::apply(std::span<const double> v) const {
  ParamVector out(state_->layout().size());
  apply(v, out);
  return out;
}

ParamVector gn_hvp(const LatentState& state, std::span<const double> v,
                   const HdiMatrix& matrix, const HvpConfig& cfg) {
  return GaussNewtonOperator(state, matrix, cfg).apply(v);
}

CgResult cg_solve(const LinearOperator& apply, std::span<const double> rhs,
                  const CgOptions& opts) {
  const std::size_t n = rhs.size();
  for (const double x : rhs) {
    if (!std::isfinite(x)) throw NumericError("CG right-hand side is not finite");
  }

  CgResult result;
  result.delta.assign(n, 0.0);
  std::vector<double> r(rhs.begin(), rhs.end());
  std::vector<double> p(r);
  std::vector<double> ap(n);

  double rr = 0.0;
  for (const double x : r) rr += x * x;

  result.final_residual_norm = norm_of(r, opts.norm);
  if (result.final_residual_norm <= opts.tolerance) {
    result.converged = true;
    return result;
  }

  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    apply(p, ap);
    double pap = 0.0;
    for (std::size_t k = 0; k < n; ++k) pap += p[k] * ap[k];
    if (!std::isfinite(pap) || pap <= 0.0) {
      throw NumericError("CG iteration " + std::to_string(it) +
                         ": curvature " + std::to_string(pap) +
                         " not positive (damping too small?)");
    }
    const double alpha = rr / pap;
    for (std::size_t k = 0; k < n; ++k) {
      result.delta[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    double rr_next = 0.0;
    for (const double x : r) rr_next += x * x;
    if (!std::isfinite(rr_next)) {
      throw NumericError("CG iteration " + std::to_string(it) +
                         ": residual is not finite");
    }
    result.iterations = it;
    result.final_residual_norm = norm_of(r, opts.norm);
    if (result.final_residual_norm <= opts.tolerance) {
      result.converged = true;
      return result;
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
  }
  return result;
}

}  // namespace pslf
