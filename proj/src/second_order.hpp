#pragma once

#include <functional>
#include <span>
#include <vector>

#include "data.hpp"
#include "model.hpp"

namespace pslf {

struct HvpConfig {
  double lambda = 0.0;  // Tikhonov coefficient
  double gamma = 0.0;   // damping coefficient
};

enum class CgNorm { L2, Max };

struct CgOptions {
  double tolerance = 100.0;
  std::size_t max_iterations = 50;
  CgNorm norm = CgNorm::L2;
};

struct CgResult {
  ParamVector delta;
  std::size_t iterations = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
};

// Jacobian-vector product of the bilinear map, one value per known entry:
//   (Jv)_{u,i} = sum_d (v_u,d * x_i,d + x_u,d * v_i,d)
void jvp(const LatentState& state, std::span<const double> v,
         const HdiMatrix& matrix, std::span<double> out);
std::vector<double> jvp(const LatentState& state, std::span<const double> v,
                        const HdiMatrix& matrix);

// Transpose product: scatter an entry-space vector back to parameters,
//   out_u,d = sum_{i in K_u} x_i,d * w_{u,i}
//   out_i,d = sum_{u in K_i} x_u,d * w_{u,i}
void jtvp(const LatentState& state, std::span<const double> w,
          const HdiMatrix& matrix, std::span<double> out);
ParamVector jtvp(const LatentState& state, std::span<const double> w,
                 const HdiMatrix& matrix);

// Damped Gauss-Newton product (G + gamma*I)v computed matrix-free:
// Jt(Jv) in one fused sweep over the known entries, plus the
// lambda*|K_u| / lambda*|K_i| diagonal and the gamma shift. Numerically
// identical to composing jvp and jtvp.
class GaussNewtonOperator {
 public:
  GaussNewtonOperator(const LatentState& state, const HdiMatrix& matrix,
                      const HvpConfig& cfg);

  void apply(std::span<const double> v, std::span<double> out) const;
  ParamVector apply(std::span<const double> v) const;

 private:
  const LatentState* state_;
  const HdiMatrix* matrix_;
  HvpConfig cfg_;
};

// One-shot convenience over GaussNewtonOperator.
ParamVector gn_hvp(const LatentState& state, std::span<const double> v,
                   const HdiMatrix& matrix, const HvpConfig& cfg);

using LinearOperator =
    std::function<void(std::span<const double>, std::span<double>)>;

// Conjugate gradient on apply(x) = rhs from x = 0 with initial direction
// rhs. Stops when the residual norm (L2 by default, per-component max
// behind CgNorm::Max) drops to opts.tolerance or max_iterations is hit.
// Throws NumericError naming the iteration if curvature along a
// direction is not positive or any value goes non-finite.
CgResult cg_solve(const LinearOperator& apply, std::span<const double> rhs,
                  const CgOptions& opts);

}  // namespace pslf
