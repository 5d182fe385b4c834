#pragma once

#include <span>
#include <vector>

#include "data.hpp"
#include "model.hpp"
#include "second_order.hpp"

namespace pslf {

// Brute-force dense references for validating the matrix-free path on
// small instances. Everything here materializes what the training code
// never does, so a hard size guard keeps it away from benchmark scale.

inline constexpr std::size_t kOracleMaxParams = 4096;

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// |K| x (|U|+|I|)f Jacobian of the bilinear map: row k has x_i,d in the
// user-u columns and x_u,d in the item-i columns, zero elsewhere.
DenseMatrix dense_jacobian(const LatentState& state, const HdiMatrix& matrix);

// Jt*J + diag(lambda * |K_entity|) + gamma * I, materialized.
DenseMatrix dense_gauss_newton(const LatentState& state, const HdiMatrix& matrix,
                               const HvpConfig& cfg);

std::vector<double> multiply(const DenseMatrix& a, std::span<const double> x);

// Direct solve of a symmetric positive definite system (Cholesky);
// throws NumericError if the matrix is found not to be PD.
std::vector<double> dense_solve(const DenseMatrix& a, std::span<const double> b);

// Ascending eigenvalues of a symmetric matrix (test support).
std::vector<double> symmetric_eigenvalues(const DenseMatrix& a);

// Central finite differences of objective(): the PLAIN gradient, i.e. the
// negation of what negative_gradient() returns. The step per coordinate
// is h * max(1, |x|), balancing truncation against round-off.
ParamVector fd_gradient(const LatentState& state, const HdiMatrix& matrix,
                        double lambda, double h);

}  // namespace pslf
