#include "oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "error.hpp"

namespace pslf {

namespace {

void guard_size(const LatentState& state) {
  if (state.layout().size() > kOracleMaxParams) {
    throw ConfigError("oracle instance too large: " +
                      std::to_string(state.layout().size()) + " parameters (max " +
                      std::to_string(kOracleMaxParams) + ")");
  }
}

using EigenMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;

}  // namespace

DenseMatrix dense_jacobian(const LatentState& state, const HdiMatrix& matrix) {
  guard_size(state);
  const ParamLayout& layout = state.layout();
  const std::size_t f = layout.f;
  DenseMatrix jac(matrix.num_entries(), layout.size());
  const auto entries = matrix.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    for (std::size_t d = 0; d < f; ++d) {
      jac.at(k, layout.user_offset(e.user) + d) = state.item_row(e.item)[d];
      jac.at(k, layout.item_offset(e.item) + d) = state.user_row(e.user)[d];
    }
  }
  return jac;
}

DenseMatrix dense_gauss_newton(const LatentState& state, const HdiMatrix& matrix,
                               const HvpConfig& cfg) {
  guard_size(state);
  const DenseMatrix jac = dense_jacobian(state, matrix);
  const ParamLayout& layout = state.layout();
  const std::size_t n = layout.size();
  DenseMatrix gn(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < jac.rows; ++k) s += jac.at(k, a) * jac.at(k, b);
      gn.at(a, b) = s;
      gn.at(b, a) = s;
    }
  }
  for (std::size_t u = 0; u < layout.num_users; ++u) {
    const double w = cfg.lambda * static_cast<double>(matrix.user_degree(u));
    for (std::size_t d = 0; d < layout.f; ++d) {
      gn.at(layout.user_offset(u) + d, layout.user_offset(u) + d) += w;
    }
  }
  for (std::size_t i = 0; i < layout.num_items; ++i) {
    const double w = cfg.lambda * static_cast<double>(matrix.item_degree(i));
    for (std::size_t d = 0; d < layout.f; ++d) {
      gn.at(layout.item_offset(i) + d, layout.item_offset(i) + d) += w;
    }
  }
  for (std::size_t a = 0; a < n; ++a) gn.at(a, a) += cfg.gamma;
  return gn;
}

std::vector<double> multiply(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols) throw DataError("dense multiply dimension mismatch");
  std::vector<double> out(a.rows, 0.0);
  for (std::size_t r = 0; r < a.rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) s += a.at(r, c) * x[c];
    out[r] = s;
  }
  return out;
}

std::vector<double> dense_solve(const DenseMatrix& a, std::span<const double> b) {
  if (a.rows != a.cols) throw DataError("dense_solve needs a square matrix");
  if (b.size() != a.rows) throw DataError("dense_solve dimension mismatch");
  EigenMap m(a.values.data(), static_cast<Eigen::Index>(a.rows),
             static_cast<Eigen::Index>(a.cols));
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericError("dense_solve: matrix is not positive definite");
  }
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd x = llt.solve(rhs);
  return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& a) {
  if (a.rows != a.cols) throw DataError("eigenvalues need a square matrix");
  EigenMap m(a.values.data(), static_cast<Eigen::Index>(a.rows),
             static_cast<Eigen::Index>(a.cols));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalue decomposition failed");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

ParamVector fd_gradient(const LatentState& state, const HdiMatrix& matrix,
                        double lambda, double h) {
  guard_size(state);
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
  LatentState probe = state;
  auto values = probe.values();
  ParamVector grad(values.size(), 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double x = values[k];
    const double step = h * std::max(1.0, std::abs(x));
    values[k] = x + step;
    const double plus = objective(probe, matrix, lambda);
    values[k] = x - step;
    const double minus = objective(probe, matrix, lambda);
    values[k] = x;
    grad[k] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

}  // namespace pslf
