#include "trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace pslf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_stochastic(Optimizer optimizer) {
  return optimizer == Optimizer::Sgd || optimizer == Optimizer::Adam ||
         optimizer == Optimizer::Sam;
}

void validate(const Partition& partition, const TrainConfig& cfg) {
  if (cfg.f == 0) throw ConfigError("latent dimension f must be >= 1");
  if (cfg.max_epochs == 0) throw ConfigError("max-epochs must be >= 1");
  if (cfg.early_stop_patience == 0) throw ConfigError("early-stop patience must be >= 1");
  if (cfg.lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (cfg.gamma < 0.0) throw ConfigError("gamma must be non-negative");
  if (cfg.tau < 0.0) throw ConfigError("tau must be non-negative");
  if (is_stochastic(cfg.optimizer) && cfg.lr < 0.0) {
    throw ConfigError("lr must be non-negative");
  }
  if (cfg.optimizer == Optimizer::Adam && cfg.gamma <= 0.0) {
    throw ConfigError("adam needs a positive epsilon: set gamma (e.g. 1e-8)");
  }
  if (cfg.optimizer == Optimizer::Sam && cfg.sam_rho < 0.0) {
    throw ConfigError("sam-rho must be non-negative");
  }
  if (partition.train.num_entries() == 0) throw DataError("empty training set");
  if (partition.validation.empty()) throw DataError("empty validation set");
  if (partition.test.empty()) throw DataError("empty test set");
}

// Shared epoch loop: step() advances the state by one epoch and returns
// the CG iteration count (0 for first-order optimizers).
TrainReport run_loop(const Partition& partition, const TrainConfig& cfg,
                     const TrainHooks* hooks, LatentState state,
                     const std::function<std::size_t(LatentState&, std::size_t)>& step) {
  TrainReport report;
  report.config = cfg;

  LatentState best = state;
  std::vector<double> history;
  StopReason reason = StopReason::MaxEpochs;
  const auto start = Clock::now();

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::size_t cg_iterations = 0;
    double train_rmse = 0.0;
    double validation_rmse = 0.0;
    try {
      cg_iterations = step(state, epoch);
      train_rmse = rmse(state, partition.train.entries());
      validation_rmse = rmse(state, partition.validation);
      if (!std::isfinite(train_rmse) || !std::isfinite(validation_rmse)) {
        throw NumericError("non-finite RMSE (diverged)");
      }
    } catch (const Error& e) {
      const std::string message = "epoch " + std::to_string(epoch) + ": " + e.what();
      if (report.epochs.empty()) throw NumericError(message);
      reason = StopReason::SolverError;
      report.error = message;
      break;
    }

    report.epochs.push_back(
        {epoch, train_rmse, validation_rmse, seconds_since(start), cg_iterations});
    history.push_back(validation_rmse);
    if (hooks && hooks->on_epoch) hooks->on_epoch(epoch, state);

    if (validation_rmse < report.best_validation_rmse) {
      report.best_validation_rmse = validation_rmse;
      report.best_epoch = epoch;
      best = state;
    }
    if (check_early_stop(history, cfg.early_stop_patience).stop) {
      reason = StopReason::EarlyStop;
      break;
    }
  }

  report.stop_reason = reason;
  report.test_rmse = rmse(best, partition.test);
  report.train_seconds = seconds_since(start);
  return report;
}

double dot(const double* a, const double* b, std::size_t f) {
  double s = 0.0;
  for (std::size_t d = 0; d < f; ++d) s += a[d] * b[d];
  return s;
}

TrainReport train_second_order(const Partition& partition, const TrainConfig& cfg,
                               const TrainHooks* hooks) {
  const HdiMatrix& train_m = partition.train;
  LatentState state =
      init_latent(train_m.num_users(), train_m.num_items(), cfg.f, cfg.seed);

  const bool use_pid = cfg.optimizer == Optimizer::Pslf;
  PidState pid(use_pid ? train_m.num_entries() : 1);
  const HvpConfig hvp_cfg{cfg.lambda, cfg.gamma};
  const CgOptions cg_opts{cfg.tau, cfg.cg_max_iters, cfg.cg_norm};

  auto step = [&](LatentState& x, std::size_t) -> std::size_t {
    EntryErrors errors = residuals(x, train_m);
    if (use_pid) errors = pid.refine(errors, cfg.gains);
    const ParamVector rhs = negative_gradient(x, errors, train_m, cfg.lambda);
    const GaussNewtonOperator op(x, train_m, hvp_cfg);
    const CgResult cg = cg_solve(
        [&op](std::span<const double> v, std::span<double> out) { op.apply(v, out); },
        rhs, cg_opts);
    x.add(cg.delta);
    return cg.iterations;
  };
  return run_loop(partition, cfg, hooks, std::move(state), step);
}

// Flagged alternative to per-rating SAM: one ascent step per epoch with
// the global gradient norm, then a full-batch descent step from the
// perturbed point.
TrainReport train_sam_global(const Partition& partition, const TrainConfig& cfg,
                             const TrainHooks* hooks) {
  const HdiMatrix& train_m = partition.train;
  LatentState state =
      init_latent(train_m.num_users(), train_m.num_items(), cfg.f, cfg.seed);

  auto step = [&](LatentState& x, std::size_t) -> std::size_t {
    const ParamVector descent =
        negative_gradient(x, residuals(x, train_m), train_m, cfg.lambda);
    double norm_sq = 0.0;
    for (const double g : descent) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);

    LatentState probe = x;
    if (cfg.sam_rho > 0.0 && norm > 0.0) {
      const double scale = cfg.sam_rho / norm;  // ascend: minus the descent
      auto values = probe.values();
      for (std::size_t k = 0; k < values.size(); ++k) {
        values[k] -= scale * descent[k];
      }
    }
    const ParamVector perturbed_descent =
        negative_gradient(probe, residuals(probe, train_m), train_m, cfg.lambda);
    auto values = x.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      values[k] += cfg.lr * perturbed_descent[k];
      if (!std::isfinite(values[k])) throw NumericError("parameters diverged");
    }
    return 0;
  };
  return run_loop(partition, cfg, hooks, std::move(state), step);
}

TrainReport train_stochastic(const Partition& partition, const TrainConfig& cfg,
                             const TrainHooks* hooks) {
  const HdiMatrix& train_m = partition.train;
  LatentState state =
      init_latent(train_m.num_users(), train_m.num_items(), cfg.f, cfg.seed);
  const std::size_t f = cfg.f;

  // Shuffle stream decorrelated from the init draws.
  Rng order_rng(splitmix64(cfg.seed));
  std::vector<std::uint32_t> order(train_m.num_entries());
  std::iota(order.begin(), order.end(), 0u);

  // Adam moments plus running beta powers for exact bias correction.
  std::vector<double> m, v, beta1_pow, beta2_pow;
  if (cfg.optimizer == Optimizer::Adam) {
    const std::size_t n = state.layout().size();
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    beta1_pow.assign(n, 1.0);
    beta2_pow.assign(n, 1.0);
  }
  const double eps = cfg.gamma;

  std::vector<double> pu(f), pi(f), gu(f), gi(f);

  auto adam_update = [&](std::size_t index, double grad, double* param) {
    m[index] = cfg.adam_beta1 * m[index] + (1.0 - cfg.adam_beta1) * grad;
    v[index] = cfg.adam_beta2 * v[index] + (1.0 - cfg.adam_beta2) * grad * grad;
    beta1_pow[index] *= cfg.adam_beta1;
    beta2_pow[index] *= cfg.adam_beta2;
    const double m_hat = m[index] / (1.0 - beta1_pow[index]);
    const double v_hat = v[index] / (1.0 - beta2_pow[index]);
    *param -= cfg.lr * m_hat / (std::sqrt(v_hat) + eps);
  };

  auto step = [&](LatentState& x, std::size_t) -> std::size_t {
    order_rng.shuffle(std::span<std::uint32_t>(order));
    const ParamLayout& layout = x.layout();
    for (const std::uint32_t k : order) {
      const Entry& e = train_m.entry(k);
      double* xu = x.user_row(e.user);
      double* xi = x.item_row(e.item);
      const double err = e.rating - dot(xu, xi, f);

      switch (cfg.optimizer) {
        case Optimizer::Sgd: {
          for (std::size_t d = 0; d < f; ++d) {
            const double u0 = xu[d], i0 = xi[d];
            xu[d] = u0 + cfg.lr * (err * i0 - cfg.lambda * u0);
            xi[d] = i0 + cfg.lr * (err * u0 - cfg.lambda * i0);
          }
          break;
        }
        case Optimizer::Adam: {
          for (std::size_t d = 0; d < f; ++d) {
            const double u0 = xu[d], i0 = xi[d];
            const double grad_u = cfg.lambda * u0 - err * i0;
            const double grad_i = cfg.lambda * i0 - err * u0;
            adam_update(layout.user_offset(e.user) + d, grad_u, xu + d);
            adam_update(layout.item_offset(e.item) + d, grad_i, xi + d);
          }
          break;
        }
        case Optimizer::Sam: {
          // Ascend the loss on the touched parameter slice, then apply
          // the gradient taken at the perturbed point to the original
          // parameters.
          double norm_sq = 0.0;
          for (std::size_t d = 0; d < f; ++d) {
            gu[d] = cfg.lambda * xu[d] - err * xi[d];
            gi[d] = cfg.lambda * xi[d] - err * xu[d];
            norm_sq += gu[d] * gu[d] + gi[d] * gi[d];
          }
          const double norm = std::sqrt(norm_sq);
          if (cfg.sam_rho > 0.0 && norm > 0.0) {
            const double scale = cfg.sam_rho / norm;
            for (std::size_t d = 0; d < f; ++d) {
              pu[d] = xu[d] + scale * gu[d];
              pi[d] = xi[d] + scale * gi[d];
            }
          } else {
            for (std::size_t d = 0; d < f; ++d) {
              pu[d] = xu[d];
              pi[d] = xi[d];
            }
          }
          const double err_p = e.rating - dot(pu.data(), pi.data(), f);
          for (std::size_t d = 0; d < f; ++d) {
            xu[d] += cfg.lr * (err_p * pi[d] - cfg.lambda * pu[d]);
            xi[d] += cfg.lr * (err_p * pu[d] - cfg.lambda * pi[d]);
          }
          break;
        }
        default:
          throw ConfigError("not a stochastic optimizer");
      }
      if (!std::isfinite(xu[0]) || !std::isfinite(xi[0])) {
        throw NumericError("parameters diverged");
      }
    }
    return 0;
  };
  return run_loop(partition, cfg, hooks, std::move(state), step);
}

}  // namespace

Optimizer optimizer_from_name(std::string_view name) {
  if (name == "sgd") return Optimizer::Sgd;
  if (name == "adam") return Optimizer::Adam;
  if (name == "sam") return Optimizer::Sam;
  if (name == "slf") return Optimizer::Slf;
  if (name == "pslf") return Optimizer::Pslf;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view optimizer_name(Optimizer optimizer) {
  switch (optimizer) {
    case Optimizer::Sgd: return "sgd";
    case Optimizer::Adam: return "adam";
    case Optimizer::Sam: return "sam";
    case Optimizer::Slf: return "slf";
    case Optimizer::Pslf: return "pslf";
  }
  return "?";
}

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::EarlyStop: return "early_stop";
    case StopReason::MaxEpochs: return "max_epochs";
    case StopReason::SolverError: return "solver_error";
  }
  return "?";
}

EarlyStopDecision check_early_stop(std::span<const double> validation_history,
                                   std::size_t patience) {
  if (validation_history.empty()) {
    throw ConfigError("early-stop history must be non-empty");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < validation_history.size(); ++k) {
    if (validation_history[k] < validation_history[best]) best = k;
  }
  const bool stop = validation_history.size() - 1 - best >= patience;
  return {stop, best + 1};
}

TrainReport train(const Partition& partition, const TrainConfig& config,
                  const TrainHooks* hooks) {
  validate(partition, config);
  if (config.optimizer == Optimizer::Sam && config.sam_mode == SamMode::Global) {
    return train_sam_global(partition, config, hooks);
  }
  if (is_stochastic(config.optimizer)) {
    return train_stochastic(partition, config, hooks);
  }
  return train_second_order(partition, config, hooks);
}

GridResult grid_search(const Partition& partition,
                       std::span<const TrainConfig> grid) {
  if (grid.empty()) throw ConfigError("grid search needs at least one point");
  GridResult result;
  result.runs.reserve(grid.size());
  bool have_best = false;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    GridRun run;
    run.config = grid[idx];
    try {
      run.report = train(partition, grid[idx]);
      run.ok = run.report.stop_reason != StopReason::SolverError;
      if (!run.ok) run.error = run.report.error;
    } catch (const Error& e) {
      run.error = e.what();
    }
    if (run.ok && run.report.best_validation_rmse < best_rmse) {
      best_rmse = run.report.best_validation_rmse;
      result.best_index = idx;
      have_best = true;
    }
    result.runs.push_back(std::move(run));
  }
  if (!have_best) throw NumericError("every grid run failed");
  return result;
}

}  // namespace pslf
