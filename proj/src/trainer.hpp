#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "data.hpp"
#include "model.hpp"
#include "pid.hpp"
#include "second_order.hpp"

namespace pslf {

enum class Optimizer { Sgd, Adam, Sam, Slf, Pslf };

Optimizer optimizer_from_name(std::string_view name);
std::string_view optimizer_name(Optimizer optimizer);

// SAM perturbation scope: per-rating on the touched parameter slice
// (default, matches the stochastic baseline loop) or one full-batch
// ascent step with a global gradient norm per epoch.
enum class SamMode { PerRating, Global };

struct TrainConfig {
  Optimizer optimizer = Optimizer::Pslf;
  std::size_t f = 20;
  double lambda = 0.0;
  // CG damping for slf/pslf; reused as the Adam epsilon when
  // optimizer == adam (set it to 1e-8 there).
  double gamma = 0.0;
  double tau = 100.0;
  std::size_t cg_max_iters = 50;
  CgNorm cg_norm = CgNorm::L2;
  PidGains gains;
  // Step size for the per-rating baselines; slf/pslf always take the
  // unit step X += delta.
  double lr = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double sam_rho = 0.0625;
  SamMode sam_mode = SamMode::PerRating;
  std::size_t max_epochs = 500;
  std::size_t early_stop_patience = 10;
  std::uint64_t seed = 0;
};

enum class StopReason { EarlyStop, MaxEpochs, SolverError };

std::string_view stop_reason_name(StopReason reason);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_rmse = 0.0;
  double validation_rmse = 0.0;
  double seconds = 0.0;  // cumulative training wall time at end of epoch
  std::size_t cg_iterations = 0;  // 0 for the first-order optimizers
};

struct TrainReport {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_validation_rmse = std::numeric_limits<double>::infinity();
  // Always evaluated on the snapshot of the best-validation epoch, never
  // the final state.
  double test_rmse = std::numeric_limits<double>::quiet_NaN();
  StopReason stop_reason = StopReason::MaxEpochs;
  std::string error;  // set when stop_reason == SolverError
  double train_seconds = 0.0;

  std::size_t epochs_run() const { return epochs.size(); }
};

struct EarlyStopDecision {
  bool stop = false;
  std::size_t best_epoch = 0;  // 1-based position of the best entry
};

// Stop once the best validation RMSE has gone `patience` consecutive
// epochs without strict improvement (ties count as non-improvement).
EarlyStopDecision check_early_stop(std::span<const double> validation_history,
                                   std::size_t patience);

struct TrainHooks {
  // Called after each epoch's parameter update with the current state.
  std::function<void(std::size_t epoch, const LatentState&)> on_epoch;
};

// Runs the optimizer named in the config against the partition. A pure
// function of (partition, config): identical inputs give identical
// reports apart from wall-clock fields. If the solver fails or RMSE goes
// non-finite after at least one completed epoch, the report comes back
// with stop_reason = solver_error and the failing epoch in `error`;
// a first-epoch failure throws.
TrainReport train(const Partition& partition, const TrainConfig& config,
                  const TrainHooks* hooks = nullptr);

struct GridRun {
  TrainConfig config;
  bool ok = false;
  TrainReport report;  // meaningful when ok
  std::string error;   // set when !ok
};

struct GridResult {
  std::size_t best_index = 0;
  std::vector<GridRun> runs;  // aligned with the input grid order
};

// One run per grid point on the same partition; winner is the lowest
// best-validation RMSE, ties broken by grid order. Failed runs are kept
// in the result; throws only if every run failed.
GridResult grid_search(const Partition& partition,
                       std::span<const TrainConfig> grid);

}  // namespace pslf
