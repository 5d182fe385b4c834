#pragma once

#include <cstdint>
#include <span>

#include "model.hpp"

namespace pslf {

struct PidGains {
  double kp = 1.5;
  double ki = 0.005;
  double kd = 0.05;
};

// Per-entry controller state carried across epochs: the running error
// integral and the previous epoch's error, one slot per known training
// entry (keyed by entry order, so it is only valid for the training set
// it was created for). Owned by a single training run; refine() mutates.
class PidState {
 public:
  explicit PidState(std::size_t num_entries);

  // Advances one epoch: per entry,
  //   integral += e
  //   refined   = kp*e + ki*integral + kd*(e - previous)
  //   previous  = e
  // The pre-training error is defined as zero, so the first epoch sees a
  // derivative term of e^1 - 0.
  EntryErrors refine(std::span<const double> errors, const PidGains& gains);

  std::span<const double> integral() const { return integral_; }
  std::span<const double> previous_error() const { return prev_error_; }
  std::uint64_t epoch() const { return epoch_; }
  std::size_t size() const { return integral_.size(); }

 private:
  std::vector<double> integral_;
  std::vector<double> prev_error_;
  std::uint64_t epoch_ = 0;
};

}  // namespace pslf
