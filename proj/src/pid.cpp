#include "pid.hpp"

#include <string>

#include "error.hpp"

namespace pslf {

PidState::PidState(std::size_t num_entries)
    : integral_(num_entries, 0.0), prev_error_(num_entries, 0.0) {
  if (num_entries == 0) {
    throw ConfigError("PID state needs at least one entry");
  }
}

EntryErrors PidState::refine(std::span<const double> errors,
                             const PidGains& gains) {
  if (errors.size() != integral_.size()) {
    throw DataError("error vector length " + std::to_string(errors.size()) +
                    " != PID state size " + std::to_string(integral_.size()));
  }
  EntryErrors refined(errors.size());
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double e = errors[k];
    integral_[k] += e;
    refined[k] = gains.kp * e + gains.ki * integral_[k] +
                 gains.kd * (e - prev_error_[k]);
    prev_error_[k] = e;
  }
  ++epoch_;
  return refined;
}

}  // namespace pslf
