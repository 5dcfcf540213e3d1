#pragma once

#include <cmath>
#include <string>

#include "pushpull/errors.hpp"

namespace pushpull {

// Step-size schedules. TheoryCoupled ties the step size to the momentum
// coefficient as eta = c * lambda^2, which keeps the directed-topology error
// floor on the same decay rate as the gradient-noise floor. HorizonOptimal
// additionally picks lambda = (n/T)^{1/4}, giving eta proportional to
// sqrt(n/T).
struct StepSchedule {
  enum class Kind { Constant, SteppedDecay, TheoryCoupled, HorizonOptimal };

  Kind kind = Kind::Constant;
  double eta0 = 0.1;
  double factor = 0.1;  // SteppedDecay
  int period = 300;     // SteppedDecay
  double c = 1.0;       // TheoryCoupled / HorizonOptimal

  static StepSchedule constant(double eta0) {
    if (!(eta0 > 0)) throw ConfigError("schedule: eta must be > 0");
    return {Kind::Constant, eta0, 0.1, 300, 1.0};
  }

  static StepSchedule stepped_decay(double eta0, double factor, int period) {
    if (!(eta0 > 0)) throw ConfigError("schedule: eta must be > 0");
    if (!(factor > 0 && factor < 1)) throw ConfigError("schedule: decay factor must be in (0,1)");
    if (period < 1) throw ConfigError("schedule: decay period must be >= 1");
    return {Kind::SteppedDecay, eta0, factor, period, 1.0};
  }

  static StepSchedule theory_coupled(double c, double lambda) {
    if (!(c > 0)) throw ConfigError("schedule: coupling c must be > 0");
    return {Kind::TheoryCoupled, c * lambda * lambda, 0.1, 300, c};
  }

  // Returns the schedule and the lambda it implies.
  static StepSchedule horizon_optimal(double c, int n, long horizon, double& lambda_out) {
    if (!(c > 0)) throw ConfigError("schedule: coupling c must be > 0");
    if (horizon < 1) throw ConfigError("schedule: horizon_optimal needs horizon >= 1");
    const double lambda =
        std::min(1.0, std::pow(static_cast<double>(n) / static_cast<double>(horizon), 0.25));
    lambda_out = lambda;
    StepSchedule s{Kind::HorizonOptimal, c * lambda * lambda, 0.1, 300, c};
    return s;
  }

  double eta(long k) const {
    if (kind == Kind::SteppedDecay)
      return eta0 * std::pow(factor, static_cast<double>(k / period));
    return eta0;
  }
};

std::string to_string(StepSchedule::Kind kind);
StepSchedule::Kind schedule_kind_from_string(const std::string& name);

}  // namespace pushpull
