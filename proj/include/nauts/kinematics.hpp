#pragma once

#include "nauts/core.hpp"

namespace nauts {

enum class Integrator { kExactArc, kEuler };

/// Unicycle step. Uses the closed-form arc when |w| > 1e-6 and the
/// integrator is kExactArc, the straight-line Euler update otherwise.
RobotState step_kinematics(const RobotState& s, const Behavior& a, double dt,
                           Integrator integrator = Integrator::kExactArc);

/// Integrates `behaviors` from `start`; returns behaviors.size() + 1 states.
Trajectory integrate(const RobotState& start, std::span<const Behavior> behaviors, double dt,
                     Integrator integrator = Integrator::kExactArc);

}  // namespace nauts
