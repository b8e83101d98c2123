#include "nauts/kinematics.hpp"

namespace nauts {

RobotState step_kinematics(const RobotState& s, const Behavior& a, double dt, Integrator integrator) {
  const double v = a.linear;
  const double w = a.angular;
  if (integrator == Integrator::kExactArc && std::abs(w) > 1e-6) {
    const double th1 = s.heading + w * dt;
    const double r = v / w;
    return RobotState{s.x + r * (std::sin(th1) - std::sin(s.heading)),
                      s.y - r * (std::cos(th1) - std::cos(s.heading)), normalize_angle(th1)};
  }
  return RobotState{s.x + v * std::cos(s.heading) * dt, s.y + v * std::sin(s.heading) * dt,
                    normalize_angle(s.heading + w * dt)};
}

Trajectory integrate(const RobotState& start, std::span<const Behavior> behaviors, double dt,
                     Integrator integrator) {
  Trajectory t;
  t.behaviors.assign(behaviors.begin(), behaviors.end());
  t.states.reserve(behaviors.size() + 1);
  t.states.push_back(start);
  for (const auto& b : behaviors) t.states.push_back(step_kinematics(t.states.back(), b, dt, integrator));
  return t;
}

}  // namespace nauts
