#include "qrgd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qrgd {

ScheduleParams build_schedule(double gamma, double mu, double init_radius, double eta,
                              double epsilon) {
  if (!(gamma > 0) || !(mu > 0) || !(init_radius > 0) || !(eta > 0) || !(epsilon > 0)) {
    throw std::invalid_argument("build_schedule: all inputs must be positive");
  }
  if (!(init_radius < std::numbers::pi / 2)) {
    throw std::invalid_argument("build_schedule: initial radius must be below pi/2");
  }
  const double cos_d = std::cos(init_radius);
  if (eta > cos_d / gamma * (1.0 + 1e-12)) {
    throw std::invalid_argument("build_schedule: step size exceeds cos(D)/gamma");
  }

  ScheduleParams p;
  p.step_size = eta;
  p.init_radius = init_radius;
  p.growth = mu;
  p.smoothness = gamma;
  p.epsilon = epsilon;
  p.sigma = std::max(1.0 - cos_d * mu * eta, 0.5);
  const double root = std::sqrt(p.sigma);
  p.k_const = 2.0 / root;
  p.theta = root * (1.0 - root) / 4.0;
  const double root_xi = p.theta * p.k_const + root;
  p.xi = root_xi * root_xi;
  if (!(p.xi < 1.0) || root_xi > std::sqrt((1.0 + p.sigma) / 2.0) * (1.0 + 1e-15)) {
    throw std::logic_error("build_schedule: contraction constants out of range");
  }
  const double log_ratio = std::log(init_radius * init_radius / (epsilon * epsilon));
  p.horizon = log_ratio <= 0 ? 0 : static_cast<int>(std::ceil(log_ratio / (1.0 - p.xi)));
  return p;
}

RadiusSchedule RadiusSchedule::from(const ScheduleParams& params) {
  return RadiusSchedule{params.smoothness * params.k_const * params.init_radius,
                        std::sqrt(params.xi)};
}

double RadiusSchedule::at(int t) const { return base * std::pow(ratio, t); }

}  // namespace qrgd
