#pragma once

namespace qrgd {

/// Constants of the quantized descent schedule. All nodes derive the same
/// values from the broadcast (gamma, mu, D, eta, epsilon).
struct ScheduleParams {
  double step_size = 0;    // eta
  double init_radius = 0;  // D, bound on the initial intrinsic distance
  double growth = 0;       // mu, quadratic-growth constant (half the eigengap)
  double smoothness = 0;   // gamma
  double sigma = 0;        // contraction of exact descent, clamped to >= 1/2
  double k_const = 0;
  double theta = 0;        // relative quantization error per round
  double xi = 0;           // contraction of squared distance per round
  double epsilon = 0;
  int horizon = 0;         // rounds after setup
};

ScheduleParams build_schedule(double gamma, double mu, double init_radius, double eta,
                              double epsilon);

/// R(t) = base * ratio^t with base = gamma K D and ratio = sqrt(xi).
struct RadiusSchedule {
  double base = 0;
  double ratio = 0;

  static RadiusSchedule from(const ScheduleParams& params);
  double at(int t) const;
};

}  // namespace qrgd
