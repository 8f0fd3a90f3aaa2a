#ifndef EVASION_GUIDANCE_HPP_
#define EVASION_GUIDANCE_HPP_

#include <optional>

#include "evasion/dynamics.hpp"
#include "evasion/frames.hpp"

namespace evasion {

// Proportional-navigation gains. Overloads are in units of g, so with
// k1 = N * Vc / g the law is classical PN with navigation ratio N, and k2 is
// the angle (deg) producing one g of lateral acceleration.
struct PnConfig {
  double k1 = 70.0;     // s
  double k2 = 10.0898;  // deg per unit overload

  // Throws Error unless both gains are positive and finite.
  void validate() const;
};

struct Overloads {
  double n_y = 0.0;  // normal channel
  double n_z = 0.0;  // lateral channel
};

Overloads pn_overloads(double eps_rate, double eta_rate, const PnConfig& cfg);

// Scales by k2 and clips each channel to +-20 deg.
PfvCommand overloads_to_command(const Overloads& n, const PnConfig& cfg);

// los_rates -> pn_overloads -> overloads_to_command. Without a previous
// sample (first step) the command is zero.
PfvCommand pn_step(const std::optional<LosAngles>& prev_los,
                   const LosAngles& curr_los, double dt, const PnConfig& cfg);

}  // namespace evasion

#endif  // EVASION_GUIDANCE_HPP_
