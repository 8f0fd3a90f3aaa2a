#include "evasion/guidance.hpp"

#include <algorithm>
#include <cmath>

namespace evasion {

void PnConfig::validate() const {
  if (!(k1 > 0.0) || !std::isfinite(k1)) throw Error("pn.k1 must be > 0");
  if (!(k2 > 0.0) || !std::isfinite(k2)) throw Error("pn.k2 must be > 0");
}

Overloads pn_overloads(double eps_rate, double eta_rate, const PnConfig& cfg) {
  return {cfg.k1 * eps_rate, cfg.k1 * eta_rate};
}

PfvCommand overloads_to_command(const Overloads& n, const PnConfig& cfg) {
  auto limit = [](double angle) {
    if (std::isnan(angle)) throw NumericFault("non-finite PN command", -1);
    return std::clamp(angle, -kPfvAngleLimitDeg, kPfvAngleLimitDeg);
  };
  return PfvCommand(limit(cfg.k2 * n.n_y), limit(cfg.k2 * n.n_z));
}

PfvCommand pn_step(const std::optional<LosAngles>& prev_los,
                   const LosAngles& curr_los, double dt, const PnConfig& cfg) {
  if (!prev_los) {
    if (!(dt > 0.0)) throw InvalidStepError("PN step needs dt > 0");
    return PfvCommand(0.0, 0.0);
  }
  const auto [eps_rate, eta_rate] = los_rates(*prev_los, curr_los, dt);
  return overloads_to_command(pn_overloads(eps_rate, eta_rate, cfg), cfg);
}

}  // namespace evasion
