#include "evasion/frames.hpp"

#include <numbers>

#include "evasion/dynamics.hpp"
#include "evasion/errors.hpp"

namespace evasion {

GeoVector normalized(const GeoVector& a) {
  const double n = norm(a);
  if (!(n > 0.0)) throw DegenerateGeometryError("cannot normalize zero vector");
  return a / n;
}

bool LaunchBasis::orthonormal(double tol) const {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      if (!(std::abs(dot(axes[i], axes[j]) - expected) <= tol)) return false;
    }
  }
  return true;
}

LaunchBasis LaunchBasis::at_launch(const GeoVector& pursuer_position,
                                   const GeoVector& evader_position) {
  const GeoVector up = normalized(pursuer_position);
  const GeoVector los = evader_position - pursuer_position;
  const GeoVector horizontal = los - dot(los, up) * up;
  if (!(norm(horizontal) > 1e-9 * norm(los))) {
    throw DegenerateGeometryError(
        "initial line of sight is vertical; launch frame undefined");
  }
  LaunchBasis basis;
  basis.axes[0] = normalized(horizontal);
  basis.axes[1] = up;
  basis.axes[2] = cross(basis.axes[0], basis.axes[1]);
  return basis;
}

GeoVector launch_frame_offset(const GeoVector& r_pursuer,
                              const LaunchBasis& basis,
                              const GeoVector& r_evader) {
  if (!basis.orthonormal()) {
    throw InvalidFrameError("launch basis is not orthonormal");
  }
  return basis.to_local(r_evader - r_pursuer);
}

LosAngles los_angles(const GeoVector& offset) {
  if (!(norm(offset) > 0.0)) {
    throw DegenerateGeometryError("line of sight undefined for zero offset");
  }
  LosAngles out;
  out.epsilon = std::atan2(offset.y, std::hypot(offset.x, offset.z));
  out.eta = std::atan2(-offset.z, offset.x);
  // atan2 may return -pi for a signed zero; the range is (-pi, pi].
  if (out.eta <= -std::numbers::pi) out.eta = std::numbers::pi;
  return out;
}

RelativeState relative_state(const VehicleState& evader,
                             const VehicleState& pursuer) {
  RelativeState rel;
  rel.d_vec = evader.position - pursuer.position;
  rel.v_rel = evader.velocity - pursuer.velocity;
  rel.distance = norm(rel.d_vec);
  return rel;
}

std::pair<double, double> los_rates(const LosAngles& prev,
                                    const LosAngles& curr, double dt) {
  if (!(dt > 0.0)) throw InvalidStepError("LOS rate needs dt > 0");
  const double d_eps = curr.epsilon - prev.epsilon;
  const double d_eta = std::remainder(curr.eta - prev.eta,
                                      2.0 * std::numbers::pi);
  return {d_eps / dt, d_eta / dt};
}

}  // namespace evasion
