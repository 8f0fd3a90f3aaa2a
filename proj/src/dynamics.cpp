#include "evasion/dynamics.hpp"

#include <numbers>
#include <string>

namespace evasion {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void check_range(double value, double limit, const char* what) {
  if (!(value >= -limit && value <= limit)) {
    throw CommandRangeError(std::string(what) + " " + std::to_string(value) +
                            " deg outside [-" + std::to_string(limit) + ", " +
                            std::to_string(limit) + "]");
  }
}

}  // namespace

void validate(const VehicleState& state) {
  if (!state.position.finite() || !state.velocity.finite()) {
    throw Error("vehicle state is not finite");
  }
  if (!(norm(state.position) > kEarthRadius)) {
    throw Error("vehicle position is below the Earth's surface");
  }
  if (!(state.mass > 0.0)) throw Error("vehicle mass must be positive");
}

EfvCommand::EfvCommand(double composite_aoa_deg, double heel_deg)
    : composite_aoa_(composite_aoa_deg), heel_(heel_deg) {
  check_range(composite_aoa_deg, kEfvAoaLimitDeg, "composite angle of attack");
  check_range(heel_deg, kEfvHeelLimitDeg, "angle of heel");
}

PfvCommand::PfvCommand(double aoa_deg, double sideslip_deg)
    : aoa_(aoa_deg), sideslip_(sideslip_deg) {
  check_range(aoa_deg, kPfvAngleLimitDeg, "angle of attack");
  check_range(sideslip_deg, kPfvAngleLimitDeg, "angle of sideslip");
}

void SimplifiedAeroModel::validate() const {
  if (!std::isfinite(axial_accel)) throw Error("axial_accel must be finite");
  if (!(lateral_gain >= 0.0)) throw Error("lateral_gain must be >= 0");
  if (!(drag_penalty >= 0.0)) throw Error("drag_penalty must be >= 0");
}

BodyAxes body_axes(const GeoVector& position, const GeoVector& velocity,
                   const std::optional<GeoVector>& fallback_up) {
  const double speed = norm(velocity);
  if (!(speed > 0.0)) {
    throw DegenerateGeometryError("body axes undefined for zero velocity");
  }
  BodyAxes axes;
  axes.along = velocity / speed;

  auto orthogonal_part = [&](const GeoVector& d) {
    return d - dot(d, axes.along) * axes.along;
  };
  constexpr double kMinNormal = 1e-9;
  GeoVector up = orthogonal_part(normalized(position));
  if (!(norm(up) > kMinNormal) && fallback_up) {
    up = orthogonal_part(*fallback_up);
  }
  if (!(norm(up) > kMinNormal)) {
    // Any deterministic perpendicular will do.
    const GeoVector probe = std::abs(axes.along.x) < 0.9 ? GeoVector{1, 0, 0}
                                                         : GeoVector{0, 1, 0};
    up = orthogonal_part(probe);
  }
  axes.up = normalized(up);
  axes.side = cross(axes.up, axes.along);
  return axes;
}

GeoVector gravity(const GeoVector& position) {
  const double r = norm(position);
  if (!(r > 0.0)) throw DegenerateGeometryError("gravity singular at origin");
  return position * (-kEarthMu / (r * r * r));
}

double composite_angle(double aoa_deg, double sideslip_deg) {
  if (sideslip_deg == 0.0) return aoa_deg;
  const double magnitude =
      aoa_deg == 0.0
          ? std::abs(sideslip_deg)
          : kRadToDeg * std::acos(std::cos(aoa_deg * kDegToRad) *
                                  std::cos(sideslip_deg * kDegToRad));
  return aoa_deg < 0.0 ? -magnitude : magnitude;
}

GeoVector efv_acceleration(const VehicleState& state, const EfvCommand& cmd,
                           const SimplifiedAeroModel& aero,
                           const std::optional<GeoVector>& fallback_up) {
  const BodyAxes axes = body_axes(state.position, state.velocity, fallback_up);
  const double angle = cmd.composite_aoa();
  const double heel = cmd.heel() * kDegToRad;

  GeoVector accel = (aero.axial_accel - aero.drag_penalty * angle * angle) *
                    axes.along;
  const GeoVector lift_dir = std::cos(heel) * axes.up + std::sin(heel) * axes.side;
  accel += (aero.lateral_gain * angle) * lift_dir;
  if (aero.gravity_enabled) accel += gravity(state.position);
  return accel;
}

GeoVector pfv_acceleration(const VehicleState& state, const PfvCommand& cmd,
                           const SimplifiedAeroModel& aero,
                           const std::optional<GeoVector>& fallback_up) {
  const BodyAxes axes = body_axes(state.position, state.velocity, fallback_up);
  const double total = composite_angle(cmd.aoa(), cmd.sideslip());

  GeoVector accel = (aero.axial_accel - aero.drag_penalty * total * total) *
                    axes.along;
  accel += (aero.lateral_gain * cmd.aoa()) * axes.up;
  accel += (aero.lateral_gain * cmd.sideslip()) * axes.side;
  if (aero.gravity_enabled) accel += gravity(state.position);
  return accel;
}

}  // namespace evasion
