#ifndef EVASION_DYNAMICS_HPP_
#define EVASION_DYNAMICS_HPP_

#include <cstdint>
#include <optional>

#include "evasion/errors.hpp"
#include "evasion/frames.hpp"

namespace evasion {

inline constexpr double kEarthMu = 3.986004418e14;  // m^3/s^2
inline constexpr double kEarthRadius = 6371000.0;   // m
inline constexpr double kStandardGravity = 9.80665;  // m/s^2

inline constexpr double kEfvAoaLimitDeg = 16.0;
inline constexpr double kEfvHeelLimitDeg = 90.0;
inline constexpr double kPfvAngleLimitDeg = 20.0;

struct VehicleState {
  GeoVector position;
  GeoVector velocity;
  double mass = 1.0;

  double speed() const { return norm(velocity); }
  double altitude() const { return norm(position) - kEarthRadius; }
};

// Throws Error when the state is below the surface or the mass is not
// positive.
void validate(const VehicleState& state);

// Escape-vehicle guidance pair. Out-of-range values are rejected at
// construction.
class EfvCommand {
 public:
  EfvCommand() = default;
  EfvCommand(double composite_aoa_deg, double heel_deg);

  double composite_aoa() const { return composite_aoa_; }
  double heel() const { return heel_; }

  friend bool operator==(const EfvCommand&, const EfvCommand&) = default;

 private:
  double composite_aoa_ = 0.0;
  double heel_ = 0.0;
};

// Pursuit-vehicle guidance pair, both channels limited to +-20 degrees.
class PfvCommand {
 public:
  PfvCommand() = default;
  PfvCommand(double aoa_deg, double sideslip_deg);

  double aoa() const { return aoa_; }
  double sideslip() const { return sideslip_; }

  friend bool operator==(const PfvCommand&, const PfvCommand&) = default;

 private:
  double aoa_ = 0.0;
  double sideslip_ = 0.0;
};

// Acceleration-level force model standing in for the control and
// aerodynamic forces:
//   axial   = axial_accel - drag_penalty * angle^2   along the velocity
//   lateral = lateral_gain * angle                   normal to the velocity
struct SimplifiedAeroModel {
  double axial_accel = 0.0;   // m/s^2
  double lateral_gain = 0.0;  // m/s^2 per degree
  double drag_penalty = 0.0;  // m/s^2 per degree^2
  bool gravity_enabled = true;

  // Throws Error if lateral_gain < 0 or drag_penalty < 0.
  void validate() const;
};

// Unit vectors attached to the velocity: along-track, "up-normal" (radial
// component orthogonal to velocity) and side-normal = up x along.
struct BodyAxes {
  GeoVector along;
  GeoVector up;
  GeoVector side;
};

// `fallback_up` replaces the radial direction when the velocity is (nearly)
// vertical. Throws DegenerateGeometryError for zero velocity.
BodyAxes body_axes(const GeoVector& position, const GeoVector& velocity,
                   const std::optional<GeoVector>& fallback_up = std::nullopt);

// Inverse-square central field. Throws DegenerateGeometryError at the origin.
GeoVector gravity(const GeoVector& position);

// arccos(cos(aoa) * cos(sideslip)) in degrees, signed like aoa.
double composite_angle(double aoa_deg, double sideslip_deg);

GeoVector efv_acceleration(
    const VehicleState& state, const EfvCommand& cmd,
    const SimplifiedAeroModel& aero,
    const std::optional<GeoVector>& fallback_up = std::nullopt);

// aoa drives the up-normal channel, sideslip the side-normal channel.
GeoVector pfv_acceleration(
    const VehicleState& state, const PfvCommand& cmd,
    const SimplifiedAeroModel& aero,
    const std::optional<GeoVector>& fallback_up = std::nullopt);

// Classical fourth-order Runge-Kutta step of (position, velocity) with the
// acceleration function evaluated at each stage; commands are held fixed by
// the caller. Throws InvalidStepError for dt <= 0 and NumericFault carrying
// `step_index` when an acceleration or the result is non-finite.
template <class AccelFn>
VehicleState integrate_step(const VehicleState& state, AccelFn&& accel,
                            double dt, std::int64_t step_index = 0) {
  if (!(dt > 0.0)) throw InvalidStepError("integration needs dt > 0");
  auto eval = [&](const GeoVector& r, const GeoVector& v) {
    const GeoVector a = accel(r, v);
    if (!a.finite()) throw NumericFault("non-finite acceleration", step_index);
    return a;
  };
  const GeoVector& r0 = state.position;
  const GeoVector& v0 = state.velocity;
  const double h = 0.5 * dt;

  const GeoVector a1 = eval(r0, v0);
  const GeoVector r2 = r0 + h * v0;
  const GeoVector v2 = v0 + h * a1;
  const GeoVector a2 = eval(r2, v2);
  const GeoVector r3 = r0 + h * v2;
  const GeoVector v3 = v0 + h * a2;
  const GeoVector a3 = eval(r3, v3);
  const GeoVector r4 = r0 + dt * v3;
  const GeoVector v4 = v0 + dt * a3;
  const GeoVector a4 = eval(r4, v4);

  VehicleState next = state;
  next.position = r0 + (dt / 6.0) * (v0 + 2.0 * v2 + 2.0 * v3 + v4);
  next.velocity = v0 + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  if (!next.position.finite() || !next.velocity.finite()) {
    throw NumericFault("non-finite state after integration", step_index);
  }
  return next;
}

}  // namespace evasion

#endif  // EVASION_DYNAMICS_HPP_
