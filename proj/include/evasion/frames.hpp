#ifndef EVASION_FRAMES_HPP_
#define EVASION_FRAMES_HPP_

#include <array>
#include <cmath>
#include <utility>

namespace evasion {

// Cartesian vector in the geocentric frame (OX, OY, OZ). Meters for
// positions, meters per second for velocities.
struct GeoVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  GeoVector& operator+=(const GeoVector& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  GeoVector& operator-=(const GeoVector& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  GeoVector& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend GeoVector operator+(GeoVector a, const GeoVector& b) { return a += b; }
  friend GeoVector operator-(GeoVector a, const GeoVector& b) { return a -= b; }
  friend GeoVector operator-(const GeoVector& a) { return {-a.x, -a.y, -a.z}; }
  friend GeoVector operator*(GeoVector a, double s) { return a *= s; }
  friend GeoVector operator*(double s, GeoVector a) { return a *= s; }
  friend GeoVector operator/(const GeoVector& a, double s) {
    return {a.x / s, a.y / s, a.z / s};
  }
  friend bool operator==(const GeoVector&, const GeoVector&) = default;

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double dot(const GeoVector& a, const GeoVector& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline GeoVector cross(const GeoVector& a, const GeoVector& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Scaled hypot; no intermediate overflow.
inline double norm(const GeoVector& a) { return std::hypot(a.x, a.y, a.z); }

// Throws DegenerateGeometryError on a zero vector.
GeoVector normalized(const GeoVector& a);

// Line-of-sight angles in the launch frame.
struct LosAngles {
  double epsilon = 0.0;  // pitch, [-pi/2, pi/2]
  double eta = 0.0;      // yaw, (-pi, pi]

  friend bool operator==(const LosAngles&, const LosAngles&) = default;
};

// Orthonormal frame given by its three axes expressed in geocentric
// coordinates (the columns of the rotation matrix).
struct LaunchBasis {
  std::array<GeoVector, 3> axes{GeoVector{1, 0, 0}, GeoVector{0, 1, 0},
                                GeoVector{0, 0, 1}};

  const GeoVector& x_axis() const { return axes[0]; }
  const GeoVector& y_axis() const { return axes[1]; }
  const GeoVector& z_axis() const { return axes[2]; }

  bool orthonormal(double tol = 1e-9) const;

  // Launch frame at the pursuer's initial position: Y' along the local
  // radial (up), X' along the initial line of sight projected onto the local
  // horizontal, Z' = X' x Y'.
  static LaunchBasis at_launch(const GeoVector& pursuer_position,
                               const GeoVector& evader_position);

  // Geocentric components of a vector given in this frame.
  GeoVector to_geocentric(const GeoVector& local) const {
    return local.x * axes[0] + local.y * axes[1] + local.z * axes[2];
  }
  // Launch-frame components of a geocentric vector.
  GeoVector to_local(const GeoVector& geo) const {
    return {dot(axes[0], geo), dot(axes[1], geo), dot(axes[2], geo)};
  }
};

struct RelativeState {
  GeoVector d_vec;  // evader minus pursuer
  GeoVector v_rel;
  double distance = 0.0;
};

struct VehicleState;

// (r_E - r_P) in the shifted launch frame. Throws InvalidFrameError when the
// basis is not orthonormal to 1e-9.
GeoVector launch_frame_offset(const GeoVector& r_pursuer,
                              const LaunchBasis& basis,
                              const GeoVector& r_evader);

// epsilon = atan2(dy', hypot(dx', dz')), eta = atan2(-dz', dx').
// Throws DegenerateGeometryError for a zero offset.
LosAngles los_angles(const GeoVector& offset_launch);

RelativeState relative_state(const VehicleState& evader,
                             const VehicleState& pursuer);

// Backward differences; eta is differenced on the shortest arc.
// Throws InvalidStepError when dt <= 0.
std::pair<double, double> los_rates(const LosAngles& prev,
                                    const LosAngles& curr, double dt);

}  // namespace evasion

#endif  // EVASION_FRAMES_HPP_
