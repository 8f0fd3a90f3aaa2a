#include "evasion/engagement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "evasion/errors.hpp"
#include "evasion/format.hpp"
#include "evasion/random.hpp"

namespace evasion {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void require(bool ok, const char* key, const char* message) {
  if (!ok) throw ConfigError(std::string("scenario.") + key, 0, message);
}

void require_aero(const SimplifiedAeroModel& aero, const char* prefix) {
  const std::string p = prefix;
  if (!std::isfinite(aero.axial_accel)) {
    throw ConfigError(p + ".axial_accel", 0, "must be finite");
  }
  if (!(aero.lateral_gain > 0.0)) {
    throw ConfigError(p + ".lateral_gain", 0, "must be > 0");
  }
  if (!(aero.drag_penalty >= 0.0)) {
    throw ConfigError(p + ".drag_penalty", 0, "must be >= 0");
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  require(dt > 0.0 && std::isfinite(dt), "dt", "must be > 0");
  require(range_m > 0.0, "range_m", "must be > 0");
  require(pfv_altitude_m > 0.0, "pfv_altitude_m", "must be > 0");
  require(std::abs(los_elevation_deg) < 90.0, "los_elevation_deg",
          "must be inside (-90, 90)");
  require(efv_speed_mps > 0.0, "efv_speed_mps", "must be > 0");
  require(pfv_speed_mps > 0.0, "pfv_speed_mps", "must be > 0");
  require(std::abs(efv_initial_aoa_deg) <= kEfvAoaLimitDeg,
          "efv_initial_aoa_deg", "must be within [-16, 16]");
  require(std::abs(efv_initial_heel_deg) <= kEfvHeelLimitDeg,
          "efv_initial_heel_deg", "must be within [-90, 90]");
  require(std::abs(pfv_initial_aoa_deg) <= kPfvAngleLimitDeg,
          "pfv_initial_aoa_deg", "must be within [-20, 20]");
  require(std::abs(pfv_initial_sideslip_deg) <= kPfvAngleLimitDeg,
          "pfv_initial_sideslip_deg", "must be within [-20, 20]");
  require(efv_mass_kg > 0.0, "efv_mass_kg", "must be > 0");
  require(pfv_mass_kg > 0.0, "pfv_mass_kg", "must be > 0");
  require(alpha_rate_limit_deg > 0.0, "alpha_rate_limit_deg", "must be > 0");
  require(gamma_rate_limit_deg > 0.0, "gamma_rate_limit_deg", "must be > 0");
  require(capture_radius_m > 0.0, "capture_radius_m", "must be > 0");
  require(max_steps > 0, "max_steps", "must be > 0");
  require(efv_position_jitter_m >= 0.0, "efv_position_jitter_m",
          "must be >= 0");
  require(efv_heading_jitter_deg >= 0.0, "efv_heading_jitter_deg",
          "must be >= 0");
  require(virtual_dt_factor >= 1, "virtual_dt_factor", "must be >= 1");
  require(virtual_max_steps > 0, "virtual_max_steps", "must be > 0");
  require_aero(efv_aero, "efv_aero");
  require_aero(pfv_aero, "pfv_aero");
  if (!(pn.k1 > 0.0)) throw ConfigError("pn.k1", 0, "must be > 0");
  if (!(pn.k2 > 0.0)) throw ConfigError("pn.k2", 0, "must be > 0");
}

World initial_world(const ScenarioConfig& sc, std::uint64_t seed) {
  sc.validate();
  const double lat = sc.latitude_deg * kDegToRad;
  const double lon = sc.longitude_deg * kDegToRad;
  const GeoVector up{std::cos(lat) * std::cos(lon),
                     std::cos(lat) * std::sin(lon), std::sin(lat)};
  const GeoVector east{-std::sin(lon), std::cos(lon), 0.0};
  const GeoVector north = cross(up, east);
  const double az = sc.los_azimuth_deg * kDegToRad;
  const GeoVector horizontal = std::cos(az) * north + std::sin(az) * east;
  const GeoVector side = cross(horizontal, up);

  const double el = sc.los_elevation_deg * kDegToRad;
  const GeoVector los_dir = std::cos(el) * horizontal + std::sin(el) * up;

  Rng rng(seed);
  GeoVector jitter;
  double yaw_jitter = 0.0;
  double pitch_jitter = 0.0;
  if (sc.efv_position_jitter_m > 0.0) {
    jitter = GeoVector{standard_normal(rng), standard_normal(rng),
                       standard_normal(rng)} *
             sc.efv_position_jitter_m;
  }
  if (sc.efv_heading_jitter_deg > 0.0) {
    yaw_jitter = standard_normal(rng) * sc.efv_heading_jitter_deg;
    pitch_jitter = standard_normal(rng) * sc.efv_heading_jitter_deg;
  }

  World w;
  w.params.dt = sc.dt;
  w.params.efv_aero = sc.efv_aero;
  w.params.pfv_aero = sc.pfv_aero;
  w.params.pn = sc.pn;

  w.pfv.position = (kEarthRadius + sc.pfv_altitude_m) * up;
  w.pfv.velocity = sc.pfv_speed_mps * los_dir;
  w.pfv.mass = sc.pfv_mass_kg;

  w.efv.position = w.pfv.position + sc.range_m * los_dir + jitter;
  // Reciprocal line of sight, then yaw about local up and pitch toward up.
  const double yaw = (sc.efv_heading_yaw_deg + yaw_jitter) * kDegToRad;
  const double pitch = (sc.efv_heading_pitch_deg + pitch_jitter) * kDegToRad;
  const GeoVector back = -horizontal;
  const GeoVector heading_h = std::cos(yaw) * back + std::sin(yaw) * side;
  const double efv_el = -el + pitch;
  const GeoVector heading = std::cos(efv_el) * heading_h + std::sin(efv_el) * up;
  w.efv.velocity = sc.efv_speed_mps * heading;
  w.efv.mass = sc.efv_mass_kg;
  validate(w.efv);
  validate(w.pfv);

  w.basis = LaunchBasis::at_launch(w.pfv.position, w.efv.position);
  w.efv_cmd = EfvCommand(sc.efv_initial_aoa_deg, sc.efv_initial_heel_deg);
  w.pfv_cmd = PfvCommand(sc.pfv_initial_aoa_deg, sc.pfv_initial_sideslip_deg);
  w.distance = norm(w.efv.position - w.pfv.position);
  return w;
}

Observation observe(const VehicleState& efv, const VehicleState& pfv,
                    const EfvCommand& prev_cmd, const LaunchBasis& basis) {
  const GeoVector rel_pos = basis.to_local(efv.position - pfv.position);
  const GeoVector rel_vel = basis.to_local(efv.velocity - pfv.velocity);
  return {rel_pos.x / kObsPositionScale,
          rel_pos.y / kObsPositionScale,
          rel_pos.z / kObsPositionScale,
          rel_vel.x / kObsVelocityScale,
          rel_vel.y / kObsVelocityScale,
          rel_vel.z / kObsVelocityScale,
          prev_cmd.composite_aoa() / kEfvAoaLimitDeg,
          prev_cmd.heel() / kEfvHeelLimitDeg};
}

EfvCommand apply_action(const EfvCommand& prev_cmd, const ActionDelta& raw,
                        const RateLimits& limits) {
  if (std::isnan(raw.d_alpha) || std::isnan(raw.d_gamma)) {
    throw NumericFault("non-finite action", -1);
  }
  const double da = std::clamp(raw.d_alpha, -limits.alpha_deg, limits.alpha_deg);
  const double dg = std::clamp(raw.d_gamma, -limits.gamma_deg, limits.gamma_deg);
  return EfvCommand(
      std::clamp(prev_cmd.composite_aoa() + da, -kEfvAoaLimitDeg,
                 kEfvAoaLimitDeg),
      std::clamp(prev_cmd.heel() + dg, -kEfvHeelLimitDeg, kEfvHeelLimitDeg));
}

World engagement_step(const World& w, const EfvCommand& efv_cmd) {
  const DynamicsParams& p = w.params;
  const std::int64_t index = w.step + 1;
  const GeoVector& fallback_up = w.basis.y_axis();
  World next = w;

  // Stage 2: evader moves under its new command.
  next.efv_cmd = efv_cmd;
  next.efv = integrate_step(
      w.efv,
      [&](const GeoVector& r, const GeoVector& v) {
        return efv_acceleration({r, v, w.efv.mass}, efv_cmd, p.efv_aero,
                                fallback_up);
      },
      p.dt, index);

  // Stage 3: pursuer guidance from the previous-instant states.
  const LosAngles los = los_angles(
      launch_frame_offset(w.pfv.position, w.basis, w.efv.position));
  const double since_last = w.last_los ? w.time - w.last_los_time : p.dt;
  const PfvCommand pfv_cmd = pn_step(w.last_los, los, since_last, p.pn);
  next.last_los = los;
  next.last_los_time = w.time;
  next.pfv_cmd = pfv_cmd;

  // Stage 4: pursuer moves.
  next.pfv = integrate_step(
      w.pfv,
      [&](const GeoVector& r, const GeoVector& v) {
        return pfv_acceleration({r, v, w.pfv.mass}, pfv_cmd, p.pfv_aero,
                                fallback_up);
      },
      p.dt, index);

  next.step = index;
  next.time = w.time + p.dt;
  next.distance = norm(next.efv.position - next.pfv.position);
  return next;
}

bool detect_termination(double d_prev, double d_curr) {
  return d_curr >= d_prev && d_prev > 0.0;
}

EpisodeLimits limits_for(const ScenarioConfig& sc) {
  EpisodeLimits limits;
  limits.max_steps = sc.max_steps;
  limits.capture_radius = sc.capture_radius_m;
  limits.rates = {sc.alpha_rate_limit_deg, sc.gamma_rate_limit_deg};
  return limits;
}

Episode::Episode(const ScenarioConfig& scenario, std::uint64_t seed,
                 bool record)
    : Episode(initial_world(scenario, seed), limits_for(scenario), record) {}

Episode::Episode(World start, const EpisodeLimits& limits, bool record)
    : world_(std::move(start)), limits_(limits), record_(record) {
  prev_distance_ = world_.distance;
  prev_efv_speed_ = world_.efv.speed();
  if (record_) record_row();
}

Observation Episode::observation() const {
  return observe(world_.efv, world_.pfv, world_.efv_cmd, world_.basis);
}

bool Episode::step(const ActionDelta& raw) {
  return step_command(apply_action(world_.efv_cmd, raw, limits_.rates));
}

bool Episode::step_command(const EfvCommand& cmd) {
  if (done()) throw UsageError("episode already terminated");
  world_ = engagement_step(world_, cmd);
  ++steps_;
  if (record_) record_row();

  const double d = world_.distance;
  if (detect_termination(prev_distance_, d)) {
    EngagementOutcome out;
    out.evasion_distance = prev_distance_;
    out.residual_velocity = prev_efv_speed_;
    out.termination_index = world_.step - 1;
    out.capture = prev_distance_ <= limits_.capture_radius;
    outcome_ = out;
  } else if (steps_ >= limits_.max_steps) {
    EngagementOutcome out;
    out.evasion_distance = d;
    out.residual_velocity = world_.efv.speed();
    out.termination_index = world_.step;
    out.truncated = true;
    outcome_ = out;
  }
  prev_distance_ = d;
  prev_efv_speed_ = world_.efv.speed();
  return done();
}

const EngagementOutcome& Episode::outcome() const {
  if (!outcome_) throw UsageError("episode has not terminated");
  return *outcome_;
}

void Episode::record_row() {
  trajectory_.push_back({world_.step, world_.time, world_.efv, world_.pfv,
                         world_.efv_cmd, world_.pfv_cmd, world_.distance});
}

EpisodeResult run_episode_from(const World& start, const EpisodeLimits& limits,
                               const ActionSource& policy) {
  Episode ep(start, limits, true);
  while (!ep.done()) ep.step(policy(ep.observation()));
  return {ep.trajectory(), ep.outcome()};
}

EpisodeResult run_episode(const ActionSource& policy,
                          const ScenarioConfig& scenario, std::uint64_t seed) {
  return run_episode_from(initial_world(scenario, seed), limits_for(scenario),
                          policy);
}

VirtualOutcome virtual_rollout(const World& snapshot,
                               const EfvCommand& frozen_cmd,
                               const VirtualOptions& options) {
  if (options.dt_factor < 1 || options.max_steps < 1) {
    throw UsageError("virtual rollout needs dt_factor >= 1 and max_steps >= 1");
  }
  World start = snapshot;
  start.params.dt *= options.dt_factor;
  start.efv_cmd = frozen_cmd;
  EpisodeLimits limits;
  limits.max_steps = options.max_steps;
  Episode ep(std::move(start), limits, false);
  while (!ep.done()) ep.step_command(frozen_cmd);
  return {ep.outcome().residual_velocity, ep.outcome().evasion_distance};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "step,t_s,ex,ey,ez,evx,evy,evz,px,py,pz,pvx,pvy,pvz,alpha_deg,"
         "gamma_deg,pfv_aoa_deg,pfv_sideslip_deg,dist_m\n";
  for (const auto& row : trajectory) {
    out << row.step << ',' << fmt_double(row.time);
    for (const GeoVector* v : {&row.efv.position, &row.efv.velocity,
                               &row.pfv.position, &row.pfv.velocity}) {
      out << ',' << fmt_double(v->x) << ',' << fmt_double(v->y) << ','
          << fmt_double(v->z);
    }
    out << ',' << fmt_double(row.efv_cmd.composite_aoa()) << ','
        << fmt_double(row.efv_cmd.heel()) << ',' << fmt_double(row.pfv_cmd.aoa())
        << ',' << fmt_double(row.pfv_cmd.sideslip()) << ','
        << fmt_double(row.distance) << '\n';
  }
}

}  // namespace evasion
