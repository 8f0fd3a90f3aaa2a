#ifndef EVASION_ENGAGEMENT_HPP_
#define EVASION_ENGAGEMENT_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "evasion/dynamics.hpp"
#include "evasion/frames.hpp"
#include "evasion/guidance.hpp"

namespace evasion {

// Observation normalization constants.
inline constexpr double kObsPositionScale = 2000.0;  // m
inline constexpr double kObsVelocityScale = 100.0;   // m/s
inline constexpr std::size_t kObservationSize = 8;
inline constexpr std::size_t kActionSize = 2;

// Engagement setup. Geometry is built in the pursuer's launch frame: the
// pursuer sits at `pfv_altitude_m` above (latitude, longitude), the evader is
// `range_m` away along the line of sight (azimuth from north, elevation from
// the local horizontal). The pursuer flies along the line of sight, the
// evader along its reciprocal rotated by the heading offsets.
struct ScenarioConfig {
  double dt = 0.01;
  double range_m = 2000.0;
  double pfv_altitude_m = 10000.0;
  double latitude_deg = 40.0;
  double longitude_deg = 116.0;
  double los_azimuth_deg = 0.0;
  double los_elevation_deg = 0.0;

  double efv_speed_mps = 98.0640;
  double efv_heading_yaw_deg = 0.0;
  double efv_heading_pitch_deg = 0.0;
  double efv_initial_aoa_deg = 7.3443;
  double efv_initial_heel_deg = -0.3755;
  double efv_mass_kg = 1.0;
  SimplifiedAeroModel efv_aero{0.9434, kStandardGravity / 7.3443, 0.002, true};

  double pfv_speed_mps = 72.2426;
  double pfv_initial_aoa_deg = 10.0898;
  double pfv_initial_sideslip_deg = 0.2869;
  double pfv_mass_kg = 1.0;
  SimplifiedAeroModel pfv_aero{0.5792, kStandardGravity / 10.0898, 0.002,
                               true};
  PnConfig pn;

  double alpha_rate_limit_deg = 0.01;  // per step
  double gamma_rate_limit_deg = 0.01;  // per step
  double capture_radius_m = 30.0;
  std::int64_t max_steps = 200000;

  // Per-episode randomization of the evader's initial state (standard
  // deviations); zero gives the nominal scenario.
  double efv_position_jitter_m = 0.0;
  double efv_heading_jitter_deg = 0.0;

  // Virtual rollouts run at dt * virtual_dt_factor for at most
  // virtual_max_steps steps.
  int virtual_dt_factor = 10;
  std::int64_t virtual_max_steps = 5000;

  // Throws ConfigError naming the offending `scenario.*` key.
  void validate() const;

  ScenarioConfig nominal() const {
    ScenarioConfig copy = *this;
    copy.efv_position_jitter_m = 0.0;
    copy.efv_heading_jitter_deg = 0.0;
    return copy;
  }
};

struct RateLimits {
  double alpha_deg = 0.01;
  double gamma_deg = 0.01;
};

using Observation = std::array<double, kObservationSize>;

struct ActionDelta {
  double d_alpha = 0.0;  // deg
  double d_gamma = 0.0;  // deg
};

struct DynamicsParams {
  double dt = 0.01;
  SimplifiedAeroModel efv_aero;
  SimplifiedAeroModel pfv_aero;
  PnConfig pn;
};

// Complete simulation state; copying a World clones the engagement.
struct World {
  DynamicsParams params;
  LaunchBasis basis;
  VehicleState efv;
  VehicleState pfv;
  EfvCommand efv_cmd;
  PfvCommand pfv_cmd;
  std::optional<LosAngles> last_los;  // LOS sampled by the pursuer last step
  double last_los_time = 0.0;
  std::int64_t step = 0;
  double time = 0.0;
  double distance = 0.0;
};

struct EngagementOutcome {
  double evasion_distance = 0.0;   // d(t_{n-1}), m
  double residual_velocity = 0.0;  // |v_E(t_{n-1})|, m/s
  std::int64_t termination_index = 0;
  bool capture = false;
  bool truncated = false;
};

struct TrajectoryRow {
  std::int64_t step = 0;
  double time = 0.0;
  VehicleState efv;
  VehicleState pfv;
  EfvCommand efv_cmd;
  PfvCommand pfv_cmd;
  double distance = 0.0;
};

using Trajectory = std::vector<TrajectoryRow>;

// Builds the initial world; `seed` drives the optional jitter.
World initial_world(const ScenarioConfig& scenario, std::uint64_t seed = 0);

Observation observe(const VehicleState& efv, const VehicleState& pfv,
                    const EfvCommand& prev_cmd, const LaunchBasis& basis);

// Clips each delta to its per-step limit, adds it, then clips to the
// command ranges.
EfvCommand apply_action(const EfvCommand& prev_cmd, const ActionDelta& raw,
                        const RateLimits& limits);

// One pass of the four-stage loop with the evader command given: the evader
// integrates, the pursuer computes PN from the previous-instant states and
// integrates.
World engagement_step(const World& world, const EfvCommand& efv_cmd);

// d_curr >= d_prev and d_prev > 0.
bool detect_termination(double d_prev, double d_curr);

struct EpisodeLimits {
  std::int64_t max_steps = 200000;
  double capture_radius = 30.0;
  RateLimits rates;
};

// Stepper around a World that tracks termination and (optionally) records
// the trajectory. Used by run_episode, virtual_rollout and the trainer.
class Episode {
 public:
  Episode(const ScenarioConfig& scenario, std::uint64_t seed,
          bool record = true);
  Episode(World start, const EpisodeLimits& limits, bool record = true);

  Observation observation() const;

  // Returns true once the episode has finished. Throws UsageError when
  // called after termination.
  bool step(const ActionDelta& raw);
  bool step_command(const EfvCommand& cmd);

  bool done() const { return outcome_.has_value(); }
  const EngagementOutcome& outcome() const;
  const World& world() const { return world_; }
  const Trajectory& trajectory() const { return trajectory_; }
  std::int64_t steps_taken() const { return steps_; }
  const EpisodeLimits& limits() const { return limits_; }

 private:
  void record_row();

  World world_;
  EpisodeLimits limits_;
  bool record_;
  Trajectory trajectory_;
  std::int64_t steps_ = 0;
  double prev_distance_ = 0.0;
  double prev_efv_speed_ = 0.0;
  std::optional<EngagementOutcome> outcome_;
};

using ActionSource = std::function<ActionDelta(const Observation&)>;

struct EpisodeResult {
  Trajectory trajectory;
  EngagementOutcome outcome;
};

EpisodeResult run_episode(const ActionSource& policy,
                          const ScenarioConfig& scenario,
                          std::uint64_t seed = 0);

// Continues an existing world under `policy`.
EpisodeResult run_episode_from(const World& start, const EpisodeLimits& limits,
                               const ActionSource& policy);

struct VirtualOutcome {
  double velocity = 0.0;  // prospective residual velocity, m/s
  double distance = 0.0;  // prospective evasion distance, m
};

struct VirtualOptions {
  int dt_factor = 10;
  std::int64_t max_steps = 5000;
};

// Clones `snapshot`, holds `frozen_cmd` and runs to termination (or the
// virtual horizon) at dt * dt_factor.
VirtualOutcome virtual_rollout(const World& snapshot,
                               const EfvCommand& frozen_cmd,
                               const VirtualOptions& options);

EpisodeLimits limits_for(const ScenarioConfig& scenario);

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace evasion

#endif  // EVASION_ENGAGEMENT_HPP_
