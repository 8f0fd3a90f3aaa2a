#ifndef EVASION_PPO_TRAINER_HPP_
#define EVASION_PPO_TRAINER_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evasion/engagement.hpp"
#include "evasion/policy_net.hpp"
#include "evasion/random.hpp"

namespace evasion {

struct RewardConfig {
  double kv_on = 10.0;          // reward per m/s of residual velocity on evasion
  double safe_distance = 30.0;  // m
  double pe_weight = 0.01;      // LOS-rate shaping scale
  double pv_weight = 0.01;      // prospective-velocity shaping scale
  int virtual_every = 10;       // real steps between virtual rollouts

  void validate() const;
};

struct PPOConfig {
  std::int64_t total_steps = 3500000;  // S_T
  double base_lr = 1e-3;               // l_B
  double lr_exponent = 2.0;            // k
  double clip_ratio = 0.2;
  double discount = 0.999;
  double gae_lambda = 0.95;
  std::int64_t rollout_length = 4096;
  std::int64_t minibatch_size = 256;
  int epochs_per_update = 10;
  double value_loss_weight = 0.5;
  double entropy_weight = 0.0;
  double max_grad_norm = 0.5;
  std::int64_t checkpoint_every = 0;  // episodes; 0 disables
  int eval_episodes = 20;

  void validate() const;
};

struct StepRewardParts {
  double los_term = 0.0;          // pe_weight * d/dt sqrt(eps^2 + eta^2)
  double prospective_term = 0.0;  // pv_weight * clip(d/safe, 0, 1) * v / v_ref
  double total() const { return los_term + prospective_term; }
};

StepRewardParts step_reward_parts(const LosAngles& los_prev,
                                  const LosAngles& los_curr, double dt,
                                  const VirtualOutcome& prospective,
                                  double v_ref, const RewardConfig& cfg);

double step_reward(const LosAngles& los_prev, const LosAngles& los_curr,
                   double dt, const VirtualOutcome& prospective, double v_ref,
                   const RewardConfig& cfg);

// K_v * v + K_d * safe_distance with K_v = kv_on iff d > safe_distance and
// K_d = clip(d / safe_distance, 0, 1).
double final_reward(double evasion_distance, double residual_velocity,
                    const RewardConfig& cfg);

// l_B * ((S_T - S_E) / S_T)^k. Throws ScheduleExhaustedError for S_E > S_T.
double lr_schedule(std::int64_t total_steps, std::int64_t executed_steps,
                   double base_lr, double exponent);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over a rollout. dones[t] marks a
// terminal transition (no bootstrap past it); `bootstrap_value` is V of the
// state after the last transition when that one is not terminal. Advantages
// are not normalized here. Throws ShapeError on length mismatch.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones,
                      double bootstrap_value, double discount,
                      double gae_lambda);

// Zero mean, unit variance in place (no-op on constant input).
void normalize_advantages(std::span<double> advantages);

// Gaussian head: pre-squash sample u ~ N(mean, exp(log_std)^2), the applied
// delta is tanh(u) scaled to the per-step rate limits.
double gaussian_log_prob(const std::array<double, 2>& u,
                         const std::array<double, 2>& mean,
                         const std::array<double, 2>& log_std);
double gaussian_entropy(const std::array<double, 2>& log_std);
ActionDelta squash_action(const std::array<double, 2>& u,
                          const RateLimits& limits);

// Deterministic (mean) action source for a trained actor.
ActionSource mean_action_policy(const PolicyParameters& actor,
                                const RateLimits& limits);

struct Transition {
  Observation observation{};
  std::array<double, 2> action{};  // pre-squash sample
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
};

struct Batch {
  std::vector<Transition> transitions;
  std::vector<double> advantages;
  std::vector<double> returns;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

// Everything the optimizer carries between updates.
struct Learner {
  PolicyParameters actor;
  Network critic;
  AdamState actor_opt;
  AdamState critic_opt;
};

Learner make_learner(const Architecture& actor_arch, std::uint64_t seed);

struct UpdateStats {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double initial_ratio_max_deviation = 0.0;  // before the first step
  int minibatches = 0;
};

struct UpdateResult {
  Learner learner;
  UpdateStats stats;
};

// Clipped-surrogate PPO update (Adam, per-network gradient-norm clipping).
// Inputs are not modified. Throws NumericFault carrying a batch digest when
// a loss becomes non-finite.
UpdateResult ppo_update(const Learner& learner, const Batch& batch,
                        const PPOConfig& cfg, double lr,
                        std::uint64_t shuffle_seed);

// max |exp(logp_new - logp_old) - 1| over the batch.
double batch_ratio_deviation(const PolicyParameters& actor, const Batch& batch);

struct EpisodeData {
  std::vector<Transition> transitions;  // empty unless collected
  EngagementOutcome outcome;
  double sum_step_reward = 0.0;
  double final_reward = 0.0;
  double ret = 0.0;  // sum_step_reward + final_reward
  std::int64_t steps = 0;
  Trajectory trajectory;  // empty unless recorded
};

struct PolicyEpisodeOptions {
  bool stochastic = true;
  bool collect = true;  // keep transitions (needs a critic)
  bool record = false;  // keep the trajectory
};

// One episode under `actor` with the shaped reward. Stochastic episodes use
// `policy_seed`; `scenario_seed` drives the initial-state jitter.
EpisodeData run_policy_episode(const PolicyParameters& actor,
                               const Network* critic,
                               const ScenarioConfig& scenario,
                               const RewardConfig& reward,
                               std::uint64_t scenario_seed,
                               std::uint64_t policy_seed,
                               const PolicyEpisodeOptions& options);

struct EpisodeLogRow {
  std::int64_t episode = 0;
  std::int64_t steps = 0;
  double evasion_distance = 0.0;
  double residual_velocity = 0.0;
  double ret = 0.0;
  double lr = 0.0;
  double sum_step_reward = 0.0;
  double final_reward = 0.0;
};

struct TrainOptions {
  int workers = 1;
  std::function<void(const EpisodeLogRow&)> on_episode;
  // Called after every `checkpoint_every` episodes with the current learner.
  std::function<void(std::int64_t episode, const Learner&)> on_checkpoint;
};

struct TrainResult {
  Learner learner;
  std::vector<EpisodeLogRow> history;
  std::vector<UpdateStats> updates;
  std::int64_t steps_consumed = 0;
};

// Seed streams: initialization uses derive_seed(seed, 0/1), episode i uses
// derive_seed(seed, 1000 + 2i) for the scenario and +1 for the policy.
TrainResult train(const ScenarioConfig& scenario, const Architecture& arch,
                  const PPOConfig& ppo, const RewardConfig& reward,
                  std::uint64_t seed, const TrainOptions& options = {});

// Scenario seeds used for the evaluation set: derive_seed(seed, 1u << 40 | i).
std::uint64_t evaluation_seed(std::uint64_t seed, int index);

struct EvaluationSummary {
  std::vector<EpisodeData> episodes;
  double mean_return = 0.0;
  double evasion_fraction = 0.0;  // share with evasion_distance > safe
};

// Deterministic-policy evaluation over `episodes` jittered scenarios.
EvaluationSummary evaluate_policy(const PolicyParameters& actor,
                                  const ScenarioConfig& scenario,
                                  const RewardConfig& reward,
                                  std::uint64_t seed, int episodes,
                                  int workers = 1);

void write_training_log_header(std::ostream& out);
void write_training_log_row(std::ostream& out, const EpisodeLogRow& row);

struct SweepCell {
  Architecture arch;
  double lr_exponent = 2.0;
  double base_lr = 1e-3;
};

struct SweepRow {
  int index = 0;
  Architecture arch;
  std::string activation = "ReLU";
  double lr_exponent = 0.0;
  double base_lr = 0.0;
  std::int64_t steps = 0;
  double evasion_distance = 0.0;
  double residual_velocity = 0.0;
  // Mean-action policy on the nominal scenario.
  double eval_evasion_distance = 0.0;
  double eval_residual_velocity = 0.0;
  bool best = false;
  std::string status = "ok";
};

// Highest residual velocity among rows with evasion distance > safe_distance.
std::optional<std::size_t> select_best(const std::vector<SweepRow>& rows,
                                       double safe_distance);

struct SweepOptions {
  int workers = 1;
  std::function<void(const SweepRow&, const TrainResult*)> on_cell;
};

// Trains every cell; a failing cell is reported in its status column.
std::vector<SweepRow> sweep(const std::vector<SweepCell>& grid,
                            const ScenarioConfig& scenario,
                            const PPOConfig& ppo, const RewardConfig& reward,
                            std::uint64_t seed,
                            const SweepOptions& options = {});

// Grid ordering: architecture fastest, then base_lr, then exponent.
std::vector<SweepCell> make_sweep_grid(const std::vector<Architecture>& archs,
                                       const std::vector<double>& exponents,
                                       const std::vector<double>& base_lrs);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace evasion

#endif  // EVASION_PPO_TRAINER_HPP_
