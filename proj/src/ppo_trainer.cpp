#include "evasion/ppo_trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>
#include <ostream>

#include "evasion/errors.hpp"
#include "evasion/format.hpp"
#include "evasion/parallel.hpp"

namespace evasion {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2 pi)
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-5;

double los_magnitude(const LosAngles& a) {
  return std::sqrt(a.epsilon * a.epsilon + a.eta * a.eta);
}

void adam_step(std::span<double> params, std::span<const double> grad,
               AdamState& state, double lr) {
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.t = 0;
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * grad[i];
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
  }
}

void clip_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double n = std::sqrt(sq);
  if (n > max_norm && n > 0.0) {
    const double scale = max_norm / n;
    for (double& g : grad) g *= scale;
  }
}

std::uint64_t batch_digest(const Batch& batch) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& t : batch.transitions) {
    for (double o : t.observation) mix(o);
    mix(t.action[0]);
    mix(t.action[1]);
    mix(t.reward);
  }
  return h;
}

std::array<double, 2> actor_mean(const PolicyParameters& actor,
                                 const Observation& obs,
                                 ForwardCache* cache = nullptr) {
  const auto out = forward(actor.net, obs, cache);
  return {out[0], out[1]};
}

}  // namespace

void RewardConfig::validate() const {
  if (!(safe_distance > 0.0)) {
    throw ConfigError("reward.safe_distance", 0, "must be > 0");
  }
  if (!std::isfinite(kv_on)) throw ConfigError("reward.kv_on", 0, "must be finite");
  if (!std::isfinite(pe_weight)) {
    throw ConfigError("reward.pe_weight", 0, "must be finite");
  }
  if (!std::isfinite(pv_weight)) {
    throw ConfigError("reward.pv_weight", 0, "must be finite");
  }
  if (virtual_every < 1) {
    throw ConfigError("reward.virtual_every", 0, "must be >= 1");
  }
}

void PPOConfig::validate() const {
  auto fail = [](const char* key, const char* msg) {
    throw ConfigError(std::string("ppo.") + key, 0, msg);
  };
  if (total_steps < 0) fail("total_steps", "must be >= 0");
  if (!(base_lr > 0.0)) fail("base_lr", "must be > 0");
  if (!(lr_exponent >= 1.0)) fail("lr_exponent", "must be >= 1");
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) fail("clip_ratio", "must be in (0, 1)");
  if (!(discount > 0.0 && discount <= 1.0)) fail("discount", "must be in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    fail("gae_lambda", "must be in [0, 1]");
  }
  if (rollout_length < 1) fail("rollout_length", "must be >= 1");
  if (minibatch_size < 1) fail("minibatch_size", "must be >= 1");
  if (epochs_per_update < 1) fail("epochs_per_update", "must be >= 1");
  if (!(value_loss_weight >= 0.0)) fail("value_loss_weight", "must be >= 0");
  if (!(entropy_weight >= 0.0)) fail("entropy_weight", "must be >= 0");
  if (!(max_grad_norm > 0.0)) fail("max_grad_norm", "must be > 0");
  if (checkpoint_every < 0) fail("checkpoint_every", "must be >= 0");
  if (eval_episodes < 1) fail("eval_episodes", "must be >= 1");
}

StepRewardParts step_reward_parts(const LosAngles& los_prev,
                                  const LosAngles& los_curr, double dt,
                                  const VirtualOutcome& prospective,
                                  double v_ref, const RewardConfig& cfg) {
  if (!(dt > 0.0)) throw InvalidStepError("step reward needs dt > 0");
  StepRewardParts parts;
  parts.los_term =
      cfg.pe_weight * (los_magnitude(los_curr) - los_magnitude(los_prev)) / dt;
  if (v_ref > 0.0) {
    const double kd =
        std::clamp(prospective.distance / cfg.safe_distance, 0.0, 1.0);
    parts.prospective_term = cfg.pv_weight * kd * prospective.velocity / v_ref;
  }
  return parts;
}

double step_reward(const LosAngles& los_prev, const LosAngles& los_curr,
                   double dt, const VirtualOutcome& prospective, double v_ref,
                   const RewardConfig& cfg) {
  return step_reward_parts(los_prev, los_curr, dt, prospective, v_ref, cfg)
      .total();
}

double final_reward(double evasion_distance, double residual_velocity,
                    const RewardConfig& cfg) {
  const double kv = evasion_distance > cfg.safe_distance ? cfg.kv_on : 0.0;
  const double kd =
      std::clamp(evasion_distance / cfg.safe_distance, 0.0, 1.0);
  return kv * residual_velocity + kd * cfg.safe_distance;
}

double lr_schedule(std::int64_t total_steps, std::int64_t executed_steps,
                   double base_lr, double exponent) {
  if (total_steps <= 0) {
    throw ScheduleExhaustedError("learning-rate schedule needs S_T > 0");
  }
  if (executed_steps < 0 || executed_steps > total_steps) {
    throw ScheduleExhaustedError("executed steps outside [0, S_T]");
  }
  const double remaining =
      static_cast<double>(total_steps - executed_steps) /
      static_cast<double>(total_steps);
  return base_lr * std::pow(remaining, exponent);
}

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const std::uint8_t> dones,
                      double bootstrap_value, double discount,
                      double gae_lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw ShapeError("compute_gae: rewards, values and dones differ in length");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + discount * next_value * live - values[i];
    next_adv = delta + discount * gae_lambda * live * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
    next_value = values[i];
  }
  return out;
}

void normalize_advantages(std::span<double> adv) {
  if (adv.empty()) return;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  for (double& a : adv) a = (a - mean) / (sd + 1e-8);
}

double gaussian_log_prob(const std::array<double, 2>& u,
                         const std::array<double, 2>& mean,
                         const std::array<double, 2>& log_std) {
  double lp = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double z = (u[k] - mean[k]) * std::exp(-log_std[k]);
    lp += -0.5 * z * z - log_std[k] - 0.5 * kLog2Pi;
  }
  return lp;
}

double gaussian_entropy(const std::array<double, 2>& log_std) {
  return log_std[0] + log_std[1] + (1.0 + kLog2Pi);
}

ActionDelta squash_action(const std::array<double, 2>& u,
                          const RateLimits& limits) {
  return {std::tanh(u[0]) * limits.alpha_deg,
          std::tanh(u[1]) * limits.gamma_deg};
}

ActionSource mean_action_policy(const PolicyParameters& actor,
                                const RateLimits& limits) {
  return [actor, limits](const Observation& obs) {
    return squash_action(actor_mean(actor, obs), limits);
  };
}

Learner make_learner(const Architecture& actor_arch, std::uint64_t seed) {
  actor_arch.validate(kObservationSize, kActionSize);
  Learner l;
  l.actor = init_policy(actor_arch, derive_seed(seed, 0));
  Architecture critic_arch = actor_arch;
  critic_arch.widths.back() = 1;
  l.critic = init_network(critic_arch, derive_seed(seed, 1));
  return l;
}

double batch_ratio_deviation(const PolicyParameters& actor,
                             const Batch& batch) {
  double worst = 0.0;
  for (const auto& t : batch.transitions) {
    const double lp =
        gaussian_log_prob(t.action, actor_mean(actor, t.observation), actor.log_std);
    worst = std::max(worst, std::abs(std::exp(lp - t.log_prob) - 1.0));
  }
  return worst;
}

UpdateResult ppo_update(const Learner& learner, const Batch& batch,
                        const PPOConfig& cfg, double lr,
                        std::uint64_t shuffle_seed) {
  const std::size_t n = batch.transitions.size();
  if (n == 0) throw UsageError("ppo_update needs a nonempty batch");
  if (batch.advantages.size() != n || batch.returns.size() != n) {
    throw ShapeError("ppo_update: advantages/returns do not match the batch");
  }
  if (!(lr >= 0.0)) throw UsageError("ppo_update needs lr >= 0");

  UpdateResult result{learner, {}};
  Learner& L = result.learner;
  UpdateStats& stats = result.stats;
  stats.initial_ratio_max_deviation = batch_ratio_deviation(L.actor, batch);

  std::vector<double> adv = batch.advantages;
  normalize_advantages(adv);

  const std::size_t n_actor = L.actor.net.weights.size();
  const std::size_t n_critic = L.critic.weights.size();
  std::vector<double> g_actor(n_actor + 2);
  std::vector<double> g_critic(n_critic);
  std::vector<double> actor_flat;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(shuffle_seed);
  ForwardCache cache_a;
  ForwardCache cache_c;

  double ratio_sum = 0.0;
  double clipped = 0.0;
  double kl_sum = 0.0;
  double samples = 0.0;
  const std::size_t mb = static_cast<std::size_t>(cfg.minibatch_size);
  const double c = cfg.clip_ratio;

  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t stop = std::min(n, start + mb);
      const double inv_b = 1.0 / static_cast<double>(stop - start);
      std::fill(g_actor.begin(), g_actor.end(), 0.0);
      std::fill(g_critic.begin(), g_critic.end(), 0.0);
      const std::array<double, 2> sigma = {std::exp(L.actor.log_std[0]),
                                           std::exp(L.actor.log_std[1])};
      double policy_loss = 0.0;
      double value_loss = 0.0;

      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t j = order[k];
        const Transition& t = batch.transitions[j];
        const auto mean = actor_mean(L.actor, t.observation, &cache_a);
        const double lp = gaussian_log_prob(t.action, mean, L.actor.log_std);
        const double log_ratio = lp - t.log_prob;
        const double ratio = std::exp(log_ratio);
        const double a = adv[j];
        const double unclipped = ratio * a;
        const double clipped_obj = std::clamp(ratio, 1.0 - c, 1.0 + c) * a;
        policy_loss -= std::min(unclipped, clipped_obj) * inv_b;
        ratio_sum += ratio;
        kl_sum += (ratio - 1.0) - log_ratio;
        if (std::abs(ratio - 1.0) > c) clipped += 1.0;
        samples += 1.0;

        if (unclipped <= clipped_obj) {
          const double dl_dlp = -a * ratio * inv_b;
          std::array<double, 2> upstream{};
          for (int q = 0; q < 2; ++q) {
            const double diff = t.action[q] - mean[q];
            const double s2 = sigma[q] * sigma[q];
            upstream[q] = dl_dlp * diff / s2;
            g_actor[n_actor + q] += dl_dlp * (diff * diff / s2 - 1.0);
          }
          backward_accumulate(L.actor.net, cache_a, upstream,
                              std::span<double>(g_actor.data(), n_actor));
        }

        const double v = forward(L.critic, t.observation, &cache_c)[0];
        const double err = v - batch.returns[j];
        value_loss += cfg.value_loss_weight * err * err * inv_b;
        const std::array<double, 1> up_v{2.0 * cfg.value_loss_weight * err * inv_b};
        backward_accumulate(L.critic, cache_c, up_v, g_critic);
      }
      for (int q = 0; q < 2; ++q) g_actor[n_actor + q] -= cfg.entropy_weight;

      if (!std::isfinite(policy_loss) || !std::isfinite(value_loss)) {
        throw NumericFault("non-finite PPO loss",
                           static_cast<std::int64_t>(batch_digest(batch)));
      }
      stats.policy_loss += policy_loss;
      stats.value_loss += value_loss;
      ++stats.minibatches;

      clip_norm(g_actor, cfg.max_grad_norm);
      clip_norm(g_critic, cfg.max_grad_norm);
      if (lr > 0.0) {
        actor_flat = flatten(L.actor);
        adam_step(actor_flat, g_actor, L.actor_opt, lr);
        L.actor = unflatten(L.actor.net.arch, actor_flat);
        adam_step(L.critic.weights, g_critic, L.critic_opt, lr);
      }
    }
  }
  stats.mean_ratio = ratio_sum / samples;
  stats.clip_fraction = clipped / samples;
  stats.approx_kl = kl_sum / samples;
  stats.policy_loss /= stats.minibatches;
  stats.value_loss /= stats.minibatches;
  stats.entropy = gaussian_entropy(L.actor.log_std);
  return result;
}

EpisodeData run_policy_episode(const PolicyParameters& actor,
                               const Network* critic,
                               const ScenarioConfig& scenario,
                               const RewardConfig& reward,
                               std::uint64_t scenario_seed,
                               std::uint64_t policy_seed,
                               const PolicyEpisodeOptions& options) {
  if (options.collect && critic == nullptr) {
    throw UsageError("collecting transitions needs a critic");
  }
  Episode ep(scenario, scenario_seed, options.record);
  const EpisodeLimits& limits = ep.limits();
  const double dt = scenario.dt;
  const double v_ref = ep.world().efv.speed();
  const VirtualOptions virt_opts{scenario.virtual_dt_factor,
                                 scenario.virtual_max_steps};
  Rng rng(policy_seed);

  auto current_los = [](const World& w, const LosAngles& fallback) {
    if (!(w.distance > 0.0)) return fallback;
    return los_angles(launch_frame_offset(w.pfv.position, w.basis, w.efv.position));
  };
  LosAngles los_prev = current_los(ep.world(), LosAngles{});
  VirtualOutcome prospective;

  EpisodeData data;
  while (!ep.done()) {
    Transition tr;
    tr.observation = ep.observation();
    const auto mean = actor_mean(actor, tr.observation);
    std::array<double, 2> u = mean;
    if (options.stochastic) {
      for (int q = 0; q < 2; ++q) {
        u[q] = mean[q] + std::exp(actor.log_std[q]) * standard_normal(rng);
      }
    }
    tr.action = u;
    if (options.collect) {
      tr.log_prob = gaussian_log_prob(u, mean, actor.log_std);
      tr.value = forward(*critic, tr.observation)[0];
    }

    const bool finished = ep.step(squash_action(u, limits.rates));
    const World& w = ep.world();
    const LosAngles los_curr = current_los(w, los_prev);
    if ((ep.steps_taken() - 1) % reward.virtual_every == 0) {
      prospective = virtual_rollout(w, w.efv_cmd, virt_opts);
    }
    double r = step_reward(los_prev, los_curr, dt, prospective, v_ref, reward);
    los_prev = los_curr;
    data.sum_step_reward += r;
    if (finished) {
      const auto& out = ep.outcome();
      data.final_reward =
          final_reward(out.evasion_distance, out.residual_velocity, reward);
      r += data.final_reward;
    }
    tr.reward = r;
    tr.done = finished;
    if (options.collect) data.transitions.push_back(tr);
  }
  data.outcome = ep.outcome();
  data.ret = data.sum_step_reward + data.final_reward;
  data.steps = ep.steps_taken();
  if (options.record) data.trajectory = ep.trajectory();
  return data;
}

TrainResult train(const ScenarioConfig& scenario, const Architecture& arch,
                  const PPOConfig& ppo, const RewardConfig& reward,
                  std::uint64_t seed, const TrainOptions& options) {
  scenario.validate();
  ppo.validate();
  reward.validate();

  TrainResult result;
  result.learner = make_learner(arch, seed);
  Learner& learner = result.learner;
  const std::int64_t total = ppo.total_steps;
  std::int64_t executed = 0;
  std::int64_t episode = 0;
  std::int64_t update_index = 0;
  const int workers = std::max(1, options.workers);

  while (executed < total) {
    const double lr = lr_schedule(total, executed, ppo.base_lr, ppo.lr_exponent);
    const std::int64_t target = std::min(ppo.rollout_length, total - executed);

    // Episodes are generated in parallel waves and consumed in index order
    // until the rollout target is reached; results past the target are
    // discarded so the batch does not depend on the worker count.
    std::vector<EpisodeData> taken;
    std::int64_t collected = 0;
    while (collected < target) {
      std::vector<EpisodeData> wave(static_cast<std::size_t>(workers));
      const std::int64_t base = episode;
      parallel_for(wave.size(), workers, [&](std::size_t i) {
        const auto idx = static_cast<std::uint64_t>(base) + i;
        wave[i] = run_policy_episode(
            learner.actor, &learner.critic, scenario, reward,
            derive_seed(seed, 1000 + 2 * idx), derive_seed(seed, 1001 + 2 * idx),
            {true, true, false});
      });
      for (auto& ep : wave) {
        if (collected >= target) break;
        collected += ep.steps;
        taken.push_back(std::move(ep));
        ++episode;
      }
    }
    executed += collected;

    Batch batch;
    for (auto& ep : taken) {
      std::vector<double> rewards, values;
      std::vector<std::uint8_t> dones;
      for (const auto& t : ep.transitions) {
        rewards.push_back(t.reward);
        values.push_back(t.value);
        dones.push_back(t.done ? 1 : 0);
      }
      const GaeResult gae =
          compute_gae(rewards, values, dones, 0.0, ppo.discount, ppo.gae_lambda);
      batch.advantages.insert(batch.advantages.end(), gae.advantages.begin(),
                              gae.advantages.end());
      batch.returns.insert(batch.returns.end(), gae.returns.begin(),
                           gae.returns.end());
      batch.transitions.insert(batch.transitions.end(), ep.transitions.begin(),
                               ep.transitions.end());
    }

    const std::int64_t first_episode = episode - static_cast<std::int64_t>(taken.size());
    for (std::size_t i = 0; i < taken.size(); ++i) {
      EpisodeLogRow row;
      row.episode = first_episode + static_cast<std::int64_t>(i);
      row.steps = taken[i].steps;
      row.evasion_distance = taken[i].outcome.evasion_distance;
      row.residual_velocity = taken[i].outcome.residual_velocity;
      row.ret = taken[i].ret;
      row.sum_step_reward = taken[i].sum_step_reward;
      row.final_reward = taken[i].final_reward;
      row.lr = lr;
      result.history.push_back(row);
      if (options.on_episode) options.on_episode(row);
    }

    UpdateResult upd = ppo_update(learner, batch, ppo, lr,
                                  derive_seed(seed, 500000 + update_index++));
    learner = std::move(upd.learner);
    result.updates.push_back(upd.stats);

    if (ppo.checkpoint_every > 0 && options.on_checkpoint) {
      for (std::int64_t e = first_episode + 1; e <= episode; ++e) {
        if (e % ppo.checkpoint_every == 0) options.on_checkpoint(e, learner);
      }
    }
  }
  result.steps_consumed = executed;
  return result;
}

std::uint64_t evaluation_seed(std::uint64_t seed, int index) {
  return derive_seed(seed, (std::uint64_t{1} << 40) |
                               static_cast<std::uint64_t>(index));
}

EvaluationSummary evaluate_policy(const PolicyParameters& actor,
                                  const ScenarioConfig& scenario,
                                  const RewardConfig& reward,
                                  std::uint64_t seed, int episodes,
                                  int workers) {
  EvaluationSummary summary;
  summary.episodes.resize(static_cast<std::size_t>(episodes));
  parallel_for(summary.episodes.size(), workers, [&](std::size_t i) {
    summary.episodes[i] = run_policy_episode(
        actor, nullptr, scenario, reward,
        evaluation_seed(seed, static_cast<int>(i)), 0, {false, false, false});
  });
  double total = 0.0;
  int evaded = 0;
  for (const auto& ep : summary.episodes) {
    total += ep.ret;
    if (ep.outcome.evasion_distance > reward.safe_distance) ++evaded;
  }
  summary.mean_return = total / episodes;
  summary.evasion_fraction = static_cast<double>(evaded) / episodes;
  return summary;
}

void write_training_log_header(std::ostream& out) {
  out << "episode,steps,evasion_distance_m,residual_velocity_mps,return,lr\n";
}

void write_training_log_row(std::ostream& out, const EpisodeLogRow& row) {
  out << row.episode << ',' << row.steps << ','
      << fmt_double(row.evasion_distance) << ','
      << fmt_double(row.residual_velocity) << ',' << fmt_double(row.ret) << ','
      << fmt_double(row.lr) << '\n';
}

std::optional<std::size_t> select_best(const std::vector<SweepRow>& rows,
                                       double safe_distance) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].status != "ok") continue;
    if (!(rows[i].evasion_distance > safe_distance)) continue;
    if (!best || rows[i].residual_velocity > rows[*best].residual_velocity) {
      best = i;
    }
  }
  return best;
}

std::vector<SweepRow> sweep(const std::vector<SweepCell>& grid,
                            const ScenarioConfig& scenario,
                            const PPOConfig& ppo, const RewardConfig& reward,
                            std::uint64_t seed, const SweepOptions& options) {
  if (grid.empty()) throw UsageError("sweep needs a nonempty grid");
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SweepRow row;
    row.index = static_cast<int>(i + 1);
    row.arch = grid[i].arch;
    row.lr_exponent = grid[i].lr_exponent;
    row.base_lr = grid[i].base_lr;
    PPOConfig cell_cfg = ppo;
    cell_cfg.lr_exponent = grid[i].lr_exponent;
    cell_cfg.base_lr = grid[i].base_lr;
    try {
      TrainOptions topts;
      topts.workers = options.workers;
      const TrainResult res = train(scenario, grid[i].arch, cell_cfg, reward,
                                    seed, topts);
      row.steps = res.steps_consumed;
      if (!res.history.empty()) {
        row.evasion_distance = res.history.back().evasion_distance;
        row.residual_velocity = res.history.back().residual_velocity;
      }
      const EpisodeData eval = run_policy_episode(
          res.learner.actor, nullptr, scenario.nominal(), reward, 0, 0,
          {false, false, false});
      row.eval_evasion_distance = eval.outcome.evasion_distance;
      row.eval_residual_velocity = eval.outcome.residual_velocity;
      if (options.on_cell) options.on_cell(row, &res);
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
      if (options.on_cell) options.on_cell(row, nullptr);
    }
    rows.push_back(std::move(row));
  }
  if (const auto best = select_best(rows, reward.safe_distance)) {
    rows[*best].best = true;
  }
  return rows;
}

std::vector<SweepCell> make_sweep_grid(const std::vector<Architecture>& archs,
                                       const std::vector<double>& exponents,
                                       const std::vector<double>& base_lrs) {
  std::vector<SweepCell> grid;
  for (double k : exponents) {
    for (double lr : base_lrs) {
      for (const auto& a : archs) grid.push_back({a, k, lr});
    }
  }
  return grid;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "index,architecture,activation,k,base_lr,steps,evasion_distance_m,"
         "residual_velocity_mps,eval_evasion_distance_m,"
         "eval_residual_velocity_mps,best,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.index << ",\"" << r.arch.to_string() << "\"," << r.activation
        << ',' << fmt_double(r.lr_exponent) << ',' << fmt_double(r.base_lr)
        << ',' << r.steps << ',' << fmt_double(r.evasion_distance) << ','
        << fmt_double(r.residual_velocity) << ','
        << fmt_double(r.eval_evasion_distance) << ','
        << fmt_double(r.eval_residual_velocity) << ',' << (r.best ? 1 : 0) << ','
        << status << '\n';
  }
}

}  // namespace evasion
