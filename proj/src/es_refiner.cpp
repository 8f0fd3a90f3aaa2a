#include "evasion/es_refiner.hpp"

#include <cmath>
#include <optional>
#include <ostream>

#include "evasion/errors.hpp"
#include "evasion/format.hpp"
#include "evasion/parallel.hpp"
#include "evasion/ppo_trainer.hpp"

namespace evasion {

void ESConfig::validate() const {
  if (generations < 1) throw ConfigError("es.generations", 0, "must be >= 1");
  if (seeds_per_generation < 1) {
    throw ConfigError("es.seeds_per_generation", 0, "must be >= 1");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("es.sigma", 0, "must be >= 0");
  }
  if (!std::isfinite(mu)) throw ConfigError("es.mu", 0, "must be finite");
  if (!(safe_distance > 0.0)) {
    throw ConfigError("es.safe_distance", 0, "must be > 0");
  }
}

PolicyParameters perturb(const PolicyParameters& params, double mu,
                         double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw UsageError("perturb needs sigma >= 0");
  PolicyParameters out = params;
  for (double& w : out.net.weights) w += mu + sigma * standard_normal(rng);
  return out;
}

CandidateOutcome evaluate_candidate(const PolicyParameters& params,
                                    const ScenarioConfig& scenario,
                                    std::uint64_t scenario_seed) {
  Episode ep(scenario, scenario_seed, false);
  const ActionSource policy = mean_action_policy(params, ep.limits().rates);
  while (!ep.step(policy(ep.observation()))) {
  }
  return {ep.outcome().evasion_distance, ep.outcome().residual_velocity};
}

bool accept(const CandidateOutcome& candidate,
            const CandidateOutcome& incumbent, double safe_distance) {
  return candidate.residual_velocity > incumbent.residual_velocity &&
         candidate.evasion_distance > safe_distance;
}

RefineResult refine(const PolicyParameters& initial, const ESConfig& cfg,
                    const ScenarioConfig& scenario,
                    const RefineOptions& options) {
  cfg.validate();
  initial.net.validate();
  const ScenarioConfig nominal = scenario.nominal();

  RefineResult res;
  res.best = initial;
  res.best_outcome = evaluate_candidate(initial, nominal);
  res.evaluations = 1;
  EvolutionRow first{0, res.best_outcome.evasion_distance,
                     res.best_outcome.residual_velocity, "initial"};
  if (!(res.best_outcome.evasion_distance > cfg.safe_distance)) {
    first.note = "initial; violates safe distance";
  }
  res.record.rows.push_back(first);

  Rng rng(cfg.rng_seed);
  const auto s = static_cast<std::size_t>(cfg.seeds_per_generation);
  std::vector<PolicyParameters> candidates(s);
  std::vector<std::optional<CandidateOutcome>> outcomes(s);
  std::int64_t attempt = 0;

  for (int g = 0; g < cfg.generations; ++g) {
    for (std::size_t i = 0; i < s; ++i) {
      candidates[i] = perturb(res.best, cfg.mu, cfg.sigma, rng);
    }
    parallel_for(s, options.workers, [&](std::size_t i) {
      try {
        outcomes[i] = evaluate_candidate(candidates[i], nominal);
      } catch (const Error&) {
        outcomes[i].reset();
      }
    });
    for (std::size_t i = 0; i < s; ++i) {
      ++attempt;
      ++res.evaluations;
      bool ok = false;
      if (!outcomes[i]) {
        ++res.failed_evaluations;
      } else {
        ok = accept(*outcomes[i], res.best_outcome, cfg.safe_distance);
        if (ok) {
          res.best = std::move(candidates[i]);
          res.best_outcome = *outcomes[i];
          res.record.rows.push_back({attempt, outcomes[i]->evasion_distance,
                                     outcomes[i]->residual_velocity,
                                     "generation " + std::to_string(g + 1)});
        }
      }
      if (options.on_attempt && outcomes[i]) {
        options.on_attempt(attempt, *outcomes[i], ok);
      }
    }
  }
  return res;
}

void write_evolution_csv(std::ostream& out, const EvolutionRecord& record) {
  out << "attempt,evasion_distance_m,residual_velocity_mps,note\n";
  for (const auto& r : record.rows) {
    out << r.attempt << ',' << fmt_double(r.evasion_distance) << ','
        << fmt_double(r.residual_velocity) << ',' << r.note << '\n';
  }
}

}  // namespace evasion
