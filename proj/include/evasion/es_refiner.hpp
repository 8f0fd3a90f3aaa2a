#ifndef EVASION_ES_REFINER_HPP_
#define EVASION_ES_REFINER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "evasion/engagement.hpp"
#include "evasion/policy_net.hpp"
#include "evasion/random.hpp"

namespace evasion {

struct ESConfig {
  int generations = 50;           // g_max
  int seeds_per_generation = 50;  // s_max
  double mu = 0.0;
  double sigma = 0.1;  // standard deviation of the weight noise
  double safe_distance = 30.0;
  std::uint64_t rng_seed = 7;

  void validate() const;
};

struct CandidateOutcome {
  double evasion_distance = 0.0;
  double residual_velocity = 0.0;
  friend bool operator==(const CandidateOutcome&,
                         const CandidateOutcome&) = default;
};

struct EvolutionRow {
  std::int64_t attempt = 0;
  double evasion_distance = 0.0;
  double residual_velocity = 0.0;
  std::string note;
};

struct EvolutionRecord {
  std::vector<EvolutionRow> rows;
};

// Adds N(mu, sigma^2) to every network weight; log_std is left alone.
PolicyParameters perturb(const PolicyParameters& params, double mu,
                         double sigma, Rng& rng);

// One mean-action episode on the scenario as given.
CandidateOutcome evaluate_candidate(const PolicyParameters& params,
                                    const ScenarioConfig& scenario,
                                    std::uint64_t scenario_seed = 0);

// Strictly faster and outside the safe distance.
bool accept(const CandidateOutcome& candidate,
            const CandidateOutcome& incumbent, double safe_distance);

struct RefineResult {
  PolicyParameters best;
  CandidateOutcome best_outcome;
  EvolutionRecord record;
  std::int64_t evaluations = 0;  // includes the initial evaluation
  std::int64_t failed_evaluations = 0;
};

struct RefineOptions {
  int workers = 1;
  // Attempt index and outcome for every candidate, in index order.
  std::function<void(std::int64_t, const CandidateOutcome&, bool)> on_attempt;
};

// Greedy hill climbing: each generation draws s_max perturbations of the
// incumbent, evaluates them (possibly in parallel) and adopts accepted
// candidates in index order. Candidates are evaluated on the nominal
// (jitter-free) scenario.
RefineResult refine(const PolicyParameters& initial, const ESConfig& cfg,
                    const ScenarioConfig& scenario,
                    const RefineOptions& options = {});

void write_evolution_csv(std::ostream& out, const EvolutionRecord& record);

}  // namespace evasion

#endif  // EVASION_ES_REFINER_HPP_
