#ifndef EVASION_CONFIG_HPP_
#define EVASION_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "evasion/engagement.hpp"
#include "evasion/es_refiner.hpp"
#include "evasion/policy_net.hpp"
#include "evasion/ppo_trainer.hpp"

namespace evasion {

struct SweepGrid {
  std::vector<Architecture> architectures{
      {{8, 64, 64, 2}},      {{8, 128, 128, 2}},      {{8, 256, 256, 2}},
      {{8, 64, 64, 64, 2}},  {{8, 128, 128, 128, 2}}, {{8, 256, 256, 256, 2}}};
  std::vector<double> lr_exponents{2.0, 3.0};
  std::vector<double> base_lrs{1e-3, 1e-4};

  std::vector<SweepCell> cells() const {
    return make_sweep_grid(architectures, lr_exponents, base_lrs);
  }
};

struct RunConfig {
  ScenarioConfig scenario;
  RewardConfig reward;
  PPOConfig ppo;
  ESConfig es;
  Architecture architecture{{8, 256, 256, 256, 2}};
  SweepGrid sweep;
  std::string output_dir = "runs/default";
  std::uint64_t seed = 1;
  int workers = 1;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Text format, one `key = value` per line:
//
//   # comment
//   [scenario]
//   dt = 0.05
//   ppo.total_steps = 200000   # dotted keys work anywhere
//
// Sections: scenario, efv_aero, pfv_aero, pn, reward, ppo, es, network,
// sweep, run. Unknown or repeated keys and malformed values are errors.
// Architectures are written `[8, 64, 64, 2]`; lists use commas, the sweep
// architecture list uses semicolons.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
// Throws ConfigError (line 0) when the file cannot be opened.
RunConfig load_config(const std::string& path);

// Every key at shortest round-trip precision; parses back to the same
// configuration.
void write_config(std::ostream& out, const RunConfig& cfg);
std::string config_to_string(const RunConfig& cfg);

// All known dotted keys in echo order.
std::vector<std::string> config_keys();

}  // namespace evasion

#endif  // EVASION_CONFIG_HPP_
