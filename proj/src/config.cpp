#include "evasion/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "evasion/errors.hpp"
#include "evasion/format.hpp"

namespace evasion {
namespace {

struct BadValue {
  std::string message;
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) {
    throw BadValue{"expected a number, got '" + s + "'"};
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& s) {
  Int v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) {
    throw BadValue{"expected an integer, got '" + s + "'"};
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw BadValue{"expected true or false, got '" + s + "'"};
}

Architecture parse_arch(std::string s) {
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    s = s.substr(1, s.size() - 2);
  }
  Architecture a;
  for (const auto& part : split(s, ',')) {
    a.widths.push_back(parse_int<std::size_t>(part));
  }
  try {
    a.validate(kObservationSize, kActionSize);
  } catch (const ShapeError& e) {
    throw BadValue{e.what()};
  }
  return a;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part));
  return out;
}

std::string list_to_string(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_double(v[i]);
  }
  return s;
}

struct Entry {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename Field>
Entry num(std::string key, Field field) {
  return {std::move(key),
          [field](const RunConfig& c) { return fmt_double(field(const_cast<RunConfig&>(c))); },
          [field](RunConfig& c, const std::string& v) { field(c) = parse_double(v); }};
}

template <typename Int, typename Field>
Entry integer(std::string key, Field field) {
  return {std::move(key),
          [field](const RunConfig& c) {
            return std::to_string(field(const_cast<RunConfig&>(c)));
          },
          [field](RunConfig& c, const std::string& v) {
            field(c) = parse_int<Int>(v);
          }};
}

template <typename Field>
Entry boolean(std::string key, Field field) {
  return {std::move(key),
          [field](const RunConfig& c) {
            return std::string(field(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [field](RunConfig& c, const std::string& v) { field(c) = parse_bool(v); }};
}

#define EV_FIELD(expr) [](RunConfig& c) -> auto& { return c.expr; }

void add_aero(std::vector<Entry>& e, const std::string& p,
              SimplifiedAeroModel ScenarioConfig::*m) {
  auto aero = [m](RunConfig& c) -> SimplifiedAeroModel& { return c.scenario.*m; };
  e.push_back(num(p + ".axial_accel",
                  [aero](RunConfig& c) -> auto& { return aero(c).axial_accel; }));
  e.push_back(num(p + ".lateral_gain",
                  [aero](RunConfig& c) -> auto& { return aero(c).lateral_gain; }));
  e.push_back(num(p + ".drag_penalty",
                  [aero](RunConfig& c) -> auto& { return aero(c).drag_penalty; }));
  e.push_back(boolean(p + ".gravity_enabled", [aero](RunConfig& c) -> auto& {
    return aero(c).gravity_enabled;
  }));
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> e;
    e.push_back(num("scenario.dt", EV_FIELD(scenario.dt)));
    e.push_back(num("scenario.range_m", EV_FIELD(scenario.range_m)));
    e.push_back(num("scenario.pfv_altitude_m", EV_FIELD(scenario.pfv_altitude_m)));
    e.push_back(num("scenario.latitude_deg", EV_FIELD(scenario.latitude_deg)));
    e.push_back(num("scenario.longitude_deg", EV_FIELD(scenario.longitude_deg)));
    e.push_back(num("scenario.los_azimuth_deg", EV_FIELD(scenario.los_azimuth_deg)));
    e.push_back(num("scenario.los_elevation_deg", EV_FIELD(scenario.los_elevation_deg)));
    e.push_back(num("scenario.efv_speed_mps", EV_FIELD(scenario.efv_speed_mps)));
    e.push_back(num("scenario.efv_heading_yaw_deg", EV_FIELD(scenario.efv_heading_yaw_deg)));
    e.push_back(num("scenario.efv_heading_pitch_deg", EV_FIELD(scenario.efv_heading_pitch_deg)));
    e.push_back(num("scenario.efv_initial_aoa_deg", EV_FIELD(scenario.efv_initial_aoa_deg)));
    e.push_back(num("scenario.efv_initial_heel_deg", EV_FIELD(scenario.efv_initial_heel_deg)));
    e.push_back(num("scenario.efv_mass_kg", EV_FIELD(scenario.efv_mass_kg)));
    e.push_back(num("scenario.pfv_speed_mps", EV_FIELD(scenario.pfv_speed_mps)));
    e.push_back(num("scenario.pfv_initial_aoa_deg", EV_FIELD(scenario.pfv_initial_aoa_deg)));
    e.push_back(num("scenario.pfv_initial_sideslip_deg", EV_FIELD(scenario.pfv_initial_sideslip_deg)));
    e.push_back(num("scenario.pfv_mass_kg", EV_FIELD(scenario.pfv_mass_kg)));
    e.push_back(num("scenario.alpha_rate_limit_deg", EV_FIELD(scenario.alpha_rate_limit_deg)));
    e.push_back(num("scenario.gamma_rate_limit_deg", EV_FIELD(scenario.gamma_rate_limit_deg)));
    e.push_back(num("scenario.capture_radius_m", EV_FIELD(scenario.capture_radius_m)));
    e.push_back(integer<std::int64_t>("scenario.max_steps", EV_FIELD(scenario.max_steps)));
    e.push_back(num("scenario.efv_position_jitter_m", EV_FIELD(scenario.efv_position_jitter_m)));
    e.push_back(num("scenario.efv_heading_jitter_deg", EV_FIELD(scenario.efv_heading_jitter_deg)));
    e.push_back(integer<int>("scenario.virtual_dt_factor", EV_FIELD(scenario.virtual_dt_factor)));
    e.push_back(integer<std::int64_t>("scenario.virtual_max_steps", EV_FIELD(scenario.virtual_max_steps)));
    add_aero(e, "efv_aero", &ScenarioConfig::efv_aero);
    add_aero(e, "pfv_aero", &ScenarioConfig::pfv_aero);
    e.push_back(num("pn.k1", EV_FIELD(scenario.pn.k1)));
    e.push_back(num("pn.k2", EV_FIELD(scenario.pn.k2)));

    e.push_back(num("reward.kv_on", EV_FIELD(reward.kv_on)));
    e.push_back(num("reward.safe_distance", EV_FIELD(reward.safe_distance)));
    e.push_back(num("reward.pe_weight", EV_FIELD(reward.pe_weight)));
    e.push_back(num("reward.pv_weight", EV_FIELD(reward.pv_weight)));
    e.push_back(integer<int>("reward.virtual_every", EV_FIELD(reward.virtual_every)));

    e.push_back(integer<std::int64_t>("ppo.total_steps", EV_FIELD(ppo.total_steps)));
    e.push_back(num("ppo.base_lr", EV_FIELD(ppo.base_lr)));
    e.push_back(num("ppo.lr_exponent", EV_FIELD(ppo.lr_exponent)));
    e.push_back(num("ppo.clip_ratio", EV_FIELD(ppo.clip_ratio)));
    e.push_back(num("ppo.discount", EV_FIELD(ppo.discount)));
    e.push_back(num("ppo.gae_lambda", EV_FIELD(ppo.gae_lambda)));
    e.push_back(integer<std::int64_t>("ppo.rollout_length", EV_FIELD(ppo.rollout_length)));
    e.push_back(integer<std::int64_t>("ppo.minibatch_size", EV_FIELD(ppo.minibatch_size)));
    e.push_back(integer<int>("ppo.epochs_per_update", EV_FIELD(ppo.epochs_per_update)));
    e.push_back(num("ppo.value_loss_weight", EV_FIELD(ppo.value_loss_weight)));
    e.push_back(num("ppo.entropy_weight", EV_FIELD(ppo.entropy_weight)));
    e.push_back(num("ppo.max_grad_norm", EV_FIELD(ppo.max_grad_norm)));
    e.push_back(integer<std::int64_t>("ppo.checkpoint_every", EV_FIELD(ppo.checkpoint_every)));
    e.push_back(integer<int>("ppo.eval_episodes", EV_FIELD(ppo.eval_episodes)));

    e.push_back(integer<int>("es.generations", EV_FIELD(es.generations)));
    e.push_back(integer<int>("es.seeds_per_generation", EV_FIELD(es.seeds_per_generation)));
    e.push_back(num("es.mu", EV_FIELD(es.mu)));
    e.push_back(num("es.sigma", EV_FIELD(es.sigma)));
    e.push_back(num("es.safe_distance", EV_FIELD(es.safe_distance)));
    e.push_back(integer<std::uint64_t>("es.rng_seed", EV_FIELD(es.rng_seed)));

    e.push_back({"network.architecture",
                 [](const RunConfig& c) { return c.architecture.to_string(); },
                 [](RunConfig& c, const std::string& v) {
                   c.architecture = parse_arch(v);
                 }});
    e.push_back({"sweep.architectures",
                 [](const RunConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.sweep.architectures.size(); ++i) {
                     if (i) s += "; ";
                     s += c.sweep.architectures[i].to_string();
                   }
                   return s;
                 },
                 [](RunConfig& c, const std::string& v) {
                   c.sweep.architectures.clear();
                   for (const auto& part : split(v, ';')) {
                     c.sweep.architectures.push_back(parse_arch(part));
                   }
                 }});
    e.push_back({"sweep.lr_exponents",
                 [](const RunConfig& c) { return list_to_string(c.sweep.lr_exponents); },
                 [](RunConfig& c, const std::string& v) {
                   c.sweep.lr_exponents = parse_list(v);
                 }});
    e.push_back({"sweep.base_lrs",
                 [](const RunConfig& c) { return list_to_string(c.sweep.base_lrs); },
                 [](RunConfig& c, const std::string& v) {
                   c.sweep.base_lrs = parse_list(v);
                 }});

    e.push_back({"run.output_dir",
                 [](const RunConfig& c) { return c.output_dir; },
                 [](RunConfig& c, const std::string& v) {
                   if (v.empty()) throw BadValue{"must not be empty"};
                   c.output_dir = v;
                 }});
    e.push_back(integer<std::uint64_t>("run.seed", EV_FIELD(seed)));
    e.push_back(integer<int>("run.workers", EV_FIELD(workers)));
    return e;
  }();
  return table;
}

#undef EV_FIELD

const Entry* find_entry(const std::string& key) {
  for (const auto& e : entries()) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::string section_of(const std::string& key) {
  return key.substr(0, key.find('.'));
}

}  // namespace

void RunConfig::validate() const {
  scenario.validate();
  reward.validate();
  ppo.validate();
  es.validate();
  try {
    architecture.validate(kObservationSize, kActionSize);
  } catch (const ShapeError& e) {
    throw ConfigError("network.architecture", 0, e.what());
  }
  if (sweep.architectures.empty()) {
    throw ConfigError("sweep.architectures", 0, "must not be empty");
  }
  if (sweep.lr_exponents.empty()) {
    throw ConfigError("sweep.lr_exponents", 0, "must not be empty");
  }
  for (double k : sweep.lr_exponents) {
    if (!(k >= 1.0)) throw ConfigError("sweep.lr_exponents", 0, "must be >= 1");
  }
  if (sweep.base_lrs.empty()) {
    throw ConfigError("sweep.base_lrs", 0, "must not be empty");
  }
  for (double lr : sweep.base_lrs) {
    if (!(lr > 0.0)) throw ConfigError("sweep.base_lrs", 0, "must be > 0");
  }
  if (workers < 1) throw ConfigError("run.workers", 0, "must be >= 1");
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      section = trim(line.substr(1, line.size() - 2));
      const auto& all = entries();
      const bool known = std::any_of(all.begin(), all.end(), [&](const Entry& e) {
        return section_of(e.key) == section;
      });
      if (!known) throw ConfigError(section, line_no, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", line_no, "expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", line_no, "missing key");
    if (key.find('.') == std::string::npos) {
      if (section.empty()) {
        throw ConfigError(key, line_no, "key outside a section must be dotted");
      }
      key = section + "." + key;
    }
    const Entry* entry = find_entry(key);
    if (entry == nullptr) throw ConfigError(key, line_no, "unknown key");
    if (seen.count(key)) {
      throw ConfigError(key, line_no,
                        "repeated (first set on line " +
                            std::to_string(seen[key]) + ")");
    }
    seen[key] = line_no;
    try {
      entry->set(cfg, value);
    } catch (const BadValue& bad) {
      throw ConfigError(key, line_no, bad.message);
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    const auto it = seen.find(e.key());
    if (it == seen.end()) throw;
    std::string msg = e.what();
    msg = msg.substr(msg.find(": ") + 2);
    throw ConfigError(e.key(), it->second, msg);
  }
  return cfg;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  return parse_config(in);
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  std::string section;
  for (const auto& e : entries()) {
    const std::string sec = section_of(e.key);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << e.key.substr(sec.size() + 1) << " = " << e.get(cfg) << '\n';
  }
}

std::string config_to_string(const RunConfig& cfg) {
  std::ostringstream out;
  write_config(out, cfg);
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.push_back(e.key);
  return keys;
}

}  // namespace evasion
