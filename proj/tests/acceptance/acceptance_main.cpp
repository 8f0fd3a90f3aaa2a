#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "evasion/commands.hpp"
#include "evasion/config.hpp"
#include "evasion/dynamics.hpp"
#include "evasion/engagement.hpp"
#include "evasion/es_refiner.hpp"
#include "evasion/format.hpp"
#include "evasion/policy_net.hpp"
#include "evasion/ppo_trainer.hpp"
#include "evasion/random.hpp"

namespace evasion {
namespace {

namespace fs = std::filesystem;

struct Verdict {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures_;
      if (first_.empty()) first_ = what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += "; ";
    notes_ += s;
  }
  Verdict verdict() const {
    if (failures_ == 0) return {true, notes_};
    return {false, std::to_string(failures_) + " failed check(s), first: " + first_ +
                       (notes_.empty() ? "" : " [" + notes_ + "]")};
  }

 private:
  int failures_ = 0;
  std::string first_;
  std::string notes_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

const ActionSource kHold = [](const Observation&) { return ActionDelta{}; };

struct Workspace {
  fs::path root;
  fs::path run() const { return root / "run"; }
  fs::path first() const { return root / "first"; }
  fs::path source;
  int workers = 1;

  RunConfig reference() const {
    RunConfig c = load_config((source / "configs/reference.ini").string());
    c.output_dir = run().string();
    return c;
  }
  RunConfig desk() const {
    RunConfig c = load_config((source / "configs/desk.ini").string());
    c.output_dir = run().string();
    c.workers = workers;
    return c;
  }
};

CommandIo quiet_io() {
  static std::ostringstream sink;
  sink.str("");
  return {sink, std::cerr};
}

// 1. Learning-rate schedule on the k x l_B grid.
Verdict criterion1(const Workspace&) {
  Checker c;
  const std::int64_t st = 3500000;
  double worst = 0.0;
  for (double k : {2.0, 3.0}) {
    for (double lb : {1e-3, 1e-4}) {
      c.expect(lr_schedule(st, 0, lb, k) == lb, "l_C(0) == l_B");
      c.expect(lr_schedule(st, st, lb, k) == 0.0, "l_C(S_T) == 0");
      for (std::int64_t se = 0; se <= st; se += 1750) {
        const long double f = static_cast<long double>(st - se) / st;
        long double ref = lb;
        for (int i = 0; i < static_cast<int>(k); ++i) ref *= f;
        const double got = lr_schedule(st, se, lb, k);
        const double err = ref == 0 ? std::abs(got) : std::abs((got - ref) / ref);
        worst = std::max(worst, err);
      }
    }
  }
  c.expect(worst <= 4 * std::numeric_limits<double>::epsilon(), "relative error within 4 ulp");
  c.note("max relative error " + fmt_double(worst));
  return c.verdict();
}

// 2. Parameter counts.
Verdict criterion2(const Workspace&) {
  Checker c;
  const std::size_t big = param_count({{8, 256, 256, 256, 2}});
  c.expect(big == 133632, "param_count([8,256,256,256,2]) == 133632");
  const SweepGrid grid;
  c.expect(grid.architectures.size() == 6, "six sweep architectures");
  c.expect(grid.cells().size() == 24, "24 sweep cells");
  for (const auto& a : grid.architectures) {
    const std::size_t n = param_count(a);
    std::size_t manual = 0;
    for (std::size_t i = 1; i < a.widths.size(); ++i) manual += a.widths[i - 1] * a.widths[i];
    c.expect(n == manual, "count of " + a.to_string());
    c.expect(init_policy(a, 1).net.weights.size() == n, "initialized size of " + a.to_string());
  }
  c.note("param_count([8, 256, 256, 256, 2]) = " + std::to_string(big));
  return c.verdict();
}

double oracle_final_reward(double d, double v) {
  const double kv = d > 30.0 ? 10.0 : 0.0;
  const double kd = std::clamp(d / 30.0, 0.0, 1.0);
  return kv * v + kd * 30.0;
}

// 3. Terminal and shaping rewards.
Verdict criterion3(const Workspace&) {
  Checker c;
  const RewardConfig cfg;
  Rng rng(3);
  std::vector<double> ds;
  for (int i = 0; i < 980; ++i) ds.push_back(uniform(rng, -5.0, 70.0));
  for (double d : {0.0, 30.0, std::nextafter(30.0, 0.0), std::nextafter(30.0, 100.0), 15.0,
                   60.0, 29.999999, 30.000001, 1e-300, 1e6}) {
    ds.push_back(d);
  }
  for (int i = 0; i < 10; ++i) ds.push_back(30.0);
  int jumps = 0;
  for (double d : ds) {
    const double v = uniform(rng, 0.0, 200.0);
    const double got = final_reward(d, v, cfg);
    const double ref = oracle_final_reward(d, v);
    c.expect(std::abs(got - ref) <= 1e-12 * std::max(1.0, std::abs(ref)),
             "final_reward(" + fmt_double(d) + ", " + fmt_double(v) + ")");
    if (d > 30.0 && d < 30.0 + 1e-9) ++jumps;
  }
  c.expect(ds.size() == 1000, "1000 cases");
  const double below = final_reward(30.0, 100.0, cfg);
  const double above = final_reward(std::nextafter(30.0, 100.0), 100.0, cfg);
  c.expect(below == 30.0 && std::abs(above - 1030.0) < 1e-9, "K_v jump at 30 m");

  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const LosAngles a{uniform(rng, -1.5, 1.5), uniform(rng, -3.1, 3.1)};
    const LosAngles b{a.epsilon + uniform(rng, -1e-3, 1e-3), a.eta + uniform(rng, -1e-3, 1e-3)};
    const double dt = uniform(rng, 0.005, 0.1);
    const double got = step_reward_parts(a, b, dt, {100.0, 50.0}, 100.0, cfg).los_term;
    const double ref = cfg.pe_weight *
                       (std::hypot(b.epsilon, b.eta) - std::hypot(a.epsilon, a.eta)) / dt;
    worst = std::max(worst, std::abs(got - ref));
  }
  c.expect(worst <= 1e-12, "R_pe within 1e-12 of the difference quotient");
  c.note("1000 terminal cases, max R_pe error " + fmt_double(worst));
  return c.verdict();
}

double orbital_energy(const VehicleState& s) {
  const double v = s.speed();
  return 0.5 * v * v - kEarthMu / norm(s.position);
}

VehicleState circular_orbit(double radius) {
  return {{radius, 0, 0}, {0, std::sqrt(kEarthMu / radius), 0}};
}

// 4. Integrator.
Verdict criterion4(const Workspace&) {
  Checker c;
  {
    const GeoVector g{0, -9.8, 0};
    const GeoVector r0{10, 2000, -5};
    const GeoVector v0{100, 40, 3};
    VehicleState s{r0, v0};
    const double dt = 0.01;
    for (int i = 0; i < 100; ++i) {
      s = integrate_step(s, [&](const GeoVector&, const GeoVector&) { return g; }, dt);
    }
    const double t = 100 * dt;
    const GeoVector r = r0 + t * v0 + (0.5 * t * t) * g;
    const GeoVector v = v0 + t * g;
    const double err = std::max(norm(s.position - r) / norm(r), norm(s.velocity - v) / norm(v));
    c.expect(err <= 1e-9, "ballistic parabola");
    c.note("ballistic " + fmt_double(err));
  }
  {
    const double radius = kEarthRadius + 400000.0;
    VehicleState s = circular_orbit(radius);
    const double period = 2 * std::numbers::pi * std::sqrt(radius * radius * radius / kEarthMu);
    const auto steps = static_cast<int>(std::ceil(period / 0.1));
    double worst = 0.0;
    for (int i = 0; i < steps; ++i) {
      s = integrate_step(s, [](const GeoVector& r, const GeoVector&) { return gravity(r); }, 0.1);
      worst = std::max(worst, std::abs(norm(s.position) - radius) / radius);
    }
    c.expect(worst < 1e-6, "circular orbit radius drift");
    c.note("orbit drift " + fmt_double(worst));
  }
  {
    const SimplifiedAeroModel off{0, 0, 0, true};
    VehicleState s = circular_orbit(kEarthRadius + 400000.0);
    s.velocity = s.velocity * 1.05 + GeoVector{0, 0, 300.0};
    const double e0 = orbital_energy(s);
    for (int i = 0; i < 10000; ++i) {
      s = integrate_step(
          s,
          [&](const GeoVector& r, const GeoVector& v) {
            return efv_acceleration({r, v}, EfvCommand(0, 0), off);
          },
          0.1, i);
    }
    const double err = std::abs(orbital_energy(s) - e0) / std::abs(e0);
    c.expect(err <= 1e-8, "orbital energy");
    c.note("energy " + fmt_double(err));
  }
  return c.verdict();
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& e : v) e = uniform(rng, -1.0, 1.0);
  return v;
}

// ReLU on/off pattern of the hidden layers.
std::vector<bool> relu_pattern(const Network& net, const std::vector<double>& x) {
  ForwardCache cache;
  forward(net, x, &cache);
  std::vector<bool> out;
  for (std::size_t l = 1; l + 1 < cache.activations.size(); ++l) {
    for (double a : cache.activations[l]) out.push_back(a > 0.0);
  }
  return out;
}

// 5. Backpropagation against central differences; stencils that straddle a
// ReLU kink are redrawn.
Verdict criterion5(const Workspace&) {
  Checker c;
  Rng rng(5);
  const std::vector<Architecture> classes = {
      {{8, 16, 16, 2}}, {{8, 32, 32, 2}}, {{8, 64, 64, 2}},
      {{8, 16, 16, 16, 2}}, {{8, 32, 32, 32, 2}}, {{8, 64, 64, 64, 2}}};
  const double h = 1e-5;
  double worst = 0.0;
  int nets = 0, redrawn = 0;
  for (const auto& arch : classes) {
    for (int n = 0; n < 100; ++n, ++nets) {
      Network net = init_network(arch, rng());
      const auto x = random_vector(rng, 8);
      const auto u = random_vector(rng, 2);
      ForwardCache cache;
      forward(net, x, &cache);
      const auto g = backward(net, cache, u);
      auto project = [&](const Network& w) {
        const auto y = forward(w, x);
        return u[0] * y[0] + u[1] * y[1];
      };
      // Sampled coordinates plus one random direction.
      const auto base = relu_pattern(net, x);
      double num = 0.0, den = 0.0;
      for (int k = 0; k < 48; ++k) {
        const std::size_t i = uniform_index(rng, net.weights.size());
        const double w = net.weights[i];
        net.weights[i] = w + h;
        const double yp = project(net);
        const bool kink_plus = relu_pattern(net, x) != base;
        net.weights[i] = w - h;
        const double ym = project(net);
        const bool kink_minus = relu_pattern(net, x) != base;
        net.weights[i] = w;
        if (kink_plus || kink_minus) {
          ++redrawn;
          --k;
          continue;
        }
        const double fd = (yp - ym) / (2 * h);
        num += (g[i] - fd) * (g[i] - fd);
        den += fd * fd;
      }
      const auto dir = random_vector(rng, g.size());
      Network plus = net, minus = net;
      double an = 0.0;
      for (std::size_t i = 0; i < dir.size(); ++i) {
        plus.weights[i] += h * dir[i];
        minus.weights[i] -= h * dir[i];
        an += g[i] * dir[i];
      }
      if (relu_pattern(plus, x) == base && relu_pattern(minus, x) == base) {
        const double fd = (project(plus) - project(minus)) / (2 * h);
        num += (an - fd) * (an - fd);
        den += fd * fd;
      } else {
        ++redrawn;
      }
      const double rel = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
      worst = std::max(worst, rel);
      c.expect(rel <= 1e-4, "net " + std::to_string(n) + " of " + arch.to_string());
    }
  }
  c.note(std::to_string(nets) + " nets, max relative error " + fmt_double(worst) + ", " +
         std::to_string(redrawn) + " kink-straddling stencils redrawn");
  return c.verdict();
}

// 6. Termination and virtual rollouts.
Verdict criterion6(const Workspace&) {
  Checker c;
  Rng rng(6);
  std::int64_t dense = 0;
  for (int e = 0; e < 1000; ++e) {
    ScenarioConfig sc;
    sc.dt = uniform(rng, 0.02, 0.06);
    sc.alpha_rate_limit_deg = uniform(rng, 0.01, 0.2);
    sc.gamma_rate_limit_deg = uniform(rng, 0.01, 0.2);
    sc.efv_position_jitter_m = 50;
    sc.efv_heading_jitter_deg = 2;
    Rng actions(rng());
    const ActionSource random_policy = [&](const Observation&) {
      return ActionDelta{uniform(actions, -1.0, 1.0), uniform(actions, -1.0, 1.0)};
    };
    const EpisodeResult r = run_episode(random_policy, sc, rng());
    dense += static_cast<std::int64_t>(r.trajectory.size());
    const auto it = std::min_element(
        r.trajectory.begin(), r.trajectory.end(),
        [](const TrajectoryRow& a, const TrajectoryRow& b) { return a.distance < b.distance; });
    c.expect(!r.outcome.truncated, "episode " + std::to_string(e) + " terminated");
    c.expect(it->step == r.outcome.termination_index &&
                 it->distance == r.outcome.evasion_distance &&
                 it->efv.speed() == r.outcome.residual_velocity,
             "episode " + std::to_string(e) + " argmin");
  }
  for (int s = 0; s < 100; ++s) {
    ScenarioConfig sc;
    sc.dt = uniform(rng, 0.01, 0.05);
    sc.alpha_rate_limit_deg = 0.1;
    sc.gamma_rate_limit_deg = 0.1;
    sc.efv_position_jitter_m = 50;
    sc.efv_heading_jitter_deg = 2;
    Episode ep(sc, rng(), false);
    const std::int64_t at = uniform_index(rng, 150);
    Rng actions(rng());
    for (std::int64_t i = 0; i < at && !ep.done(); ++i) {
      ep.step({uniform(actions, -1.0, 1.0), uniform(actions, -1.0, 1.0)});
    }
    if (ep.done()) {
      c.expect(false, "snapshot " + std::to_string(s) + " taken mid-episode");
      continue;
    }
    const World snap = ep.world();
    const VirtualOutcome v = virtual_rollout(snap, snap.efv_cmd, {1, 1000000});
    EpisodeLimits limits = limits_for(sc);
    limits.max_steps = 1000000;
    const EpisodeResult r = run_episode_from(snap, limits, kHold);
    c.expect(v.distance == r.outcome.evasion_distance &&
                 v.velocity == r.outcome.residual_velocity,
             "snapshot " + std::to_string(s) + " bit-exact");
  }
  c.note("1000 episodes (" + std::to_string(dense) + " dense samples), 100 snapshots");
  return c.verdict();
}

std::string outcome_field(const fs::path& p, const std::string& key) {
  const std::string text = slurp(p);
  const auto at = text.find(key + "=");
  if (at == std::string::npos) return "";
  const auto end = text.find_first_of(" \n", at);
  return text.substr(at + key.size() + 1, end - at - key.size() - 1);
}

int run_simulate(const Workspace& ws) {
  return cmd_simulate(ws.reference(), "zero", "", quiet_io());
}
int run_train(const Workspace& ws) { return cmd_train(ws.desk(), quiet_io()); }
int run_refine(const Workspace& ws) { return cmd_refine(ws.desk(), "", quiet_io()); }

// 7. Zero-maneuver capture in the default scenario.
Verdict criterion7(const Workspace& ws) {
  Checker c;
  const int rc = run_simulate(ws);
  c.expect(rc == kExitCaptured, "simulate exits with the capture code");
  const fs::path out = ws.run() / "outcome.txt";
  const std::string d = outcome_field(out, "evasion_distance_m");
  c.expect(outcome_field(out, "capture") == "true", "capture=true");
  c.expect(!d.empty() && std::stod(d) < 30.0, "evasion distance below 30 m");
  c.note("evasion distance " + d + " m, residual velocity " +
         outcome_field(out, "residual_velocity_mps") + " m/s");
  return c.verdict();
}

// 8. Desk-scale training.
Verdict criterion8(const Workspace& ws) {
  Checker c;
  const RunConfig cfg = ws.desk();
  c.expect(cfg.architecture.to_string() == "[8, 64, 64, 2]", "desk architecture");
  c.expect(cfg.scenario.dt == 0.05 && cfg.ppo.total_steps == 200000, "desk dt and budget");
  const int rc = run_train(ws);
  c.expect(rc == 0, "train exits 0");
  if (rc != 0) return c.verdict();
  int n = 0, evaded = 0;
  double initial = 0.0, final = 0.0;
  int n_initial = 0;
  for (const auto& row : read_rows(ws.run() / "evaluation.csv")) {
    if (row[0] == "initial") {
      initial += std::stod(row[4]);
      ++n_initial;
    } else {
      final += std::stod(row[4]);
      ++n;
      if (std::stod(row[2]) > cfg.reward.safe_distance) ++evaded;
    }
  }
  c.expect(n == 20 && n_initial == 20, "20 evaluation episodes per policy");
  if (n == 0 || n_initial == 0) return c.verdict();
  initial /= n_initial;
  final /= n;
  c.expect(evaded >= 0.8 * n, "(a) at least 80% evade");
  c.expect(final > initial, "(b) final mean return exceeds initial");
  c.note(std::to_string(evaded) + "/" + std::to_string(n) + " evade; mean return " +
         fmt_double(initial) + " -> " + fmt_double(final));
  return c.verdict();
}

// 9. Evolution-strategy refinement.
Verdict criterion9(const Workspace& ws) {
  Checker c;
  const RunConfig cfg = ws.desk();
  c.expect(cfg.es.generations == 50 && cfg.es.seeds_per_generation == 50 &&
               cfg.es.sigma == 0.1,
           "50 x 50 at sigma 0.1");
  const fs::path ckpt = ws.run() / "final.ckpt";
  if (!fs::exists(ckpt)) {
    c.expect(false, "trained checkpoint present");
    return c.verdict();
  }
  const PolicyParameters start = load_checkpoint(ckpt.string()).actor;
  double incumbent = -std::numeric_limits<double>::infinity();
  bool monotone = true;
  std::int64_t attempts = 0;
  RefineOptions opts;
  opts.workers = ws.workers;
  opts.on_attempt = [&](std::int64_t, const CandidateOutcome& o, bool accepted) {
    ++attempts;
    if (accepted) {
      if (o.residual_velocity < incumbent) monotone = false;
      incumbent = o.residual_velocity;
    }
  };
  const RefineResult res = refine(start, cfg.es, cfg.scenario, opts);
  const auto& rows = res.record.rows;
  c.expect(!rows.empty(), "record has an initial row");
  if (rows.empty()) return c.verdict();
  c.expect(monotone, "incumbent velocity nondecreasing");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    c.expect(rows[i].evasion_distance > cfg.es.safe_distance,
             "accepted attempt " + std::to_string(rows[i].attempt) + " outside 30 m");
    c.expect(rows[i].residual_velocity >= rows[i - 1].residual_velocity, "record nondecreasing");
  }
  c.expect(res.evaluations - 1 == 2500 && attempts == 2500, "2500 candidate evaluations");
  c.expect(res.best_outcome.residual_velocity >= rows.front().residual_velocity,
           "final >= initial velocity");

  const int rc = run_refine(ws);
  c.expect(rc == 0, "refine exits 0");
  std::ostringstream direct;
  write_evolution_csv(direct, res.record);
  c.expect(slurp(ws.run() / "evolution_record.csv") == direct.str(),
           "command record matches in-process record");
  const auto csv = read_rows(ws.run() / "evolution_record.csv");
  for (std::size_t i = 1; i < csv.size(); ++i) {
    c.expect(std::stod(csv[i][2]) > std::stod(csv[i - 1][2]), "CSV strictly increasing");
  }
  c.note(std::to_string(res.evaluations - 1) + " candidate evaluations, " +
         std::to_string(rows.size() - 1) + " accepted, velocity " +
         fmt_double(rows.front().residual_velocity) + " -> " +
         fmt_double(res.best_outcome.residual_velocity));
  return c.verdict();
}

// 10. Byte-identical reruns of 7-9.
Verdict criterion10(const Workspace& ws) {
  Checker c;
  fs::remove_all(ws.first());
  fs::rename(ws.run(), ws.first());
  c.expect(run_simulate(ws) == kExitCaptured, "rerun simulate");
  c.expect(run_train(ws) == 0, "rerun train");
  c.expect(run_refine(ws) == 0, "rerun refine");
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(ws.first())) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), ws.first());
    ++files;
    c.expect(fs::exists(ws.run() / rel) && slurp(e.path()) == slurp(ws.run() / rel),
             rel.string() + " identical");
  }
  int second = 0;
  for (const auto& e : fs::recursive_directory_iterator(ws.run())) {
    if (e.is_regular_file()) ++second;
  }
  c.expect(files == second && files > 0, "same file set");
  c.note(std::to_string(files) + " files compared");
  return c.verdict();
}

}  // namespace
}  // namespace evasion

int main(int argc, char** argv) {
  using namespace evasion;
  Workspace ws;
  ws.root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "evasion_acceptance";
  ws.source = EVASION_SOURCE_DIR;
  ws.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  fs::remove_all(ws.run());
  fs::create_directories(ws.root);

  struct Criterion {
    int id;
    double budget_s;
    std::function<Verdict(const Workspace&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, 1, criterion1},   {2, 1, criterion2},     {3, 5, criterion3},
      {4, 30, criterion4},  {5, 60, criterion5},    {6, 300, criterion6},
      {7, 60, criterion7},  {8, 1800, criterion8},  {9, 900, criterion9},
      {10, 2760, criterion10}};
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = cr.run(ws);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.budget_s) {
      v.pass = false;
      v.detail += "; over the " + fmt_double(cr.budget_s) + " s budget";
    }
    if (!v.pass) ++failed;
    char time[32];
    std::snprintf(time, sizeof time, "%.2f s", secs);
    std::cout << "criterion " << cr.id << ": " << (v.pass ? "PASS" : "FAIL") << " (" << time
              << ") " << v.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
