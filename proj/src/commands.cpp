#include "evasion/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "evasion/errors.hpp"
#include "evasion/es_refiner.hpp"
#include "evasion/format.hpp"
#include "evasion/ppo_trainer.hpp"

namespace evasion {
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void prepare(const RunConfig& cfg, const std::string& name) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  auto out = open_out(fs::path(cfg.output_dir) / (name + ".config.ini"));
  write_config(out, cfg);
}

std::string outcome_line(const EngagementOutcome& o) {
  std::ostringstream s;
  s << "evasion_distance_m=" << fmt_double(o.evasion_distance)
    << " residual_velocity_mps=" << fmt_double(o.residual_velocity)
    << " capture=" << (o.capture ? "true" : "false")
    << " truncated=" << (o.truncated ? "true" : "false")
    << " termination_index=" << o.termination_index;
  return s.str();
}

template <typename Fn>
int guarded(const CommandIo& io, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error("missing column " + name);
  }
};

// Plain comma split; the files read here never quote commas.
Csv read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  Csv csv;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      csv.header = std::move(cells);
      first = false;
    } else if (!line.empty()) {
      csv.rows.push_back(std::move(cells));
    }
  }
  return csv;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const std::string& policy,
                 const std::string& checkpoint, const CommandIo& io) {
  return guarded(io, [&] {
    if (policy != "zero" && policy != "checkpoint") {
      throw UsageError("policy must be 'zero' or 'checkpoint'");
    }
    prepare(cfg, "simulate");
    ActionSource source = [](const Observation&) { return ActionDelta{}; };
    if (policy == "checkpoint") {
      if (checkpoint.empty()) throw UsageError("--checkpoint is required");
      const Checkpoint ckpt = load_checkpoint(checkpoint);
      source = mean_action_policy(ckpt.actor, limits_for(cfg.scenario).rates);
    }
    const EpisodeResult res = run_episode(source, cfg.scenario, cfg.seed);
    const fs::path dir = cfg.output_dir;
    auto traj = open_out(dir / "trajectory.csv");
    write_trajectory_csv(traj, res.trajectory);
    const std::string line = outcome_line(res.outcome);
    auto out = open_out(dir / "outcome.txt");
    out << line << '\n';
    io.log << line << '\n';
    return res.outcome.evasion_distance > cfg.reward.safe_distance
               ? kExitEvaded
               : kExitCaptured;
  });
}

int cmd_train(const RunConfig& cfg, const CommandIo& io) {
  return guarded(io, [&] {
    prepare(cfg, "train");
    const fs::path dir = cfg.output_dir;
    auto log = open_out(dir / "training_log.csv");
    write_training_log_header(log);

    TrainOptions opts;
    opts.workers = cfg.workers;
    opts.on_episode = [&](const EpisodeLogRow& row) {
      write_training_log_row(log, row);
    };
    if (cfg.ppo.checkpoint_every > 0) {
      fs::create_directories(dir / "checkpoints");
      opts.on_checkpoint = [&](std::int64_t episode, const Learner& l) {
        save_checkpoint(
            (dir / "checkpoints" / ("episode_" + std::to_string(episode) + ".ckpt"))
                .string(),
            {l.actor, l.critic});
      };
    }
    const Learner initial = make_learner(cfg.architecture, cfg.seed);
    const TrainResult res =
        train(cfg.scenario, cfg.architecture, cfg.ppo, cfg.reward, cfg.seed, opts);
    log.close();
    save_checkpoint((dir / "final.ckpt").string(),
                    {res.learner.actor, res.learner.critic});

    auto stats = open_out(dir / "update_stats.csv");
    stats << "update,mean_ratio,clip_fraction,policy_loss,value_loss,entropy,"
             "approx_kl\n";
    for (std::size_t i = 0; i < res.updates.size(); ++i) {
      const UpdateStats& u = res.updates[i];
      stats << i << ',' << fmt_double(u.mean_ratio) << ','
            << fmt_double(u.clip_fraction) << ',' << fmt_double(u.policy_loss)
            << ',' << fmt_double(u.value_loss) << ',' << fmt_double(u.entropy)
            << ',' << fmt_double(u.approx_kl) << '\n';
    }

    const int n = cfg.ppo.eval_episodes;
    const EvaluationSummary before = evaluate_policy(
        initial.actor, cfg.scenario, cfg.reward, cfg.seed, n, cfg.workers);
    const EvaluationSummary after = evaluate_policy(
        res.learner.actor, cfg.scenario, cfg.reward, cfg.seed, n, cfg.workers);
    auto eval = open_out(dir / "evaluation.csv");
    eval << "policy,episode,evasion_distance_m,residual_velocity_mps,return\n";
    for (const auto* s : {&before, &after}) {
      const char* name = s == &before ? "initial" : "final";
      for (std::size_t i = 0; i < s->episodes.size(); ++i) {
        const auto& ep = s->episodes[i];
        eval << name << ',' << i << ',' << fmt_double(ep.outcome.evasion_distance)
             << ',' << fmt_double(ep.outcome.residual_velocity) << ','
             << fmt_double(ep.ret) << '\n';
      }
    }

    const EpisodeData nominal =
        run_policy_episode(res.learner.actor, nullptr, cfg.scenario.nominal(),
                           cfg.reward, 0, 0, {false, false, true});
    auto traj = open_out(dir / "final_trajectory.csv");
    write_trajectory_csv(traj, nominal.trajectory);

    auto summary = open_out(dir / "evaluation_summary.txt");
    summary << "initial_mean_return=" << fmt_double(before.mean_return) << '\n'
            << "initial_evasion_fraction=" << fmt_double(before.evasion_fraction)
            << '\n'
            << "final_mean_return=" << fmt_double(after.mean_return) << '\n'
            << "final_evasion_fraction=" << fmt_double(after.evasion_fraction)
            << '\n'
            << "nominal " << outcome_line(nominal.outcome) << '\n';
    if (!res.history.empty()) {
      const auto& last = res.history.back();
      summary << "last_training_episode evasion_distance_m="
              << fmt_double(last.evasion_distance)
              << " residual_velocity_mps=" << fmt_double(last.residual_velocity)
              << '\n';
    }
    io.log << "trained " << res.steps_consumed << " steps, "
           << res.history.size() << " episodes; final evasion fraction "
           << fmt_double(after.evasion_fraction) << ", mean return "
           << fmt_double(before.mean_return) << " -> "
           << fmt_double(after.mean_return) << '\n';
    return 0;
  });
}

int cmd_sweep(const RunConfig& cfg, const CommandIo& io) {
  return guarded(io, [&] {
    prepare(cfg, "sweep");
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir / "sweep");
    SweepOptions opts;
    opts.workers = cfg.workers;
    opts.on_cell = [&](const SweepRow& row, const TrainResult* res) {
      io.log << "cell " << row.index << ' ' << row.arch.to_string() << " k="
             << fmt_double(row.lr_exponent) << " l_B=" << fmt_double(row.base_lr)
             << ": " << row.status << '\n';
      if (res != nullptr) {
        save_checkpoint(
            (dir / "sweep" / ("cell_" + std::to_string(row.index) + ".ckpt"))
                .string(),
            {res->learner.actor, res->learner.critic});
      }
    };
    const auto rows = sweep(cfg.sweep.cells(), cfg.scenario, cfg.ppo,
                            cfg.reward, cfg.seed, opts);
    auto out = open_out(dir / "sweep.csv");
    write_sweep_csv(out, rows);
    return 0;
  });
}

int cmd_refine(const RunConfig& cfg, const std::string& checkpoint,
               const CommandIo& io) {
  return guarded(io, [&] {
    prepare(cfg, "refine");
    const fs::path dir = cfg.output_dir;
    const std::string path =
        checkpoint.empty() ? (dir / "final.ckpt").string() : checkpoint;
    const Checkpoint ckpt = load_checkpoint(path);
    RefineOptions opts;
    opts.workers = cfg.workers;
    const RefineResult res = refine(ckpt.actor, cfg.es, cfg.scenario, opts);
    if (!res.record.rows.empty() &&
        !(res.record.rows.front().evasion_distance > cfg.es.safe_distance)) {
      io.err << "warning: initial policy does not clear the safe distance\n";
    }
    auto rec = open_out(dir / "evolution_record.csv");
    write_evolution_csv(rec, res.record);
    save_checkpoint((dir / "refined.ckpt").string(), {res.best, ckpt.critic});
    const EpisodeData nominal =
        run_policy_episode(res.best, nullptr, cfg.scenario.nominal(), cfg.reward,
                           0, 0, {false, false, true});
    auto traj = open_out(dir / "refined_trajectory.csv");
    write_trajectory_csv(traj, nominal.trajectory);
    io.log << "refine: " << res.evaluations << " evaluations, "
           << res.record.rows.size() - 1 << " accepted, velocity "
           << fmt_double(res.record.rows.front().residual_velocity) << " -> "
           << fmt_double(res.best_outcome.residual_velocity) << '\n';
    return 0;
  });
}

int cmd_plotdata(const std::string& run_dir, const CommandIo& io) {
  return guarded(io, [&] {
    const fs::path dir = run_dir;
    if (!fs::is_directory(dir)) throw Error("no run directory " + run_dir);
    int written = 0;

    if (fs::exists(dir / "training_log.csv")) {
      const Csv log = read_csv(dir / "training_log.csv");
      const auto e = log.column("episode");
      const auto d = log.column("evasion_distance_m");
      const auto v = log.column("residual_velocity_mps");
      const auto r = log.column("return");
      auto out = open_out(dir / "fig9_training_curves.csv");
      out << "episode,evasion_distance_m,residual_velocity_mps,return\n";
      for (const auto& row : log.rows) {
        out << row[e] << ',' << row[d] << ',' << row[v] << ',' << row[r] << '\n';
      }
      ++written;
    }
    if (fs::exists(dir / "evolution_record.csv")) {
      const Csv rec = read_csv(dir / "evolution_record.csv");
      const auto a = rec.column("attempt");
      const auto d = rec.column("evasion_distance_m");
      const auto v = rec.column("residual_velocity_mps");
      auto out = open_out(dir / "fig10_evolution_steps.csv");
      out << "attempt,residual_velocity_mps,evasion_distance_m\n";
      for (const auto& row : rec.rows) {
        out << row[a] << ',' << row[v] << ',' << row[d] << '\n';
      }
      ++written;
    }
    for (const char* name :
         {"refined_trajectory.csv", "final_trajectory.csv", "trajectory.csv"}) {
      if (!fs::exists(dir / name)) continue;
      const Csv traj = read_csv(dir / name);
      const auto t = traj.column("t_s");
      const auto al = traj.column("alpha_deg");
      const auto ga = traj.column("gamma_deg");
      auto out = open_out(dir / "fig11_commands.csv");
      out << "t_s,alpha_deg,gamma_deg,source\n";
      for (const auto& row : traj.rows) {
        out << row[t] << ',' << row[al] << ',' << row[ga] << ',' << name << '\n';
      }
      ++written;
      break;
    }
    io.log << "plotdata: wrote " << written << " file(s) in " << run_dir << '\n';
    if (written == 0) throw Error("nothing to plot in " + run_dir);
    return 0;
  });
}

}  // namespace evasion
