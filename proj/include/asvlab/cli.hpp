#pragma once

// Command-line front end. Exit status: 0 success, 1 runtime fault, 2 usage or
// configuration error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asvlab/evaluation/conditions.hpp"
#include "asvlab/io/checkpoint.hpp"
#include "asvlab/io/config.hpp"
#include "asvlab/io/output.hpp"
#include "asvlab/perception.hpp"
#include "asvlab/workflow.hpp"

namespace asvlab::cli {

inline constexpr const char* kOutDirEnv = "ASVLAB_OUT_DIR";

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config = "nominal";
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::string out;
};

struct Context {
  io::RunConfig cfg;
  std::string hash;
  Backend backend = Backend::A;
  fs::path out;

  io::Provenance provenance() const { return {hash, cfg.seed, to_string(backend)}; }
  std::string file(const std::string& name) const { return (out / name).string(); }
};

inline Context make_context(const CommonOptions& o) {
  Context c;
  if (o.config != "nominal") c.cfg = io::load_config(o.config);
  if (o.seed) c.cfg.seed = *o.seed;
  if (!o.backend.empty()) c.cfg.backend = backend_from_string(o.backend);
  c.cfg.validate();
  c.backend = c.cfg.backend;
  c.hash = io::config_hash(c.cfg);
  std::string dir = o.out;
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? env : "out";
  }
  c.out = dir;
  fs::create_directories(c.out);
  std::ofstream(c.file("config.json")) << io::serialize(c.cfg);
  return c;
}

inline std::string checkpoint_name(evaluation::PolicyVariant v) {
  return v == evaluation::PolicyVariant::Nominal ? "policy.json" : "policy_no_limiter.json";
}

inline policy::PolicyNet train_variant(const Context& c, evaluation::PolicyVariant v,
                                       bool verbose) {
  const std::string suffix = v == evaluation::PolicyVariant::Nominal ? "" : "_no_limiter";
  const auto tc = workflow::training_for(c.cfg, v);
  const auto seed = workflow::training_seed(c.cfg.seed);
  auto progress = [&](const policy::CurveRow& r) {
    if (verbose && (r.iteration % 10 == 0 || r.iteration + 1 == tc.ppo.iterations)) {
      std::cerr << "iter " << r.iteration << " return " << io::num(r.mean_return) << " success "
                << io::num(r.success_rate) << "\n";
    }
  };
  try {
    auto res = policy::train(tc, seed, progress);
    io::write_learning_curve(c.file("learning_curve" + suffix + ".csv"), c.provenance(),
                             res.curve);
    io::save_checkpoint(c.file(checkpoint_name(v)), res.net, c.hash, c.cfg.seed);
    return res.net;
  } catch (const policy::TrainingDiverged& e) {
    io::save_checkpoint(c.file("policy" + suffix + "_last_good.json"), e.last_good(), c.hash,
                        c.cfg.seed);
    throw;
  }
}

/// Explicit path, else a checkpoint already in the output directory, else
/// train one there.
inline policy::PolicyNet resolve_policy(const Context& c, evaluation::PolicyVariant v,
                                        const std::string& explicit_path) {
  if (!explicit_path.empty()) return io::load_checkpoint(explicit_path);
  const auto cached = c.file(checkpoint_name(v));
  if (fs::exists(cached)) return io::load_checkpoint(cached);
  std::cerr << "no checkpoint for the " << evaluation::to_string(v)
            << " policy, training one into " << cached << "\n";
  return train_variant(c, v, true);
}

inline void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config, "Run config JSON, or 'nominal' for defaults");
  sub->add_option("--seed", o.seed, "Run seed (overrides the config)");
  sub->add_option("--backend", o.backend, "Physics backend")->check(CLI::IsMember({"A", "B"}));
  sub->add_option("--out", o.out, std::string("Output directory (default $") + kOutDirEnv +
                                      " or ./out)");
}

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Surface-vessel point-goal lab: training, evaluation, gap and missions"};
  app.require_subcommand(1);
  CommonOptions common;

  auto* train = app.add_subcommand("train", "Train a policy with PPO");
  add_common(train, common);
  std::string variant = "nominal";
  std::optional<int> iterations;
  train->add_option("--variant", variant, "Policy variant")
      ->check(CLI::IsMember({"nominal", "no_rate_limiter"}));
  train->add_option("--iterations", iterations, "Override the PPO iteration count");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a policy on the 15-goal grid");
  add_common(evaluate, common);
  std::vector<std::string> conditions;
  std::string checkpoint, checkpoint_nrl;
  bool trajectories = true;
  evaluate->add_option("--condition", conditions, "Condition id(s), or 'all'");
  evaluate->add_option("--checkpoint", checkpoint, "Nominal policy checkpoint");
  evaluate->add_option("--checkpoint-no-limiter", checkpoint_nrl,
                       "Policy trained without the rate limiter (conditions 03, 04)");
  evaluate->add_flag("!--no-trajectories", trajectories, "Skip per-goal trajectory CSVs");

  auto* gap = app.add_subcommand("gap", "Gap report between two metrics tables");
  std::string gap_a, gap_b, gap_out;
  gap->add_option("a", gap_a, "Metrics table A")->required()->check(CLI::ExistingFile);
  gap->add_option("b", gap_b, "Metrics table B")->required()->check(CLI::ExistingFile);
  gap->add_option("--out", gap_out, "Output file (default gap.json in the output directory)");

  auto* mission = app.add_subcommand("mission", "Search-and-capture mission");
  add_common(mission, common);
  std::string scenario = "e1";
  std::string mission_ckpt;
  mission->add_option("--scenario", scenario, "Scenario")->check(CLI::IsMember({"e1", "e2"}));
  mission->add_option("--checkpoint", mission_ckpt, "Policy checkpoint");

  auto* curve = app.add_subcommand("dump-curve", "Thrust curve as CSV");
  add_common(curve, common);
  int curve_points = 401;
  curve->add_option("--points", curve_points, "Samples over [-1, 1]")->check(CLI::Range(2, 100000));

  auto* profile = app.add_subcommand("error-profile", "Projection error against range as CSV");
  add_common(profile, common);
  double px = 10.0, bias_deg = 2.0, r_min = 1.0, r_max = 9.0, r_step = 0.25;
  profile->add_option("--pixel-radius", px, "Pixel noise radius")->check(CLI::NonNegativeNumber);
  profile->add_option("--pitch-bias-deg", bias_deg, "Pitch bias magnitude (deg)");
  profile->add_option("--range-min", r_min, "First range (m)")->check(CLI::PositiveNumber);
  profile->add_option("--range-max", r_max, "Last range (m)")->check(CLI::PositiveNumber);
  profile->add_option("--range-step", r_step, "Range step (m)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (app.get_subcommands().empty()) std::cerr << app.help();
    return 2;
  }

  try {
    if (train->parsed()) {
      const auto v = evaluation::policy_variant_from_string(variant);
      auto c = make_context(common);
      if (iterations) {
        c.cfg.training.ppo.iterations = *iterations;
        c.cfg.validate();
        c.hash = io::config_hash(c.cfg);
        std::ofstream(c.file("config.json")) << io::serialize(c.cfg);
      }
      train_variant(c, v, true);
      std::cout << c.file(checkpoint_name(v)) << "\n";
    } else if (evaluate->parsed()) {
      const auto c = make_context(common);
      std::vector<evaluation::ConditionSpec> specs;
      if (conditions.empty()) {
        specs.push_back(c.cfg.condition);
      } else if (conditions.size() == 1 && conditions[0] == "all") {
        specs = evaluation::condition_catalog();
      } else {
        for (const auto& id : conditions) specs.push_back(evaluation::find_condition(id));
      }
      std::optional<policy::PolicyNet> nominal, nrl;
      for (const auto& spec : specs) {
        auto& slot = spec.policy == evaluation::PolicyVariant::Nominal ? nominal : nrl;
        if (!slot) {
          slot = resolve_policy(c, spec.policy,
                                spec.policy == evaluation::PolicyVariant::Nominal ? checkpoint
                                                                                  : checkpoint_nrl);
        }
        const auto runs = workflow::evaluate(*slot, c.cfg, spec, c.backend);
        const std::string stem = spec.id + "_" + to_string(c.backend);
        io::write_json(c.file("metrics_" + stem + ".json"),
                       io::metrics_table(c.provenance(), spec, runs));
        if (trajectories) {
          for (std::size_t i = 0; i < runs.size(); ++i) {
            char idx[8];
            std::snprintf(idx, sizeof idx, "%02zu", i);
            io::write_trajectory_csv(c.file("traj_" + stem + "_g" + idx + ".csv"),
                                     c.provenance(), runs[i].log);
          }
        }
        const auto m = evaluation::mean(evaluation::metrics_of(runs));
        std::cout << spec.id << "-" << spec.name;
        const auto vals = m.values();
        for (std::size_t k = 0; k < vals.size(); ++k) {
          std::cout << " " << evaluation::MetricsRecord::kNames[k] << "=" << io::num(vals[k]);
        }
        std::cout << "\n";
      }
    } else if (gap->parsed()) {
      const auto ja = io::read_json(gap_a);
      const auto jb = io::read_json(gap_b);
      const auto g = evaluation::gap(io::records_from_table(ja), io::records_from_table(jb));
      const auto report = io::gap_report(g, ja.at("provenance"), jb.at("provenance"));
      std::string path = gap_out;
      if (path.empty()) {
        const char* env = std::getenv(kOutDirEnv);
        const fs::path dir = env && *env ? env : "out";
        fs::create_directories(dir);
        path = (dir / "gap.json").string();
      }
      io::write_json(path, report);
      std::cout << report.at("gap").dump() << "\n";
    } else if (mission->parsed()) {
      const auto c = make_context(common);
      const auto net = resolve_policy(c, evaluation::PolicyVariant::Nominal, mission_ckpt);
      const auto res = workflow::run_scenario(net, c.cfg, scenario, c.backend);
      const std::string stem = "mission_" + scenario + "_" + to_string(c.backend);
      io::write_json(c.file(stem + "_stats.json"), io::mission_stats_json(c.provenance(), res.stats));
      io::write_mission_csv(c.file(stem + "_log.csv"), c.provenance(), res);
      io::write_mission_events(c.file(stem + "_events.csv"), c.provenance(), res);
      std::cout << "captured " << res.stats.captured << " missed " << res.stats.missed
                << " time " << io::num(res.stats.autonomous_time) << " s distance "
                << io::num(res.stats.distance) << " m\n";
    } else if (curve->parsed()) {
      const auto c = make_context(common);
      io::CsvWriter w(c.file("thrust_curve.csv"), c.provenance(), {"command", "force"});
      for (int i = 0; i < curve_points; ++i) {
        const double cmd = -1.0 + 2.0 * i / (curve_points - 1);
        w.row({io::num(cmd), io::num(c.cfg.plant.curve.eval(cmd))});
      }
    } else if (profile->parsed()) {
      if (r_max < r_min) throw ConfigError("--range-max must be >= --range-min");
      const auto c = make_context(common);
      std::vector<double> ranges;
      for (int i = 0;; ++i) {
        const double r = r_min + i * r_step;
        if (r > r_max + 1e-9) break;
        ranges.push_back(r);
      }
      const auto rows = error_profile(CameraModel{c.cfg.camera}, ranges, px,
                                      bias_deg * kPi / 180.0);
      io::CsvWriter w(c.file("error_profile.csv"), c.provenance(), {"range", "error"});
      for (const auto& r : rows) w.row({io::num(r.range), r.error ? io::num(*r.error) : "nan"});
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace asvlab::cli
