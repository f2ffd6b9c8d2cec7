// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Artifacts go to ./acceptance_out.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "asvlab/cli.hpp"
#include "asvlab/io/checkpoint.hpp"
#include "asvlab/io/output.hpp"
#include "asvlab/workflow.hpp"
#include "oracles.hpp"

using namespace asvlab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kGeomTol = 1e-9;             // m and px
constexpr double kProfileRatio = 3.0;         // error(6) / error(2)
constexpr double kSwingTime = 2.0, kSwingTol = 0.1;  // s
constexpr int kSlewSequences = 100000;
constexpr double kGradTol = 1e-4;
constexpr double kGaeTol = 1e-10;
constexpr double kCriterion4Budget = 30.0;    // s
constexpr int kBonusEpisodes = 10000;
constexpr int kIterations = 200;
constexpr int kMinEnvs = 128;
constexpr double kMinSuccess = 0.93, kMaxFd = 0.15;
constexpr double kTrainBudget = 30.0 * 60.0;  // s
constexpr double kErRatio = 3.0, kNeRatio = 1.5;
constexpr double kNoiseFd = 0.10;
constexpr double kGapFd = 0.10;
constexpr int kE1Targets = 100;
constexpr double kE1SimBudget = 45.0 * 60.0;  // s
constexpr double kE1WallBudget = 5.0 * 60.0;  // s

const fs::path kOut = "acceptance_out";

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int n, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome geometry() {
  const CameraModel cam;
  Rng rng(1);
  double worst_m = 0.0, worst_px = 0.0;
  int n = 0;
  while (n < 1000) {
    const double X = uniform(rng, 0.0, 12.0), Y = uniform(rng, -10.0, 10.0);
    const auto px = project_to_image(cam, X, Y);
    if (!px) continue;
    ++n;
    const Vec2 back = backproject(cam, *px);
    worst_m = std::max(worst_m, std::hypot(back.x - X, back.y - Y));
    const Pixel ref = oracle::pinhole(cam, {X, Y, 0.0});
    worst_px = std::max(worst_px, std::hypot(px->u - ref.u, px->v - ref.v));
  }
  return {worst_m < kGeomTol && worst_px < kGeomTol,
          "round-trip max " + fmt(worst_m) + " m, pinhole max " + fmt(worst_px) + " px over " +
              std::to_string(n) + " points"};
}

Outcome profile_shape() {
  const auto rows = error_profile(CameraModel{}, {1, 2, 3, 4, 5, 6, 7, 8, 9}, 10.0, 2.0 * kPi / 180);
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].error) ok = false;
    if (ok && i > 0 && !(*rows[i].error > *rows[i - 1].error)) ok = false;
  }
  if (!ok) return {false, "profile not strictly increasing or unresolved on 1..9 m"};
  const double ratio = *rows[5].error / *rows[1].error;
  return {ratio >= kProfileRatio, "strictly increasing; error(2)=" + fmt(*rows[1].error) +
                                      " m, error(6)=" + fmt(*rows[5].error) +
                                      " m, ratio " + fmt(ratio)};
}

Outcome limiter() {
  const PlantConfig pc;
  RateLimiterState lim{{-1, -1}, pc.slew_rate, true};
  int ticks = 0;
  while (lim.realized.left < 1.0 - 1e-9 && ticks < 100000) {
    lim = slew_limit(lim, {1, 1}, pc.control_dt()).first;
    ++ticks;
  }
  const double swing = ticks * pc.control_dt();

  Rng rng(3);
  bool invariant = true;
  for (int s = 0; s < kSlewSequences && invariant; ++s) {
    RateLimiterState l{{uniform(rng, -1, 1), uniform(rng, -1, 1)}, uniform(rng, 0.1, 5.0), true};
    for (int k = 0; k < 20; ++k) {
      const double dt = uniform(rng, 0.001, 0.2);
      const auto before = l.realized;
      l = slew_limit(l, {uniform(rng, -2, 2), uniform(rng, -2, 2)}, dt).first;
      const double bound = l.slew_rate * dt + 1e-12;
      if (std::abs(l.realized.left - before.left) > bound ||
          std::abs(l.realized.right - before.right) > bound || std::abs(l.realized.left) > 1.0 ||
          std::abs(l.realized.right) > 1.0) {
        invariant = false;
        break;
      }
    }
  }
  return {std::abs(swing - kSwingTime) <= kSwingTol && invariant,
          "-1 to +1 at 10 Hz in " + fmt(swing) + " s; slew invariant " +
              (invariant ? "held" : "violated") + " on " + std::to_string(kSlewSequences) +
              " sequences"};
}

Outcome ppo_numerics() {
  const auto t0 = Clock::now();
  Rng rng(4);
  double worst_grad = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto c = oracle::random_grad_case(rng);
    policy::Vector g;
    policy::ppo_loss(c.net, c.mb, c.cfg, &g);
    worst_grad = std::max(worst_grad, oracle::relative_error(g, oracle::finite_difference_gradient(c)));
  }
  double worst_gae = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto c = oracle::random_gae_case(rng, 32);
    const auto out = policy::gae(c.rewards, c.values, c.dones, c.bootstrap, c.gamma, c.lambda);
    const auto ref =
        oracle::brute_force_gae(c.rewards, c.values, c.dones, c.bootstrap, c.gamma, c.lambda);
    for (std::size_t t = 0; t < ref.size(); ++t) {
      worst_gae = std::max(worst_gae, std::abs(out.advantages[t] - ref[t]));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst_grad < kGradTol && worst_gae < kGaeTol && elapsed < kCriterion4Budget,
          "gradient rel err max " + fmt(worst_grad) + " (20 nets), GAE abs err max " +
              fmt(worst_gae) + " (100 sequences), " + fmt(elapsed) + " s"};
}

Outcome reward_checks() {
  using policy::StepSnapshot;
  const policy::RewardConfig cfg;
  const StepSnapshot still{5.0, 0.0, {0, 0}, 0.3};
  const double a = policy::reward_step(still, still, cfg, true).total;
  const double b = policy::reward_step(still, {5.0, 0.0, {0, 0}, 0.7}, cfg, true).terms[4];
  const auto hit = policy::reward_step({0.12, 0.0, {0, 0}, 0.3}, {0.09, 0.0, {0, 0}, 0.3}, cfg, true);
  const bool examples = std::abs(a - -0.04) < 1e-12 &&
                        std::abs(b - (std::exp(-1.0) - 1.0)) < 1e-12 && hit.terms[6] == 10.0;

  // Random episodes hovering around the success radius.
  Rng rng(5);
  policy::EpisodeReward ep{cfg};
  int worst = 0;
  for (int e = 0; e < kBonusEpisodes; ++e) {
    ep.reset();
    int paid = 0;
    StepSnapshot prev{uniform(rng, 0, 0.3), 0, {}, 0};
    for (int k = 0; k < 30; ++k) {
      const StepSnapshot cur{uniform(rng, 0, 0.3), uniform(rng, -1, 1), {}, uniform(rng, 0, 1)};
      paid += ep.step(prev, cur).success ? 1 : 0;
      prev = cur;
    }
    worst = std::max(worst, paid);
  }
  return {examples && worst <= 1, "examples " + fmt(a) + ", " + fmt(b) + ", " +
                                      fmt(hit.terms[6]) + "; max bonuses per episode " +
                                      std::to_string(worst) + " over " +
                                      std::to_string(kBonusEpisodes) + " episodes"};
}

Outcome metric_fixtures() {
  using namespace evaluation;
  const auto straight = compute_metrics(truncate_first_approach(oracle::straight_fixture()));
  const auto turn = compute_metrics(truncate_first_approach(oracle::single_turn_fixture()));
  const auto near_tr = truncate_first_approach(oracle::loop_fixture(0.1));
  const auto wide_log = oracle::loop_fixture(0.3);
  const auto wide_tr = truncate_first_approach(wide_log);
  const double final_offset = distance(wide_log.samples.back().state.position(), wide_log.goal);
  const bool ok = std::abs(straight.pd) < 1e-12 && std::abs(turn.er) < 1e-12 &&
                  near_tr.crossed && compute_metrics(near_tr).sr == 1.0 && wide_tr.crossed &&
                  compute_metrics(wide_tr).sr == 0.0 && final_offset < 1e-12;
  return {ok, "PD " + fmt(straight.pd) + ", single-turn ER " + fmt(turn.er) +
                  ", loop SR " + fmt(compute_metrics(near_tr).sr) + " at 0.1 m and " +
                  fmt(compute_metrics(wide_tr).sr) + " at 0.3 m (trajectory ends on the goal)"};
}

Outcome arbitration_examples() {
  using namespace mission;
  auto plan = lawnmower({0, 0, 5, 10}, 5.0);
  const VesselState origin{};
  plan.next = 2;  // (0, 10)
  ActiveDetectionSet set;
  const auto empty = select_goal(origin, plan, set);
  set.detections = {{{0, -1}, 0.0}, {{1, 7}, 0.0}};
  const auto eligible = select_goal(origin, plan, set);
  plan.next = 1;  // (0, 5)
  set.detections = {{{0, 8}, 0.0}, {{2, 4}, 0.0}};
  const auto nearest = select_goal(VesselState{3, 3, 0, 0, 0, 0, 0}, plan, set);
  const bool ok = empty.source == GoalSource::Waypoint && empty.goal.y == 10.0 &&
                  eligible.source == GoalSource::Detection && eligible.goal.x == 1.0 &&
                  nearest.source == GoalSource::Detection && nearest.goal.x == 2.0 &&
                  nearest.goal.y == 4.0;
  return {ok, std::string("empty -> ") + to_string(empty.source) + ", ineligible-nearer -> (" +
                  fmt(eligible.goal.x) + "," + fmt(eligible.goal.y) + "), two eligible -> (" +
                  fmt(nearest.goal.x) + "," + fmt(nearest.goal.y) + ")"};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "asvlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

Outcome reproducibility(const std::string& checkpoint) {
  std::vector<std::vector<std::string>> commands{
      {"dump-curve"},
      {"error-profile"},
      {"train", "--iterations", "3"},
      {"evaluate", "--condition", "01", "--condition", "11", "--checkpoint", checkpoint},
      {"evaluate", "--condition", "01", "--backend", "B", "--checkpoint", checkpoint},
      {"mission", "--scenario", "e2", "--backend", "B", "--checkpoint", checkpoint},
  };
  std::vector<fs::path> dirs{kOut / "repro_a", kOut / "repro_b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    for (auto args : commands) {
      args.push_back("--out");
      args.push_back(d.string());
      if (int rc = cli(args); rc != 0) {
        return {false, "'" + args[0] + "' exited with " + std::to_string(rc)};
      }
    }
    if (int rc = cli({"gap", (d / "metrics_01_A.json").string(), (d / "metrics_01_B.json").string(),
                      "--out", (d / "gap.json").string()});
        rc != 0) {
      return {false, "'gap' exited with " + std::to_string(rc)};
    }
  }
  const auto a = read_tree(dirs[0]);
  const auto b = read_tree(dirs[1]);
  std::vector<std::string> diff;
  for (const auto& [name, text] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second != text) diff.push_back(name);
  }
  if (a.size() != b.size() || !diff.empty()) {
    return {false, std::to_string(diff.size()) + " of " + std::to_string(a.size()) +
                       " files differ" + (diff.empty() ? "" : ", first " + diff.front())};
  }
  return {true, std::to_string(a.size()) +
                    " files identical across two runs of train, evaluate (A, B), gap, mission, "
                    "dump-curve, error-profile"};
}

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);
  fs::create_directories(kOut);
  io::RunConfig cfg;
  const std::string hash = io::config_hash(cfg);

  report(1, geometry());
  report(2, profile_shape());
  report(3, limiter());
  report(4, ppo_numerics());
  report(5, reward_checks());

  // Training.
  std::map<evaluation::PolicyVariant, policy::PolicyNet> nets;
  double nominal_train_s = 0.0;
  std::string train_note;
  for (auto v : {evaluation::PolicyVariant::Nominal, evaluation::PolicyVariant::NoRateLimiter}) {
    const auto tc = workflow::training_for(cfg, v);
    const auto t0 = Clock::now();
    try {
      auto res = policy::train(tc, workflow::training_seed(cfg.seed));
      if (v == evaluation::PolicyVariant::Nominal) nominal_train_s = seconds_since(t0);
      io::save_checkpoint((kOut / cli::checkpoint_name(v)).string(), res.net, hash, cfg.seed);
      nets.emplace(v, std::move(res.net));
    } catch (const std::exception& e) {
      train_note += std::string(evaluation::to_string(v)) + " training failed: " + e.what() + "; ";
    }
  }
  const bool trained = nets.size() == 2;

  // Evaluation of every condition on backend A and the ideal condition on B.
  std::map<std::string, std::vector<evaluation::GoalRun>> runs;
  std::map<std::string, evaluation::MetricsRecord> means;
  const io::Provenance prov_a{hash, cfg.seed, "A"}, prov_b{hash, cfg.seed, "B"};
  if (trained) {
    for (const auto& spec : evaluation::condition_catalog()) {
      runs[spec.id] = workflow::evaluate(nets.at(spec.policy), cfg, spec, Backend::A);
      means[spec.id] = evaluation::mean(evaluation::metrics_of(runs[spec.id]));
      io::write_json((kOut / ("metrics_" + spec.id + "_A.json")).string(),
                     io::metrics_table(prov_a, spec, runs[spec.id]));
      std::cout << "  " << spec.id << "-" << spec.name << " NT=" << fmt(means[spec.id].nt)
                << " NE=" << fmt(means[spec.id].ne) << " FD=" << fmt(means[spec.id].fd)
                << " ER=" << fmt(means[spec.id].er) << " PD=" << fmt(means[spec.id].pd)
                << " SR=" << fmt(means[spec.id].sr) << std::endl;
    }
    const auto spec01 = evaluation::find_condition("01");
    runs["01B"] = workflow::evaluate(nets.at(spec01.policy), cfg, spec01, Backend::B);
    means["01B"] = evaluation::mean(evaluation::metrics_of(runs["01B"]));
    io::write_json((kOut / "metrics_01_B.json").string(),
                   io::metrics_table(prov_b, spec01, runs["01B"]));
  }

  // 6: nominal training and the ideal condition.
  if (!trained) {
    report(6, {false, train_note});
  } else {
    const auto& tc = cfg.training.ppo;
    const auto& m = means.at("01");
    const bool ok = tc.iterations == kIterations && tc.num_envs >= kMinEnvs &&
                    m.sr >= kMinSuccess && m.fd <= kMaxFd && nominal_train_s <= kTrainBudget;
    report(6, {ok, std::to_string(tc.iterations) + " iterations x " +
                       std::to_string(tc.num_envs) + " envs in " + fmt(nominal_train_s) +
                       " s; condition 01 on A: SR " + fmt(m.sr) + ", FD " + fmt(m.fd) + " m"});
  }

  // 7: robustness trends.
  if (!trained) {
    report(7, {false, "no trained policies"});
  } else {
    const auto& c = means;
    const double er_ratio = c.at("03").er / c.at("01").er;
    const double ne_ratio = c.at("03").ne / c.at("01").ne;
    const bool a = er_ratio >= kErRatio && ne_ratio >= kNeRatio;
    const bool b = c.at("05").ne <= c.at("06").ne && c.at("06").ne <= c.at("07").ne;
    bool cc = true;
    for (const char* id : {"10", "11", "12"}) {
      cc = cc && c.at(id).sr == 1.0 && c.at(id).fd <= kNoiseFd;
    }
    const bool d = c.at("14").sr == 1.0 && c.at("14").er > c.at("01").er;
    report(7, {a && b && cc && d,
               std::string("(a) ") + (a ? "ok" : "FAIL") + " ER x" + fmt(er_ratio) + " NE x" +
                   fmt(ne_ratio) + "; (b) " + (b ? "ok" : "FAIL") + " NE " +
                   fmt(c.at("05").ne) + " <= " + fmt(c.at("06").ne) + " <= " +
                   fmt(c.at("07").ne) + "; (c) " + (cc ? "ok" : "FAIL") + " FD " +
                   fmt(c.at("10").fd) + "/" + fmt(c.at("11").fd) + "/" + fmt(c.at("12").fd) +
                   "; (d) " + (d ? "ok" : "FAIL") + " SR " + fmt(c.at("14").sr) + " ER " +
                   fmt(c.at("14").er) + " vs " + fmt(c.at("01").er)});
  }

  // 8: gap.
  if (!trained) {
    report(8, {false, "no trained policies"});
  } else {
    const auto a = evaluation::metrics_of(runs.at("01"));
    const auto self = evaluation::gap(a, a);
    const auto ab = evaluation::gap(a, evaluation::metrics_of(runs.at("01B")));
    bool zero = true;
    for (double g : self.values) zero = zero && g == 0.0;
    const double g_fd = ab.values[2], g_sr = ab.values[5];
    io::write_json((kOut / "gap_01_A_B.json").string(),
                   io::gap_report(ab, io::provenance_json(prov_a), io::provenance_json(prov_b)));
    report(8, {zero && g_fd <= kGapFd && g_sr == 0.0,
               std::string("self-gap ") + (zero ? "zero" : "non-zero") + "; A vs B on 01: G_FD " +
                   fmt(g_fd) + " m, G_SR " + fmt(g_sr)});
  }

  report(9, metric_fixtures());

  // 10 and 11: E1 mission.
  std::optional<mission::MissionResult> e1;
  if (!trained) {
    report(10, {false, "no trained policy"});
  } else {
    const auto& net = nets.at(evaluation::PolicyVariant::Nominal);
    const auto t0 = Clock::now();
    e1 = workflow::run_scenario(net, cfg, "e1", Backend::A);
    const double wall = seconds_since(t0);
    const auto again = workflow::run_scenario(net, cfg, "e1", Backend::A);
    bool same = e1->log.size() == again.log.size() && e1->events.size() == again.events.size();
    for (std::size_t i = 0; same && i < e1->log.size(); ++i) {
      same = e1->log[i].state == again.log[i].state && e1->log[i].cmd == again.log[i].cmd;
    }
    io::write_json((kOut / "mission_e1_A_stats.json").string(),
                   io::mission_stats_json(prov_a, e1->stats));
    const auto& s = e1->stats;
    report(10, {s.captured == kE1Targets && s.autonomous_time <= kE1SimBudget && same &&
                    wall <= kE1WallBudget,
                std::to_string(s.captured) + "/" + std::to_string(kE1Targets) + " captured in " +
                    fmt(s.autonomous_time) + " s simulated, " + fmt(wall) + " s wall, " +
                    (same ? "deterministic" : "NOT deterministic") + " on replay"});
  }
  {
    const auto ex = arbitration_examples();
    if (!e1) {
      report(11, {false, ex.detail + "; no E1 replay"});
    } else {
      int pursued = 0, violations = 0;
      double worst = 0.0;
      for (const auto& row : e1->log) {
        if (row.choice.source != mission::GoalSource::Detection) continue;
        ++pursued;
        worst = std::max(worst, row.choice.eligibility_distance);
        if (row.choice.eligibility_distance > cfg.mission.eligibility_radius) ++violations;
      }
      report(11, {ex.pass && violations == 0 && pursued > 0,
                  ex.detail + "; E1 replay: " + std::to_string(pursued) +
                      " pursuit steps, max |z - w_k| " + fmt(worst) + " m <= " +
                      fmt(cfg.mission.eligibility_radius) + " m"});
    }
  }

  // 12: CLI reproducibility, reusing the nominal checkpoint.
  if (!trained) {
    report(12, {false, "no trained policy"});
  } else {
    report(12, reproducibility(
                   fs::absolute(kOut / cli::checkpoint_name(evaluation::PolicyVariant::Nominal))
                       .string()));
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
