// handover: command-line front end.
//
//   handover eval      --episodes N --seed S --arch A|B --policy planner|random --out-dir DIR
//   handover plan      --start x,y,theta --goal x,y,theta | --seed S   [--out FILE]
//   handover rollout   --plan FILE [--out FILE]
//   handover rasterize [--pitch P] [--out FILE]
//   handover serve     [--listen host:port] [--stdio]
//   handover motion    --robot L|R --from x,y --to x,y [--out FILE] | --replay FILE

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "handover/config.hpp"
#include "handover/evaluate.hpp"
#include "handover/motion.hpp"
#include "handover/planner.hpp"
#include "handover/serialization.hpp"
#include "handover/server.hpp"

namespace fs = std::filesystem;
using namespace handover;

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  return in;
}

/// Writes to `path`, or to stdout when the path is empty.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out = open_output(path);
  fn(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ObjectState to_state(const std::vector<double>& v) { return {v.at(0), v.at(1), v.at(2)}; }

struct Common {
  std::string config_path;
  std::optional<std::string> arch;
  std::optional<double> epsilon;
  std::optional<int> max_steps;

  AppConfig load() const {
    AppConfig cfg = config_path.empty() ? AppConfig{} : load_config(config_path);
    if (arch) cfg.episode.architecture = architecture_from_string(*arch);
    if (epsilon) cfg.episode.epsilon = *epsilon;
    if (max_steps) cfg.episode.max_steps = *max_steps;
    cfg.episode.validate();
    return cfg;
  }
};

void add_common(CLI::App* sub, Common& c, bool with_arch) {
  sub->add_option("--config", c.config_path, "Key-value configuration file")->check(CLI::ExistingFile);
  if (with_arch) sub->add_option("--arch", c.arch, "Architecture")->check(CLI::IsMember({"A", "B"}));
  sub->add_option("--epsilon", c.epsilon, "Orientation tolerance (rad)")->check(CLI::PositiveNumber);
  sub->add_option("--max-steps", c.max_steps, "Episode step cap")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-arm hand-over simulation, planning and environment server"};
  app.require_subcommand(1);

  // eval
  Common eval_c;
  int episodes = 50;
  std::uint64_t eval_seed = 1;
  std::string policy = "planner";
  std::string out_dir = ".";
  unsigned threads = 1;
  bool write_traces = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a policy over seeded episodes");
  add_common(eval, eval_c, true);
  eval->add_option("--episodes", episodes, "Number of episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "Base seed");
  eval->add_option("--policy", policy, "Decision-maker")->check(CLI::IsMember({"planner", "random"}));
  eval->add_option("--out-dir", out_dir, "Directory for metrics.csv, metrics.json and episodes.csv");
  eval->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  eval->add_flag("--traces", write_traces, "Also write traces.jsonl with every transition");

  // plan
  Common plan_c;
  std::vector<double> start_v, goal_v;
  std::optional<std::uint64_t> plan_seed;
  std::string plan_out;
  auto* plan = app.add_subcommand("plan", "Print a planner solution for one start/goal pair");
  add_common(plan, plan_c, false);
  plan->add_option("--start", start_v, "Start pose x,y,theta")->delimiter(',')->expected(3);
  plan->add_option("--goal", goal_v, "Goal pose x,y,theta")->delimiter(',')->expected(3);
  plan->add_option("--seed", plan_seed, "Sample start and goal from this seed");
  plan->add_option("--out", plan_out, "Output file (default stdout)");

  // rollout
  Common rollout_c;
  std::string plan_path, rollout_out;
  auto* rollout = app.add_subcommand("rollout", "Replay a plan file and print transitions as JSON lines");
  add_common(rollout, rollout_c, false);
  rollout->add_option("--plan", plan_path, "Plan file written by `plan`")->required();
  rollout->add_option("--out", rollout_out, "Output file (default stdout)");

  // rasterize
  Common raster_c;
  std::optional<double> pitch;
  std::string raster_out;
  auto* raster = app.add_subcommand("rasterize", "Export the grid approximation of the manipulation space");
  add_common(raster, raster_c, false);
  raster->add_option("--pitch", pitch, "Grid pitch (mm)")->check(CLI::PositiveNumber);
  raster->add_option("--out", raster_out, "Output file (default stdout)");

  // serve
  Common serve_c;
  std::string listen;
  bool use_stdio = false;
  auto* serve = app.add_subcommand("serve", "Serve episodes over the line protocol");
  add_common(serve, serve_c, true);
  serve->add_option("--listen", listen, "host:port (overrides config and " + std::string(kListenEnvVar) + ")");
  serve->add_flag("--stdio", use_stdio, "Serve a single session on stdin/stdout");

  // motion
  std::string robot_name = "L";
  std::vector<double> from_v, to_v;
  std::string motion_out, replay_path;
  auto* motion = app.add_subcommand("motion", "Optimize or check the joint trajectory of one leg");
  motion->add_option("--robot", robot_name, "Robot")->check(CLI::IsMember({"L", "R"}));
  auto* from_opt = motion->add_option("--from", from_v, "Pick point x,y")->delimiter(',')->expected(2);
  auto* to_opt = motion->add_option("--to", to_v, "Drop point x,y")->delimiter(',')->expected(2);
  motion->add_option("--out", motion_out, "Write the trajectory as JSON");
  auto* replay_opt = motion->add_option("--replay", replay_path, "Check a trajectory JSON file");
  from_opt->excludes(replay_opt);
  to_opt->excludes(replay_opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval) {
      const AppConfig cfg = eval_c.load();
      const Workspace ws(cfg.workspace);
      PolicyFactory factory;
      if (policy == "planner") {
        factory = planner_policy_factory(std::make_shared<const Planner>(ws), cfg.episode);
      } else {
        const Architecture arch = cfg.episode.architecture;
        factory = [arch, eval_seed] { return std::make_unique<RandomPolicy>(arch, mix_seed(eval_seed, ~0ULL)); };
        threads = 1;  // one policy stream across episodes keeps runs reproducible
      }
      const EvaluationResult res = evaluate(ws, cfg.episode, episodes, eval_seed, factory, threads);
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) throw std::runtime_error("cannot create directory: " + out_dir + ": " + ec.message());
      const fs::path dir(out_dir);
      with_output((dir / "metrics.csv").string(), [&](std::ostream& os) { write_metrics_csv(os, res.metrics); });
      with_output((dir / "metrics.json").string(),
                  [&](std::ostream& os) { os << metrics_to_json(res.metrics).dump(2) << '\n'; });
      with_output((dir / "episodes.csv").string(), [&](std::ostream& os) { write_episodes_csv(os, res.episodes); });
      if (write_traces) {
        with_output((dir / "traces.jsonl").string(), [&](std::ostream& os) {
          auto p = factory();
          for (int i = 0; i < episodes; ++i) {
            EpisodeTrace trace;
            run_episode(ws, cfg.episode, *p, mix_seed(eval_seed, static_cast<std::uint64_t>(i)), i, &trace);
            write_trace_jsonl(os, trace);
          }
        });
      }
      std::cout << "episodes=" << res.metrics.episodes << " success_rate=" << res.metrics.success_rate
                << " mean_steps=" << res.metrics.mean_steps << '\n';
      return 0;
    }

    if (*plan) {
      const AppConfig cfg = plan_c.load();
      const Workspace ws(cfg.workspace);
      ObjectState start{}, goal{};
      if (!start_v.empty() && !goal_v.empty()) {
        start = to_state(start_v);
        goal = to_state(goal_v);
      } else if (plan_seed) {
        Environment env(ws, cfg.episode);
        const AugmentedState s = env.reset(*plan_seed);
        start = s.current;
        goal = s.goal;
      } else {
        throw CLI::ValidationError("plan", "give --start and --goal, or --seed");
      }
      for (const ObjectState* s : {&start, &goal}) {
        if (!ws.union_contains(s->position(), kBoundaryTolerance))
          throw DomainError("pose outside the manipulation space");
      }
      const Planner planner(ws);
      const PlanResult r = planner.plan(start, goal, cfg.episode.epsilon, cfg.episode.max_steps);
      with_output(plan_out, [&](std::ostream& os) { write_plan(os, start, goal, cfg.episode.epsilon, r.plan); });
      if (!r.success) std::cerr << "no plan within " << cfg.episode.max_steps << " steps\n";
      return 0;
    }

    if (*rollout) {
      AppConfig cfg = rollout_c.load();
      std::ifstream in = open_input(plan_path);
      const PlanFile pf = read_plan(in);
      cfg.episode.architecture = Architecture::B;
      if (!rollout_c.epsilon) cfg.episode.epsilon = pf.epsilon;
      Environment env(cfg.workspace, cfg.episode);
      env.reset(std::nullopt, pf.start, pf.goal);
      for (const ActionB& a : pf.plan.actions) {
        if (env.done()) break;
        env.step(a);
      }
      with_output(rollout_out, [&](std::ostream& os) { write_trace_jsonl(os, env.trace()); });
      return 0;
    }

    if (*raster) {
      const AppConfig cfg = raster_c.load();
      const Workspace ws(cfg.workspace);
      const GridApproximation g = ws.rasterize(pitch.value_or(cfg.workspace.grid_pitch));
      with_output(raster_out, [&](std::ostream& os) { write_grid_csv(os, g); });
      return 0;
    }

    if (*serve) {
      const AppConfig cfg = serve_c.load();
      if (use_stdio) {
        serve_stream(std::cin, std::cout, cfg);
        return 0;
      }
      const ListenAddress addr = parse_listen_address(listen.empty() ? resolve_listen_address(cfg.listen) : listen);
      TcpServer server(addr, cfg);
      std::cerr << "listening on " << addr.host << ':' << server.port() << std::endl;
      server.run();
      return 0;
    }

    if (*motion) {
      const Workspace ws;
      const RobotSpec& robot = ws.robot(robot_from_string(robot_name));
      const ArmModel arm;
      arm.validate_against(robot);
      json report;
      if (!replay_path.empty()) {
        std::ifstream in = open_input(replay_path);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw std::runtime_error("malformed JSON in " + replay_path);
        const SplineTrajectory traj = trajectory_from_json(j);
        MotionProblem p;
        p.robot = robot;
        p.arm = arm;
        p.q0 = traj.control.front();
        p.q1 = traj.control.back();
        p.knot_count = traj.knot_count;
        p.degree = traj.degree;
        const ViolationReport v = check_constraints(traj, p);
        report = {{"cost", path_cost(traj, p)}, {"feasible", v.ok()}, {"violations", v.violations.size()}};
      } else {
        if (from_v.empty() || to_v.empty()) throw CLI::ValidationError("motion", "give --from and --to, or --replay");
        const MotionProblem p =
            make_leg_problem(robot, arm, {from_v[0], from_v[1]}, {to_v[0], to_v[1]}, arm.mount_height);
        const MotionResult r = optimize_traj(p);
        if (!motion_out.empty())
          with_output(motion_out, [&](std::ostream& os) { os << to_json(r.trajectory).dump(2) << '\n'; });
        report = {{"cost", r.cost},
                  {"initial_cost", r.initial_cost},
                  {"feasible", r.feasible},
                  {"iterations", r.iterations},
                  {"violations", r.report.violations.size()}};
      }
      std::cout << report.dump() << '\n';
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
