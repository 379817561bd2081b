// Command-line front end: binds JSON run configs to the batch drivers and
// writes CSV/NDJSON/SVG artifacts plus a metadata sidecar per run.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "noslip/dynamics.hpp"
#include "noslip/experiments.hpp"
#include "noslip/geometry.hpp"
#include "noslip/orbits.hpp"
#include "noslip/output.hpp"
#include "noslip/table_json.hpp"
#include "noslip/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace noslip;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool svg = true;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--threads", args.threads, "worker thread cap (0: machine parallelism)");
  cmd->add_flag("--svg,!--no-svg", args.svg, "write SVG artifacts");
}

json load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j = json::parse(in);
  // accept a metadata sidecar from a previous run as-is
  if (j.contains("config") && j.contains("command")) {
    if (j.at("command").get<std::string>() != command)
      throw std::invalid_argument("sidecar config was produced by command '" +
                                  j.at("command").get<std::string>() + "'");
    j = j.at("config");
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct RunContext {
  std::string command;
  CommonArgs args;
  json resolved;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  fs::path out_path(const std::string& name) {
    fs::create_directories(args.out_dir);
    outputs.push_back(name);
    return fs::path(args.out_dir) / name;
  }

  void finish() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json meta;
    meta["command"] = command;
    meta["version"] = kVersion;
    meta["config"] = resolved;
    meta["outputs"] = outputs;
    meta["wall_time_s"] = wall;
    fs::create_directories(args.out_dir);
    std::ofstream out(fs::path(args.out_dir) / "metadata.json", std::ios::binary);
    out << meta.dump(2) << '\n';
  }
};

ForceField force_from_json(const json& j) {
  if (j.is_null()) return ForceField::none();
  const double g = j.value("g", 0.0);
  Vec2 dir{0.0, -1.0};
  if (j.contains("direction")) dir = vec2_from_json(j.at("direction"));
  return ForceField::gravity(g, dir);
}

json force_to_json(const ForceField& f) {
  return json{{"g", f.g}, {"direction", vec2_to_json(f.dir)}};
}

// ---------------------------------------------------------------------------

int cmd_simulate(RunContext& ctx) {
  const json cfg = load_config(ctx.args.config_path, ctx.command);
  Table table = table_from_json(cfg.at("table"));
  const double gamma = cfg.value("gamma", 1.0 / std::numbers::sqrt2);
  const MassDistribution mass = MassDistribution::from_gamma(gamma);
  const ForceField force = force_from_json(cfg.value("force", json()));
  if (cfg.value("rule", "no-slip") == std::string("specular"))
    table.set_rule(CollisionRule::specular);

  const json& init = cfg.at("initial");
  ParticleState state;
  state.pos = vec2_from_json(init.at("pos"));
  state.vel = vec2_from_json(init.at("vel"));
  state.rot_vel = init.value("spin", 0.0);
  state.orientation = init.value("orientation", 0.0);

  StopRule stop;
  if (cfg.contains("stop")) {
    stop.max_collisions = cfg.at("stop").value("collisions", 1000L);
    stop.t_max = cfg.at("stop").value("t_max", kInf);
  } else {
    stop.max_collisions = 1000;
  }

  ctx.resolved = {{"table", cfg.at("table")},
                  {"gamma", gamma},
                  {"force", force_to_json(force)},
                  {"rule", cfg.value("rule", "no-slip")},
                  {"initial",
                   {{"pos", vec2_to_json(state.pos)},
                    {"vel", vec2_to_json(state.vel)},
                    {"spin", state.rot_vel},
                    {"orientation", state.orientation}}},
                  {"stop",
                   {{"collisions", stop.max_collisions},
                    {"t_max", stop.t_max == kInf ? json() : json(stop.t_max)}}}};

  const OrbitResult orbit = run_orbit(state, table, force, mass, stop);
  std::ostringstream csv;
  write_events_csv(csv, orbit);
  write_text(ctx.out_path("events.csv"), csv.str());
  if (ctx.args.svg)
    write_text(ctx.out_path("trajectory.svg"),
               render_trajectory(table, state, orbit.events, force));
  ctx.finish();
  std::cout << "collisions: " << orbit.events.size()
            << "  termination: " << to_string(orbit.termination) << '\n';
  return orbit.termination == Termination::numerical ? 2 : 0;
}

int cmd_periodic(RunContext& ctx) {
  const json cfg = load_config(ctx.args.config_path, ctx.command);
  WedgePeriodicSpec spec;
  spec.phi = cfg.at("phi").get<double>();
  spec.theta = cfg.at("theta").get<double>();
  spec.d = cfg.value("d", 1.0);
  spec.g = cfg.value("g", 1.0);
  spec.gamma = cfg.value("gamma", 1.0 / std::numbers::sqrt2);
  const std::string opening = cfg.value("opening", "up");
  spec.orientation =
      opening == "down" ? WedgeOrientation::opening_down : WedgeOrientation::opening_up;
  const std::string force_dir = cfg.value("force_direction", opening == "down" ? "up" : "down");
  if ((opening == "up" && force_dir != "down") || (opening == "down" && force_dir != "up"))
    throw std::invalid_argument("periodic: an opening-" + opening +
                                " wedge requires force_direction \"" +
                                (opening == "up" ? "down" : "up") + "\"");
  const int n = cfg.value("collisions", 100);

  ctx.resolved = {{"phi", spec.phi},     {"theta", spec.theta},
                  {"d", spec.d},         {"g", spec.g},
                  {"gamma", spec.gamma}, {"opening", opening},
                  {"force_direction", force_dir}, {"collisions", n}};

  const WedgePeriodicOrbit orbit = construct_wedge_periodic(spec);
  const double closure = wedge_closure_error(orbit, n);

  std::cout << "v = " << fmt(orbit.v_scale) << '\n'
            << "launch_speed = " << fmt(orbit.launch_speed) << '\n'
            << "x0_spin = " << fmt(orbit.spin) << '\n'
            << "q0 = (" << fmt(orbit.q0.x) << ", " << fmt(orbit.q0.y) << ")\n"
            << "q1 = (" << fmt(orbit.q1.x) << ", " << fmt(orbit.q1.y) << ")\n"
            << "initial_vel = (" << fmt(orbit.state.vel.x) << ", " << fmt(orbit.state.vel.y)
            << ")\n"
            << "closure_error = " << fmt(closure) << " (relative, " << n << " collisions)\n";

  const OrbitResult run = run_orbit(orbit.state, orbit.table, orbit.force, orbit.mass, {n});
  std::ostringstream csv;
  write_events_csv(csv, run);
  write_text(ctx.out_path("events.csv"), csv.str());
  if (ctx.args.svg)
    write_text(ctx.out_path("trajectory.svg"),
               render_trajectory(orbit.table, orbit.state, run.events, orbit.force));
  ctx.finish();
  return run.termination == Termination::numerical ? 2 : 0;
}

int cmd_galton(RunContext& ctx) {
  const json cfg = load_config(ctx.args.config_path, ctx.command);
  GaltonConfig gc;
  if (cfg.contains("board")) {
    const json& b = cfg.at("board");
    gc.spacing = b.value("spacing", gc.spacing);
    gc.scatterer_radius = b.value("radius", gc.scatterer_radius);
    gc.top_y = b.value("top", gc.top_y);
    gc.terminal_y = b.value("terminal", gc.terminal_y);
  }
  gc.n_particles = cfg.value("n_particles", gc.n_particles);
  gc.speed = cfg.value("speed", gc.speed);
  gc.spin = cfg.value("spin", gc.spin);
  if (cfg.contains("drop")) gc.drop = vec2_from_json(cfg.at("drop"));
  gc.t_max = cfg.value("t_max", gc.t_max);
  gc.seed = ctx.args.seed.value_or(cfg.value("seed", gc.seed));
  gc.rule = cfg.value("rule", "no-slip") == std::string("specular")
                ? CollisionRule::specular
                : CollisionRule::no_slip;
  gc.gamma = cfg.value("gamma", gc.gamma);
  gc.g = cfg.value("g", gc.g);
  const std::string sampling = cfg.value("direction_sampling", "down-semicircle");
  gc.sampling = sampling == "full-circle"      ? DirectionSampling::full_circle
                : sampling == "spin-randomized" ? DirectionSampling::spin_randomized
                                                : DirectionSampling::down_semicircle;
  gc.max_collisions = cfg.value("max_collisions", gc.max_collisions);
  gc.threads = ctx.args.threads;

  ctx.resolved = {{"board",
                   {{"spacing", gc.spacing},
                    {"radius", gc.scatterer_radius},
                    {"top", gc.top_y},
                    {"terminal", gc.terminal_y}}},
                  {"n_particles", gc.n_particles},
                  {"speed", gc.speed},
                  {"spin", gc.spin},
                  {"drop", vec2_to_json(gc.drop)},
                  {"t_max", gc.t_max},
                  {"seed", gc.seed},
                  {"rule", gc.rule == CollisionRule::specular ? "specular" : "no-slip"},
                  {"gamma", gc.gamma},
                  {"g", gc.g},
                  {"direction_sampling", sampling},
                  {"max_collisions", gc.max_collisions}};

  const GaltonResult result = run_galton(gc);
  std::ostringstream csv;
  write_galton_csv(csv, result);
  write_text(ctx.out_path("galton.csv"), csv.str());
  std::ostringstream trapped;
  write_trapped_csv(trapped, result);
  write_text(ctx.out_path("trapped.csv"), trapped.str());
  ctx.finish();
  std::cout << "arrived: " << result.arrived << " / " << gc.n_particles
            << "  (fraction " << fmt6(result.arrival_fraction()) << ")\n"
            << "unfinished: " << result.unfinished << "  failed: " << result.failed << '\n';
  return 0;
}

int cmd_phase_portrait(RunContext& ctx) {
  const json cfg = load_config(ctx.args.config_path, ctx.command);
  PhasePortraitConfig pc;
  pc.table = table_from_json(cfg.at("table"));
  pc.mass = MassDistribution::from_gamma(cfg.value("gamma", 1.0 / std::numbers::sqrt2));
  pc.force = force_from_json(cfg.value("force", json()));
  pc.n_orbits = cfg.value("n_orbits", pc.n_orbits);
  pc.collisions_per_orbit = cfg.value("collisions_per_orbit", pc.collisions_per_orbit);
  pc.seed = ctx.args.seed.value_or(cfg.value("seed", pc.seed));
  pc.threads = ctx.args.threads;
  const std::string mode_str = cfg.value("mode", "velocity-disk");
  const PortraitMode mode =
      mode_str == "s-vs-angle" ? PortraitMode::s_vs_angle : PortraitMode::velocity_disk;
  if (cfg.value("rule", "no-slip") == std::string("specular"))
    pc.table.set_rule(CollisionRule::specular);

  ctx.resolved = {{"table", cfg.at("table")},
                  {"gamma", pc.mass.gamma},
                  {"force", force_to_json(pc.force)},
                  {"n_orbits", pc.n_orbits},
                  {"collisions_per_orbit", pc.collisions_per_orbit},
                  {"seed", pc.seed},
                  {"mode", mode_str},
                  {"rule", cfg.value("rule", "no-slip")}};

  const PhasePortrait portrait = sample_phase_portrait(pc);
  std::ostringstream nd;
  write_phase_ndjson(nd, portrait);
  write_text(ctx.out_path("phase.ndjson"), nd.str());
  if (ctx.args.svg)
    write_text(ctx.out_path("portrait.svg"), render_phase_portrait(portrait.points, mode));
  ctx.finish();
  std::cout << "orbits: " << pc.n_orbits << "  points: " << portrait.points.size() << '\n';
  return 0;
}

int cmd_stability_grid(RunContext& ctx) {
  const json cfg = load_config(ctx.args.config_path, ctx.command);
  StabilityGridSpec spec;
  spec.n1 = cfg.value("n1", spec.n1);
  spec.n2 = cfg.value("n2", spec.n2);
  if (cfg.contains("r_range")) {
    spec.axis1_lo = cfg.at("r_range").at(0).get<double>();
    spec.axis1_hi = cfg.at("r_range").at(1).get<double>();
  }
  if (cfg.contains("angle_range")) {
    spec.axis2_lo = cfg.at("angle_range").at(0).get<double>();
    spec.axis2_hi = cfg.at("angle_range").at(1).get<double>();
  }
  spec.perturbation = cfg.value("perturbation", spec.perturbation);
  spec.max_collisions = cfg.value("max_collisions", spec.max_collisions);
  spec.gamma = cfg.value("gamma", spec.gamma);
  spec.g = cfg.value("g", spec.g);
  spec.theta0 = cfg.value("theta0", spec.theta0);
  spec.fixed_phi_c = cfg.value("fixed_phi_c", spec.fixed_phi_c);
  spec.threads = ctx.args.threads;
  const std::string scen = cfg.value("scenario", "no-force-horizontal");
  GridScenario scenario = GridScenario::no_force_horizontal;
  if (scen == "force-theorem2") scenario = GridScenario::force_theorem2;
  else if (scen == "fixed-phic-vary-theta") scenario = GridScenario::fixed_phic_vary_theta;
  else if (scen != "no-force-horizontal")
    throw std::invalid_argument("stability-grid: unknown scenario '" + scen + "'");

  ctx.resolved = {{"scenario", scen},
                  {"n1", spec.n1},
                  {"n2", spec.n2},
                  {"r_range", {spec.axis1_lo, spec.axis1_hi}},
                  {"angle_range", {spec.axis2_lo, spec.axis2_hi}},
                  {"perturbation", spec.perturbation},
                  {"max_collisions", spec.max_collisions},
                  {"gamma", spec.gamma},
                  {"g", spec.g},
                  {"theta0", spec.theta0},
                  {"fixed_phi_c", spec.fixed_phi_c}};

  const ResultTable grid = stability_grid(spec, scenario);
  std::ostringstream csv;
  write_grid_csv(csv, grid);
  write_text(ctx.out_path("grid.csv"), csv.str());
  ctx.finish();
  long capped = 0;
  for (const GridRow& r : grid.rows)
    if (r.status == Termination::collision_limit) ++capped;
  std::cout << "cells: " << grid.rows.size() << "  capped: " << capped << '\n';
  return 0;
}

int cmd_channel(RunContext& ctx) {
  const json cfg = load_config(ctx.args.config_path, ctx.command);
  const double width = cfg.value("width", 1.0);
  const std::string orient = cfg.value("orientation", "none");
  ChannelForce kind = ChannelForce::none;
  if (orient == "parallel") kind = ChannelForce::parallel;
  else if (orient == "orthogonal") kind = ChannelForce::orthogonal;
  else if (orient != "none")
    throw std::invalid_argument("channel: unknown orientation '" + orient + "'");
  const double gamma = cfg.value("gamma", 1.0 / std::numbers::sqrt2);
  const int n_trials = cfg.value("n_trials", 100);
  const long n_collisions = cfg.value("n_collisions", 10000L);
  const double g = cfg.value("g", 1.0);
  const std::uint64_t seed = ctx.args.seed.value_or(cfg.value("seed", 1ull));

  ctx.resolved = {{"width", width},   {"orientation", orient},
                  {"gamma", gamma},   {"n_trials", n_trials},
                  {"n_collisions", n_collisions}, {"g", g},
                  {"seed", seed}};

  const auto trials =
      run_channel_boundedness(width, kind, MassDistribution::from_gamma(gamma), n_trials,
                              n_collisions, seed, ctx.args.threads, g);
  std::ostringstream csv;
  write_channel_csv(csv, trials);
  write_text(ctx.out_path("channel.csv"), csv.str());
  ctx.finish();
  double worst = 0.0;
  for (const auto& t : trials) worst = std::max(worst, t.extent_full);
  std::cout << "trials: " << trials.size() << "  max axial extent: " << fmt6(worst) << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven no-slip billiard simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Sub {
    const char* name;
    const char* desc;
    int (*run)(RunContext&);
  };
  const Sub subs[] = {
      {"simulate", "run one orbit and write events + trajectory", cmd_simulate},
      {"periodic", "construct a 2-periodic wedge orbit and verify closure", cmd_periodic},
      {"galton", "drop a batch of particles through a Galton board", cmd_galton},
      {"phase-portrait", "sample velocity phase portraits", cmd_phase_portrait},
      {"stability-grid", "survival grids around 2-periodic two-disk orbits",
       cmd_stability_grid},
      {"channel", "axial boundedness probes in an infinite strip", cmd_channel},
  };

  std::vector<CommonArgs> args(std::size(subs));
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < std::size(subs); ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].desc);
    add_common(cmd, args[i]);
    cmds.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < std::size(subs); ++i) {
    if (!cmds[i]->parsed()) continue;
    RunContext ctx;
    ctx.command = subs[i].name;
    ctx.args = args[i];
    try {
      return subs[i].run(ctx);
    } catch (const numerical_error& e) {
      std::cerr << "numerical failure: " << e.what() << '\n';
      return 2;
    } catch (const json::exception& e) {
      std::cerr << "invalid config: " << e.what() << '\n';
      return 1;
    } catch (const std::invalid_argument& e) {
      std::cerr << "invalid config: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
  }
  return 1;
}
