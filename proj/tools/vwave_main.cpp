// Command-line front end: simulate, picard, diagnose, bench-velocity.
//
// Exit codes: 0 completed, 2 collision, 3 configuration error,
// 4 stiffness limit, 1 any other failure.

#include "vwave/bench.hpp"
#include "vwave/diagnostics.hpp"
#include "vwave/integrator.hpp"
#include "vwave/io.hpp"
#include "vwave/scheme.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace vwave;

namespace {

constexpr int kExitCompleted = 0;
constexpr int kExitFailure = 1;
constexpr int kExitCollision = 2;
constexpr int kExitConfig = 3;
constexpr int kExitStiffness = 4;

int exit_code(Termination t) {
  switch (t) {
    case Termination::completed: return kExitCompleted;
    case Termination::collision: return kExitCollision;
    case Termination::stiffness: return kExitStiffness;
  }
  return kExitFailure;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("write failed for " + p.string());
}

void prepare_outdir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

void report(const std::string& label, Termination t, double failure_time, const std::string& message) {
  std::cout << label << ": " << termination_label(t, failure_time);
  if (!message.empty()) std::cout << " (" << message << ")";
  std::cout << "\n";
}

int cmd_picard(const RunSpec& spec, const fs::path& outdir);

int cmd_simulate(const fs::path& config, const fs::path& outdir) {
  const RunSpec spec = parse_config(config);
  if (spec.cfg.mode == Mode::picard) return cmd_picard(spec, outdir);
  prepare_outdir(outdir);
  RunManifest man;
  man.version = version_string();
  man.start_time = utc_timestamp();
  man.config_echo = format_config(spec);
  write_text(outdir / "config.txt", man.config_echo);

  const SimState init = initial_state(spec.init, spec.cfg);
  const std::size_t nv = init.vortices.size();
  const fs::path traj_path = outdir / "trajectories.csv";
  std::ofstream traj(traj_path, std::ios::binary | std::ios::trunc);
  if (!traj) throw Error("cannot write " + traj_path.string());
  traj << trajectory_header(nv) << "\n";

  std::vector<TrajectoryRow> rows;
  DiagnosticsRecorder recorder(spec.cfg);
  RunObserver obs;
  obs.on_step = [&](const SimState& s) {
    TrajectoryRow r{s.t, s.vortices};
    traj << trajectory_line(r) << "\n";
    rows.push_back(std::move(r));
  };
  obs.on_record = [&](const SimState& s) { recorder(s); };
  const RunResult res = run(init, spec.cfg, obs);
  traj.close();
  if (!traj) throw Error("write failed for " + traj_path.string());

  write_diagnostics(outdir / "diagnostics.csv", nv, recorder.rows());
  write_trajectory_svg(outdir / "trajectory.svg", rows);
  write_drift_svg(outdir / "drift.svg", recorder.rows());

  man.end_time = utc_timestamp();
  man.termination = res.termination;
  man.failure_time = res.failure_time;
  man.message = res.message;
  man.steps = res.steps;
  man.outputs = {"config.txt", "trajectories.csv", "diagnostics.csv", "trajectory.svg", "drift.svg", "manifest.txt"};
  write_manifest(outdir / "manifest.txt", man);
  report("simulate", res.termination, res.failure_time, res.message);
  return exit_code(res.termination);
}

int cmd_picard(const RunSpec& spec, const fs::path& outdir) {
  prepare_outdir(outdir);
  RunManifest man;
  man.version = version_string();
  man.start_time = utc_timestamp();
  man.config_echo = format_config(spec);
  write_text(outdir / "config.txt", man.config_echo);

  const PicardRun res = run_picard(spec.init, spec.cfg);
  {
    std::ofstream out(outdir / "picard.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (outdir / "picard.csv").string());
    out << "iteration,distance,max_hdot\n";
    for (const auto& h : res.history)
      out << h.index << "," << format_number(h.distance_to_previous) << "," << format_number(h.max_hdot) << "\n";
  }
  std::vector<TrajectoryRow> rows;
  for (std::size_t s = 0; s < res.last.slice_count(); ++s) rows.push_back({res.last.times[s], res.last.vortex_slices[s]});
  const std::size_t nv = spec.init.vortices.size();
  write_trajectories(outdir / "trajectories.csv", nv, rows);
  write_trajectory_svg(outdir / "trajectory.svg", rows);

  man.end_time = utc_timestamp();
  man.termination = res.termination;
  man.failure_time = res.failure_time;
  man.message = res.message;
  man.steps = step_count(spec.cfg) * res.history.size();
  man.outputs = {"config.txt", "picard.csv", "trajectories.csv", "trajectory.svg", "manifest.txt"};
  write_manifest(outdir / "manifest.txt", man);
  for (const auto& h : res.history)
    std::cout << "iterate " << h.index << ": distance " << format_number(h.distance_to_previous) << "\n";
  std::cout << "picard: " << (res.converged ? "converged" : "iteration limit reached") << "\n";
  report("picard", res.termination, res.failure_time, res.message);
  return exit_code(res.termination);
}

int cmd_diagnose(const fs::path& dir) {
  const RunSpec spec = parse_config(dir / "config.txt");
  const auto rows = read_trajectories(dir / "trajectories.csv");
  const auto base = initial_vortices(spec.init);
  const bool vortex_only = spec.init.patches.empty() && !spec.init.background;

  std::vector<DiagnosticsRecord> out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ConfinementTracker conf;
  for (const auto& row : rows) {
    if (row.vortices.size() != base.size()) throw Error("trajectories.csv does not match config.txt");
    std::vector<MassiveVortex> vs = base;
    for (std::size_t k = 0; k < vs.size(); ++k) {
      vs[k].h = row.vortices[k].h;
      vs[k].hdot = row.vortices[k].hdot;
    }
    conf.observe(vs);
    DiagnosticsRecord r;
    r.t = row.t;
    r.Hn = vortex_functional_H(vs);
    r.min_vortex_dist = min_vortex_distance(vs);
    if (vortex_only) {
      SimState s;
      s.cloud = ParticleCloud(Eigen::Matrix2Xd(2, 0), Eigen::VectorXd(0), spec.cfg.blob_sigma);
      s.vortices = vs;
      r.H0 = energy_H0(s, spec.cfg.mollifier_eps);
      r.I0 = momentum_I0(s);
    } else {
      r.H0 = nan;
      r.I0 = nan;
    }
    r.min_particle_vortex_dist = nan;
    r.support_radius = nan;
    r.Fk.assign(vs.size(), nan);
    out.push_back(std::move(r));
  }
  write_diagnostics(dir / "diagnostics_recomputed.csv", base.size(), out);

  std::cout << "rows: " << out.size() << "\n";
  if (!out.empty()) {
    const double h0 = out.front().Hn;
    double drift = 0.0;
    for (const auto& r : out) drift = std::max(drift, std::abs(r.Hn - h0));
    std::cout << "max |Hn(t) - Hn(0)|: " << format_number(drift) << "\n";
  }
  const auto& c = conf.report();
  std::cout << "max |h|: " << format_number(c.max_h) << "\n"
            << "max |h'|: " << format_number(c.max_hdot) << "\n"
            << "min pair distance: " << format_number(c.min_pair_dist) << "\n";
  return kExitCompleted;
}

int cmd_bench(const VelocityBenchOptions& opt) {
  const VelocityBenchResult r = bench_velocity(opt);
  nlohmann::json j = {{"n", r.n},
                      {"theta", r.theta},
                      {"tree_build_seconds", r.tree_build_seconds},
                      {"tree_seconds", r.tree_seconds},
                      {"direct_seconds", r.direct_seconds},
                      {"direct_targets_timed", r.direct_targets},
                      {"time_ratio", r.time_ratio()},
                      {"max_rel_error", r.max_rel_error},
                      {"max_pointwise_rel_error", r.max_pointwise_rel_error}};
  std::cout << j.dump(2) << "\n";
  return kExitCompleted;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for the vortex-wave system with massive point vortices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  std::string config;
  std::string outdir;
  auto* sim = app.add_subcommand("simulate", "Run the coupled solver");
  sim->add_option("config", config, "Config file")->required();
  sim->add_option("outdir", outdir, "Output directory")->required();

  std::string pconfig;
  std::string poutdir;
  auto* pic = app.add_subcommand("picard", "Run the Picard iteration");
  pic->add_option("config", pconfig, "Config file")->required();
  pic->add_option("outdir", poutdir, "Output directory")->required();

  std::string trajdir;
  auto* diag = app.add_subcommand("diagnose", "Recompute vortex diagnostics from a run directory");
  diag->add_option("trajdir", trajdir, "Directory written by simulate")->required();

  VelocityBenchOptions bopt;
  auto* bench = app.add_subcommand("bench-velocity", "Time the treecode against direct summation");
  bench->add_option("--n", bopt.n, "Particle count")->check(CLI::PositiveNumber);
  bench->add_option("--theta", bopt.theta, "Opening angle")->check(CLI::Range(0.0, 1.0));
  bench->add_option("--probes", bopt.probes, "Probes for the error estimate")->check(CLI::PositiveNumber);
  bench->add_option("--direct-targets", bopt.direct_targets, "Targets summed directly (0 = all)");
  bench->add_option("--sigma", bopt.sigma, "Blob radius")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bopt.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(config, outdir);
    if (*pic) return cmd_picard(parse_config(pconfig), poutdir);
    if (*diag) return cmd_diagnose(trajdir);
    if (*bench) return cmd_bench(bopt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CollisionError& e) {
    std::cerr << "collision: " << e.what() << "\n";
    return kExitCollision;
  } catch (const StiffnessError& e) {
    std::cerr << "stiffness: " << e.what() << "\n";
    return kExitStiffness;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
