#include "rotsync/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

#include <omp.h>

#include "rotsync/errors.hpp"
#include "rotsync/io.hpp"

namespace rotsync {

namespace fs = std::filesystem;

int hardware_worker_count() { return omp_get_max_threads(); }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int exit_code_for(RunStatus status) {
  switch (status) {
  case RunStatus::Completed:
    return 0;
  case RunStatus::SingularR:
    return 3;
  case RunStatus::StepUnderflow:
    return 4;
  }
  return 0;
}

nlohmann::json summary_skeleton(const ExperimentConfig& cfg,
                                const DirectedWeightedGraph& g) {
  nlohmann::json j;
  j["config"] = config_to_json(cfg);
  j["resolved_graph"] = graph_to_json(g);
  return j;
}

SwarmState make_swarm_init(const ExperimentConfig& cfg) {
  switch (cfg.init) {
  case InitKind::GaussianQr:
    return init_gaussian_qr(cfg.seed, cfg.n, cfg.d, cfg.k);
  case InitKind::Identity:
    return init_identity(cfg.n, cfg.d, cfg.k);
  case InitKind::FromFile:
    return read_swarm_state_csv(cfg.init_file, cfg.n, cfg.d, cfg.k);
  }
  return init_identity(cfg.n, cfg.d, cfg.k);
}

ConsensusState make_consensus_init(const ExperimentConfig& cfg) {
  switch (cfg.init) {
  case InitKind::GaussianQr:
    return init_gaussian_z(cfg.seed, cfg.n, cfg.d, cfg.k);
  case InitKind::Identity: {
    ConsensusState state;
    state.n = cfg.n;
    state.d = cfg.d;
    state.k = cfg.k;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(cfg.d, cfg.k);
    block.topRows(cfg.k) = Eigen::MatrixXd::Identity(cfg.k, cfg.k);
    state.Z.assign(static_cast<std::size_t>(cfg.n), block);
    return state;
  }
  case InitKind::FromFile:
    throw ConfigError("init = from_file is only supported in closed_loop mode");
  }
  throw ConfigError("bad init kind");
}

RunOutcome run_closed_loop(const ExperimentConfig& cfg,
                           const DirectedWeightedGraph& g, bool quiet) {
  const auto start = Clock::now();
  const SwarmState swarm0 = make_swarm_init(cfg);
  const SwarmTrajectory traj = integrate_closed_loop(swarm0, g, cfg.integrator);
  SyncReport report = compute_report(traj, g);
  report.converged_at =
      detect_convergence(report, kConvergenceTol, kConvergenceDwell);

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_trajectory_csv((dir / "trajectory.csv").string(), traj);
  write_metrics_csv((dir / "metrics.csv").string(), report, cfg.k);

  nlohmann::json summary = summary_skeleton(cfg, g);
  summary["status"] = status_to_string(traj.status);
  summary["events"] = events_to_json(traj.events);
  summary["converged_at"] = report.converged_at
                                ? nlohmann::json(*report.converged_at)
                                : nlohmann::json(nullptr);
  const Eigen::Index last = static_cast<Eigen::Index>(report.times.size()) - 1;
  const auto finite_or_null = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json final_errors;
  final_errors["q_sync_max"] =
      report.q_sync.at(static_cast<std::size_t>(cfg.k - 1)).col(last).maxCoeff();
  final_errors["r_sync_max"] = report.r_sync.col(last).maxCoeff();
  final_errors["u_norm_max"] = finite_or_null(report.u_norm.col(last).maxCoeff());
  final_errors["rdot_norm_max"] =
      finite_or_null(report.rdot_norm.col(last).maxCoeff());
  summary["final"] = final_errors;
  if (report.converged_at) {
    // The common column block every agent settled on (reference agent's).
    nlohmann::json cols = nlohmann::json::array();
    for (Eigen::Index i = 0; i < report.limit_q_cols.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < report.limit_q_cols.cols(); ++j) {
        row.push_back(report.limit_q_cols(i, j));
      }
      cols.push_back(row);
    }
    summary["limit_q_cols"] = cols;
  }
  summary["wall_time_s"] = seconds_since(start);
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");

  if (!quiet) {
    std::cout << "closed_loop: status=" << status_to_string(traj.status)
              << " converged_at="
              << (report.converged_at ? format_g17(*report.converged_at)
                                      : std::string("never"))
              << " -> " << dir.string() << "\n";
  }
  return RunOutcome{exit_code_for(traj.status), traj.status,
                    report.converged_at};
}

RunOutcome run_consensus(const ExperimentConfig& cfg,
                         const DirectedWeightedGraph& g) {
  const auto start = Clock::now();
  const ConsensusState z0 = make_consensus_init(cfg);
  const ConsensusTrajectory traj = integrate_consensus(z0, g, cfg.integrator);
  const ConsensusReport report = compute_report(traj);

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_trajectory_csv((dir / "trajectory.csv").string(), traj);
  write_metrics_csv((dir / "metrics.csv").string(), report);

  nlohmann::json summary = summary_skeleton(cfg, g);
  summary["status"] = status_to_string(traj.status);
  summary["events"] = events_to_json(traj.events);
  summary["converged_at"] = nullptr;
  nlohmann::json final_errors;
  final_errors["diameter"] = report.diameter.back();
  summary["final"] = final_errors;
  summary["wall_time_s"] = seconds_since(start);
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");

  std::cout << "consensus: status=" << status_to_string(traj.status)
            << " final_diameter=" << format_g17(report.diameter.back())
            << " -> " << dir.string() << "\n";
  return RunOutcome{exit_code_for(traj.status), traj.status, std::nullopt};
}

RunOutcome run_equivalence(const ExperimentConfig& cfg,
                           const DirectedWeightedGraph& g) {
  const auto start = Clock::now();
  const ConsensusState z0 = make_consensus_init(cfg);
  Rng completion = Rng::substream(cfg.seed, kCompletionStream);
  const EquivalenceResult result =
      equivalence_run(z0, g, cfg.integrator, completion);
  SyncReport report = compute_report(result.swarm, g);
  report.converged_at =
      detect_convergence(report, kConvergenceTol, kConvergenceDwell);

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_trajectory_csv((dir / "trajectory.csv").string(), result.swarm);
  write_metrics_csv((dir / "metrics.csv").string(), report, cfg.k);
  write_deviation_csv((dir / "deviation.csv").string(), result.swarm.times,
                      result.deviation);

  // Gap between the closed-loop product blocks and the consensus limit at
  // the final time.
  const Eigen::MatrixXd zbar = consensus_limit(z0, g);
  const SwarmState& final_state = result.swarm.states.back();
  double limit_gap = 0.0;
  for (int i = 0; i < cfg.n; ++i) {
    const AgentState& a = final_state.agents[static_cast<std::size_t>(i)];
    limit_gap =
        std::max(limit_gap, (a.Q.m.leftCols(cfg.k) * a.R.m - zbar).norm());
  }

  nlohmann::json summary = summary_skeleton(cfg, g);
  summary["status"] = status_to_string(result.swarm.status);
  summary["events"] = events_to_json(result.swarm.events);
  summary["converged_at"] = report.converged_at
                                ? nlohmann::json(*report.converged_at)
                                : nlohmann::json(nullptr);
  nlohmann::json final_errors;
  final_errors["sup_deviation"] = result.sup_deviation;
  final_errors["limit_gap"] = limit_gap;
  summary["final"] = final_errors;
  summary["wall_time_s"] = seconds_since(start);
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");

  std::cout << "equivalence: status=" << status_to_string(result.swarm.status)
            << " sup_deviation=" << format_g17(result.sup_deviation)
            << " limit_gap=" << format_g17(limit_gap) << " -> " << dir.string()
            << "\n";
  return RunOutcome{exit_code_for(result.swarm.status), result.swarm.status,
                    report.converged_at};
}

RunOutcome run_monte_carlo(const ExperimentConfig& cfg,
                           const DirectedWeightedGraph& g) {
  const auto start = Clock::now();
  const int count = cfg.num_seeds;
  const int workers = cfg.workers > 0 ? cfg.workers : hardware_worker_count();

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  struct MemberResult {
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::Completed;
    std::optional<double> converged_at;
    std::string error;
  };
  std::vector<MemberResult> members(static_cast<std::size_t>(count));

#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int m = 0; m < count; ++m) {
    ExperimentConfig member = cfg;
    member.mode = Mode::ClosedLoop;
    member.seed = cfg.seed + static_cast<std::uint64_t>(m);
    member.output_dir =
        (dir / ("seed_" + std::to_string(member.seed))).string();
    MemberResult& res = members[static_cast<std::size_t>(m)];
    res.seed = member.seed;
    try {
      // Graph resolution is seed-dependent only for the random generator;
      // a member run is identical to a single run with the same seed.
      const DirectedWeightedGraph member_graph =
          cfg.graph.source == "random_qsc" ? resolve_graph(member) : g;
      const RunOutcome out = run_closed_loop(member, member_graph, true);
      res.status = out.status;
      res.converged_at = out.converged_at;
    } catch (const std::exception& e) {
      res.status = RunStatus::StepUnderflow;
      res.error = e.what();
    }
  }

  int converged = 0;
  RunStatus worst = RunStatus::Completed;
  nlohmann::json per_seed = nlohmann::json::array();
  for (const MemberResult& res : members) {
    if (res.converged_at) {
      ++converged;
    }
    if (res.status != RunStatus::Completed && worst == RunStatus::Completed) {
      worst = res.status;
    }
    nlohmann::json item;
    item["seed"] = res.seed;
    item["status"] = status_to_string(res.status);
    item["converged_at"] = res.converged_at ? nlohmann::json(*res.converged_at)
                                            : nlohmann::json(nullptr);
    if (!res.error.empty()) {
      item["error"] = res.error;
    }
    per_seed.push_back(item);
  }

  nlohmann::json aggregate = summary_skeleton(cfg, g);
  aggregate["num_seeds"] = count;
  aggregate["converged"] = converged;
  aggregate["convergence_fraction"] =
      static_cast<double>(converged) / static_cast<double>(count);
  aggregate["runs"] = per_seed;
  aggregate["workers"] = workers;
  aggregate["wall_time_s"] = seconds_since(start);
  write_text_file((dir / "aggregate.json").string(), aggregate.dump(2) + "\n");

  std::cout << "monte_carlo: " << converged << "/" << count
            << " converged -> " << dir.string() << "\n";
  return RunOutcome{exit_code_for(worst), worst, std::nullopt};
}

} // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const DirectedWeightedGraph g = resolve_graph(cfg);
  if (!is_quasi_strongly_connected(g)) {
    std::cerr << "warning: interaction graph is not quasi-strongly connected; "
                 "synchronization is not guaranteed\n";
  }
  switch (cfg.mode) {
  case Mode::ClosedLoop:
    return run_closed_loop(cfg, g, false);
  case Mode::Consensus:
    return run_consensus(cfg, g);
  case Mode::Equivalence:
    return run_equivalence(cfg, g);
  case Mode::MonteCarlo:
    return run_monte_carlo(cfg, g);
  }
  throw ConfigError("bad mode");
}

} // namespace rotsync
