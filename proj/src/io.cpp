#include "rotsync/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rotsync/errors.hpp"

namespace rotsync {

std::string format_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string status_to_string(RunStatus s) {
  switch (s) {
  case RunStatus::Completed:
    return "completed";
  case RunStatus::SingularR:
    return "singular_r";
  case RunStatus::StepUnderflow:
    return "step_underflow";
  }
  return "completed";
}

namespace {

std::string swarm_header(int n, int d, int k) {
  std::ostringstream out;
  out << "t";
  for (int a = 1; a <= n; ++a) {
    for (int j = 1; j <= d; ++j) {
      for (int i = 1; i <= d; ++i) {
        out << ",a" << a << "_q_" << i << "_" << j;
      }
    }
    for (int i = 1; i <= k; ++i) {
      for (int j = i; j <= k; ++j) {
        out << ",a" << a << "_r_" << i << "_" << j;
      }
    }
  }
  return out.str();
}

std::string consensus_header(int n, int d, int k) {
  std::ostringstream out;
  out << "t";
  for (int a = 1; a <= n; ++a) {
    for (int j = 1; j <= k; ++j) {
      for (int i = 1; i <= d; ++i) {
        out << ",a" << a << "_z_" << i << "_" << j;
      }
    }
  }
  return out.str();
}

template <class StateT>
void write_rows(std::ostream& out, const Trajectory<StateT>& traj) {
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    out << format_g17(traj.times[s]);
    const Eigen::VectorXd y = flatten(traj.states[s]);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      out << ',' << format_g17(y(i));
    }
    out << '\n';
  }
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  return out;
}

} // namespace

void write_trajectory_csv(const std::string& path, const SwarmTrajectory& traj) {
  if (traj.states.empty()) {
    throw std::invalid_argument("write_trajectory_csv: empty trajectory");
  }
  const SwarmState& s0 = traj.states.front();
  std::ofstream out = open_for_write(path);
  out << swarm_header(s0.n, s0.d, s0.k) << '\n';
  write_rows(out, traj);
}

void write_trajectory_csv(const std::string& path,
                          const ConsensusTrajectory& traj) {
  if (traj.states.empty()) {
    throw std::invalid_argument("write_trajectory_csv: empty trajectory");
  }
  const ConsensusState& s0 = traj.states.front();
  std::ofstream out = open_for_write(path);
  out << consensus_header(s0.n, s0.d, s0.k) << '\n';
  write_rows(out, traj);
}

SwarmTrajectory read_swarm_trajectory_csv(const std::string& path, int n,
                                          int d, int k) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("'" + path + "': missing header");
  }
  if (line != swarm_header(n, d, k)) {
    throw std::runtime_error("'" + path +
                             "': header does not match n/d/k layout");
  }
  const int width = 1 + swarm_flat_size(n, d, k);
  SwarmTrajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream iss(line);
    double t = 0.0;
    if (!(iss >> t)) {
      throw std::runtime_error("'" + path + "': malformed row");
    }
    Eigen::VectorXd y(width - 1);
    for (int i = 0; i < width - 1; ++i) {
      if (!(iss >> y(i))) {
        throw std::runtime_error("'" + path + "': short row");
      }
    }
    traj.times.push_back(t);
    traj.states.push_back(unflatten_swarm(y, n, d, k));
  }
  if (traj.states.empty()) {
    throw std::runtime_error("'" + path + "': no data rows");
  }
  return traj;
}

SwarmState read_swarm_state_csv(const std::string& path, int n, int d, int k) {
  const SwarmTrajectory traj = read_swarm_trajectory_csv(path, n, d, k);
  return traj.states.back();
}

void write_metrics_csv(const std::string& path, const SyncReport& report,
                       int run_k) {
  const Eigen::Index t_count = static_cast<Eigen::Index>(report.times.size());
  const Eigen::Index n = report.r_sync.rows();
  std::ofstream out = open_for_write(path);
  out << "t";
  for (Eigen::Index a = 1; a <= n; ++a) out << ",q_sync_a" << a;
  for (Eigen::Index a = 1; a <= n; ++a) out << ",r_sync_a" << a;
  for (Eigen::Index a = 1; a <= n; ++a) out << ",u_norm_a" << a;
  for (Eigen::Index a = 1; a <= n; ++a) out << ",rdot_norm_a" << a;
  out << '\n';
  const Eigen::MatrixXd& q = report.q_sync.at(static_cast<std::size_t>(run_k - 1));
  for (Eigen::Index s = 0; s < t_count; ++s) {
    out << format_g17(report.times[static_cast<std::size_t>(s)]);
    for (Eigen::Index a = 0; a < n; ++a) out << ',' << format_g17(q(a, s));
    for (Eigen::Index a = 0; a < n; ++a)
      out << ',' << format_g17(report.r_sync(a, s));
    for (Eigen::Index a = 0; a < n; ++a)
      out << ',' << format_g17(report.u_norm(a, s));
    for (Eigen::Index a = 0; a < n; ++a)
      out << ',' << format_g17(report.rdot_norm(a, s));
    out << '\n';
  }
}

void write_metrics_csv(const std::string& path, const ConsensusReport& report) {
  std::ofstream out = open_for_write(path);
  out << "t,diameter\n";
  for (std::size_t s = 0; s < report.times.size(); ++s) {
    out << format_g17(report.times[s]) << ','
        << format_g17(report.diameter[s]) << '\n';
  }
}

void write_deviation_csv(const std::string& path,
                         const std::vector<double>& times,
                         const std::vector<double>& deviation) {
  std::ofstream out = open_for_write(path);
  out << "t,delta\n";
  for (std::size_t s = 0; s < times.size(); ++s) {
    out << format_g17(times[s]) << ',' << format_g17(deviation[s]) << '\n';
  }
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json graph;
  graph["source"] = cfg.graph.source;
  graph["edge_prob"] = cfg.graph.edge_prob;
  graph["n"] = cfg.graph.n;
  graph["inline_edges"] = cfg.graph.inline_edges;
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : cfg.graph.edges) {
    edges.push_back({e.from + 1, e.to + 1, e.weight}); // 1-based externally
  }
  graph["edges"] = edges;

  nlohmann::json integ;
  integ["rel_tol"] = cfg.integrator.rel_tol;
  integ["abs_tol"] = cfg.integrator.abs_tol;
  integ["h_init"] = cfg.integrator.h_init;
  integ["h_min"] = cfg.integrator.h_min;
  integ["h_max"] = cfg.integrator.h_max;
  integ["t_final"] = cfg.integrator.t_final;
  integ["reproject_threshold"] = cfg.integrator.reproject_threshold;
  integ["record_stride"] = cfg.integrator.record_stride;

  nlohmann::json j;
  j["mode"] = to_string(cfg.mode);
  j["n"] = cfg.n;
  j["d"] = cfg.d;
  j["k"] = cfg.k;
  j["seed"] = cfg.seed;
  j["num_seeds"] = cfg.num_seeds;
  j["init"] = to_string(cfg.init);
  j["init_file"] = cfg.init_file;
  j["graph"] = graph;
  j["integrator"] = integ;
  j["out"] = cfg.output_dir;
  j["workers"] = cfg.workers;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.mode = mode_from_string(j.at("mode").get<std::string>());
  cfg.n = j.at("n").get<int>();
  cfg.d = j.at("d").get<int>();
  cfg.k = j.at("k").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.num_seeds = j.at("num_seeds").get<int>();
  cfg.init = init_from_string(j.at("init").get<std::string>());
  cfg.init_file = j.at("init_file").get<std::string>();
  const nlohmann::json& graph = j.at("graph");
  cfg.graph.source = graph.at("source").get<std::string>();
  cfg.graph.edge_prob = graph.at("edge_prob").get<double>();
  cfg.graph.n = graph.at("n").get<int>();
  cfg.graph.inline_edges = graph.at("inline_edges").get<bool>();
  cfg.graph.edges.clear();
  for (const nlohmann::json& e : graph.at("edges")) {
    cfg.graph.edges.push_back(Edge{e.at(0).get<int>() - 1,
                                   e.at(1).get<int>() - 1,
                                   e.at(2).get<double>()});
  }
  const nlohmann::json& integ = j.at("integrator");
  cfg.integrator.rel_tol = integ.at("rel_tol").get<double>();
  cfg.integrator.abs_tol = integ.at("abs_tol").get<double>();
  cfg.integrator.h_init = integ.at("h_init").get<double>();
  cfg.integrator.h_min = integ.at("h_min").get<double>();
  cfg.integrator.h_max = integ.at("h_max").get<double>();
  cfg.integrator.t_final = integ.at("t_final").get<double>();
  cfg.integrator.reproject_threshold =
      integ.at("reproject_threshold").get<double>();
  cfg.integrator.record_stride = integ.at("record_stride").get<int>();
  cfg.output_dir = j.at("out").get<std::string>();
  cfg.workers = j.at("workers").get<int>();
  return cfg;
}

nlohmann::json graph_to_json(const DirectedWeightedGraph& g) {
  nlohmann::json j;
  j["n"] = g.node_count();
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : g.edges()) {
    edges.push_back({e.from + 1, e.to + 1, e.weight});
  }
  j["edges"] = edges;
  return j;
}

nlohmann::json events_to_json(const std::vector<Event>& events) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Event& e : events) {
    nlohmann::json item;
    item["time"] = e.time;
    item["kind"] =
        e.kind == EventKind::SingularR ? "singular_r" : "step_underflow";
    item["agent"] = e.agent >= 0 ? nlohmann::json(e.agent + 1)
                                 : nlohmann::json(nullptr);
    arr.push_back(item);
  }
  return arr;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_for_write(path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace rotsync
