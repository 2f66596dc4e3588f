#include "rotsync/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rotsync/errors.hpp"
#include "rotsync/matops.hpp"

namespace rotsync {

std::string to_string(Mode m) {
  switch (m) {
  case Mode::ClosedLoop:
    return "closed_loop";
  case Mode::Consensus:
    return "consensus";
  case Mode::Equivalence:
    return "equivalence";
  case Mode::MonteCarlo:
    return "monte_carlo";
  }
  return "closed_loop";
}

std::string to_string(InitKind k) {
  switch (k) {
  case InitKind::GaussianQr:
    return "gaussian_qr";
  case InitKind::Identity:
    return "identity";
  case InitKind::FromFile:
    return "from_file";
  }
  return "gaussian_qr";
}

Mode mode_from_string(const std::string& s) {
  if (s == "closed_loop") return Mode::ClosedLoop;
  if (s == "consensus") return Mode::Consensus;
  if (s == "equivalence") return Mode::Equivalence;
  if (s == "monte_carlo") return Mode::MonteCarlo;
  throw ConfigError("unknown mode '" + s + "'");
}

InitKind init_from_string(const std::string& s) {
  if (s == "gaussian_qr") return InitKind::GaussianQr;
  if (s == "identity") return InitKind::Identity;
  if (s == "from_file") return InitKind::FromFile;
  throw ConfigError("unknown init '" + s + "'");
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 1) {
    throw ConfigError("n must be >= 1");
  }
  if (cfg.d < 2) {
    throw ConfigError("d must be >= 2");
  }
  if (cfg.k < 1 || cfg.k > cfg.d - 1) {
    throw ConfigError("k must satisfy 1 <= k <= d-1");
  }
  if (cfg.mode == Mode::MonteCarlo && cfg.num_seeds < 1) {
    throw ConfigError("num_seeds must be >= 1");
  }
  if (cfg.workers < 0) {
    throw ConfigError("workers must be >= 0");
  }
  if (cfg.init == InitKind::FromFile && cfg.init_file.empty()) {
    throw ConfigError("init = from_file requires init_file");
  }
  if (cfg.graph.inline_edges && cfg.graph.n != 0 && cfg.graph.n != cfg.n) {
    throw ConfigError("graph section n does not match experiment n");
  }
  if (cfg.graph.source == "random_qsc" &&
      !(cfg.graph.edge_prob > 0.0 && cfg.graph.edge_prob <= 1.0)) {
    throw ConfigError("edge_prob must be in (0, 1]");
  }
  try {
    validate(cfg.integrator);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// config grammar

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  const std::size_t pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected unsigned integer, got '" +
                      value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected number, got '" + value + "'");
  }
}

std::string unquote(const std::string& value) {
  if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                            (value.front() == '\'' && value.back() == '\''))) {
    return value.substr(1, value.size() - 2);
  }
  return value;
}

/// Parses "[[1, 2, 0.5], [2, 3, 0.25]]" into 0-based edges.
std::vector<Edge> parse_edge_array(const std::string& text) {
  std::vector<Edge> edges;
  const std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw ConfigError("edges: expected [[i, j, w], ...], got '" + t + "'");
  }
  const std::string inner = t.substr(1, t.size() - 2);
  std::size_t pos = 0;
  while (pos < inner.size()) {
    while (pos < inner.size() &&
           (std::isspace(static_cast<unsigned char>(inner[pos])) ||
            inner[pos] == ',')) {
      ++pos;
    }
    if (pos >= inner.size()) break;
    if (inner[pos] != '[') {
      throw ConfigError("edges: expected '[' in edge list");
    }
    const std::size_t close = inner.find(']', pos);
    if (close == std::string::npos) {
      throw ConfigError("edges: unbalanced brackets");
    }
    std::string triple = inner.substr(pos + 1, close - pos - 1);
    std::replace(triple.begin(), triple.end(), ',', ' ');
    std::istringstream iss(triple);
    double fi = 0, fj = 0, w = 0;
    if (!(iss >> fi >> fj >> w)) {
      throw ConfigError("edges: malformed triple '" + triple + "'");
    }
    std::string rest;
    if (iss >> rest) {
      throw ConfigError("edges: trailing content in triple '" + triple + "'");
    }
    const int i = static_cast<int>(fi);
    const int j = static_cast<int>(fj);
    if (static_cast<double>(i) != fi || static_cast<double>(j) != fj) {
      throw ConfigError("edges: node labels must be integers");
    }
    edges.push_back(Edge{i - 1, j - 1, w}); // file is 1-based
    pos = close + 1;
  }
  return edges;
}

int bracket_balance(const std::string& s) {
  int bal = 0;
  for (char c : s) {
    if (c == '[') ++bal;
    if (c == ']') --bal;
  }
  return bal;
}

struct KeyValue {
  std::string section; // "" for top level
  std::string key;
  std::string value;
};

std::vector<KeyValue> tokenize_config(const std::string& text) {
  std::vector<KeyValue> items;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[' && s.back() == ']' && s.find('=') == std::string::npos) {
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + s + "'");
    }
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    // Multi-line array values: keep consuming until brackets balance.
    int bal = bracket_balance(value);
    while (bal > 0 && std::getline(stream, line)) {
      ++lineno;
      const std::string cont = trim(strip_comment(line));
      value += " " + cont;
      bal = bracket_balance(value);
    }
    if (bal != 0) {
      throw ConfigError("key '" + key + "': unbalanced brackets");
    }
    items.push_back(KeyValue{section, key, unquote(value)});
  }
  return items;
}

void apply_graph_key(GraphConfig& g, const KeyValue& kv) {
  if (kv.key == "n") {
    g.n = parse_int(kv.key, kv.value);
  } else if (kv.key == "edges") {
    g.edges = parse_edge_array(kv.value);
    g.inline_edges = true;
    g.source.clear();
  } else {
    throw ConfigError("unknown key '" + kv.key + "' in [graph] section");
  }
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  for (const KeyValue& kv : tokenize_config(text)) {
    if (kv.section == "graph") {
      apply_graph_key(cfg.graph, kv);
      continue;
    }
    if (!kv.section.empty()) {
      throw ConfigError("unknown section [" + kv.section + "]");
    }
    const std::string& k = kv.key;
    const std::string& v = kv.value;
    if (k == "mode") {
      cfg.mode = mode_from_string(v);
    } else if (k == "n") {
      cfg.n = parse_int(k, v);
    } else if (k == "d") {
      cfg.d = parse_int(k, v);
    } else if (k == "k") {
      cfg.k = parse_int(k, v);
    } else if (k == "seed") {
      cfg.seed = parse_u64(k, v);
    } else if (k == "num_seeds") {
      cfg.num_seeds = parse_int(k, v);
    } else if (k == "init") {
      cfg.init = init_from_string(v);
    } else if (k == "init_file") {
      cfg.init_file = v;
    } else if (k == "graph") {
      cfg.graph.source = v;
      cfg.graph.inline_edges = false;
    } else if (k == "edge_prob") {
      cfg.graph.edge_prob = parse_double(k, v);
    } else if (k == "out") {
      cfg.output_dir = v;
    } else if (k == "workers") {
      cfg.workers = parse_int(k, v);
    } else if (k == "t_final") {
      cfg.integrator.t_final = parse_double(k, v);
    } else if (k == "rel_tol") {
      cfg.integrator.rel_tol = parse_double(k, v);
    } else if (k == "abs_tol") {
      cfg.integrator.abs_tol = parse_double(k, v);
    } else if (k == "h_init") {
      cfg.integrator.h_init = parse_double(k, v);
    } else if (k == "h_min") {
      cfg.integrator.h_min = parse_double(k, v);
    } else if (k == "h_max") {
      cfg.integrator.h_max = parse_double(k, v);
    } else if (k == "reproject_threshold") {
      cfg.integrator.reproject_threshold = parse_double(k, v);
    } else if (k == "record_stride") {
      cfg.integrator.record_stride = parse_int(k, v);
    } else {
      throw ConfigError("unknown key '" + k + "'");
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

GraphConfig parse_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open graph file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  GraphConfig g;
  g.source.clear();
  for (const KeyValue& kv : tokenize_config(buf.str())) {
    if (!kv.section.empty() && kv.section != "graph") {
      throw ConfigError("graph file: unknown section [" + kv.section + "]");
    }
    apply_graph_key(g, kv);
  }
  if (!g.inline_edges) {
    throw ConfigError("graph file '" + path + "' has no edges");
  }
  return g;
}

// ---------------------------------------------------------------------------
// generators

DirectedWeightedGraph make_default_graph() {
  // Agents 3..5 form a complete terminal component (the centers); agents 1
  // and 2 observe the whole component, and 1 also observes 2. Nothing points
  // into agent 1 and the terminal component cannot reach the followers, so
  // the graph is quasi-strongly but not strongly connected. Weights are
  // frozen uniform(0,1) draws whose slowest Laplacian mode has
  // Re(lambda) = 2.15, fast enough for default-horizon runs to converge
  // below 1e-6 with margin.
  const std::vector<Edge> edges = {
      {0, 1, 0.19218328947623298}, {0, 2, 0.81064080456126142},
      {0, 3, 0.66025795697022283}, {0, 4, 0.87538248164427945},
      {1, 2, 0.97192091800238101}, {1, 3, 0.81504145180263476},
      {1, 4, 0.85596819711948813}, {2, 3, 0.42965926039842461},
      {2, 4, 0.90411967611964694}, {3, 2, 0.84731284146842867},
      {3, 4, 0.94032932377981626}, {4, 2, 0.82864854549099154},
      {4, 3, 0.40501598807235162},
  };
  return DirectedWeightedGraph(5, edges);
}

DirectedWeightedGraph make_complete_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) {
        edges.push_back(Edge{i, j, 1.0});
      }
    }
  }
  return DirectedWeightedGraph(n, edges);
}

DirectedWeightedGraph make_chain_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) {
    edges.push_back(Edge{i, i + 1, 1.0});
  }
  return DirectedWeightedGraph(n, edges);
}

DirectedWeightedGraph make_random_qsc_graph(int n, double edge_prob, Rng& rng) {
  constexpr int kMaxTries = 1000;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        if (rng.uniform01() < edge_prob) {
          edges.push_back(Edge{i, j, rng.uniform_open(0.0, 1.0)});
        }
      }
    }
    DirectedWeightedGraph g(n, std::move(edges));
    if (is_quasi_strongly_connected(g)) {
      return g;
    }
  }
  throw ConfigError("random_qsc: no quasi-strongly connected draw in " +
                    std::to_string(kMaxTries) + " attempts");
}

DirectedWeightedGraph resolve_graph(const ExperimentConfig& cfg) {
  const GraphConfig& g = cfg.graph;
  if (g.inline_edges) {
    return DirectedWeightedGraph(g.n != 0 ? g.n : cfg.n, g.edges);
  }
  if (g.source == "default") {
    if (cfg.n != 5) {
      throw ConfigError("graph 'default' is a 5-node graph; set n = 5 or "
                        "choose another graph");
    }
    return make_default_graph();
  }
  if (g.source == "complete") {
    return make_complete_graph(cfg.n);
  }
  if (g.source == "chain") {
    return make_chain_graph(cfg.n);
  }
  if (g.source == "random_qsc") {
    Rng rng = Rng::substream(cfg.seed, kGraphStream);
    return make_random_qsc_graph(cfg.n, g.edge_prob, rng);
  }
  // Anything else is a file path.
  GraphConfig from_file = parse_graph_file(g.source);
  const int n = from_file.n != 0 ? from_file.n : cfg.n;
  if (n != cfg.n) {
    throw ConfigError("graph file n = " + std::to_string(n) +
                      " does not match experiment n = " + std::to_string(cfg.n));
  }
  return DirectedWeightedGraph(n, from_file.edges);
}

// ---------------------------------------------------------------------------
// initial states

namespace {

Eigen::MatrixXd draw_gaussian(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = rng.normal();
    }
  }
  return m;
}

/// QR of a square Gaussian with the positive-diagonal convention, last
/// column flipped into SO(d) if needed.
Eigen::MatrixXd draw_rotation(Rng& rng, int d) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    try {
      QrFactors f = qr_positive(draw_gaussian(rng, d, d));
      Eigen::MatrixXd q = std::move(f.q.m);
      if (q.determinant() < 0.0) {
        q.col(d - 1) = -q.col(d - 1);
      }
      return q;
    } catch (const RankDeficientError&) {
      // Astronomically improbable; redraw.
    }
  }
  throw std::runtime_error("draw_rotation: repeated rank-deficient draws");
}

Eigen::MatrixXd draw_upper_tri_pos(Rng& rng, int k) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    try {
      return qr_positive(draw_gaussian(rng, k, k)).r.m;
    } catch (const RankDeficientError&) {
    }
  }
  throw std::runtime_error("draw_upper_tri_pos: repeated rank-deficient draws");
}

} // namespace

SwarmState init_gaussian_qr(std::uint64_t seed, int n, int d, int k) {
  SwarmState swarm;
  swarm.n = n;
  swarm.d = d;
  swarm.k = k;
  swarm.agents.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
    Eigen::MatrixXd q = draw_rotation(rng, d);
    Eigen::MatrixXd r = draw_upper_tri_pos(rng, k);
    swarm.agents.push_back(
        AgentState{RotationMatrix{std::move(q)}, UpperTriPos{std::move(r)}});
  }
  return swarm;
}

SwarmState init_identity(int n, int d, int k) {
  SwarmState swarm;
  swarm.n = n;
  swarm.d = d;
  swarm.k = k;
  swarm.agents.assign(static_cast<std::size_t>(n),
                      AgentState{RotationMatrix{Eigen::MatrixXd::Identity(d, d)},
                                 UpperTriPos{Eigen::MatrixXd::Identity(k, k)}});
  return swarm;
}

ConsensusState init_gaussian_z(std::uint64_t seed, int n, int d, int k) {
  ConsensusState state;
  state.n = n;
  state.d = d;
  state.k = k;
  state.Z.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
    state.Z.push_back(draw_gaussian(rng, d, k));
  }
  return state;
}

} // namespace rotsync
