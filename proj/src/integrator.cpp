#include "rotsync/integrator.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "rotsync/errors.hpp"

namespace rotsync {

void validate(const IntegratorConfig& cfg) {
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) {
    throw std::invalid_argument("integrator: tolerances must be > 0");
  }
  if (!(cfg.t_final > 0.0)) {
    throw std::invalid_argument("integrator: t_final must be > 0");
  }
  const double hmax = resolved_h_max(cfg);
  if (!(cfg.h_min > 0.0) || !(cfg.h_min < cfg.h_init) || !(cfg.h_init <= hmax)) {
    throw std::invalid_argument("integrator: need 0 < h_min < h_init <= h_max");
  }
  if (!(cfg.reproject_threshold > 0.0)) {
    throw std::invalid_argument("integrator: reproject_threshold must be > 0");
  }
  if (cfg.record_stride < 1) {
    throw std::invalid_argument("integrator: record_stride must be >= 1");
  }
}

double resolved_h_max(const IntegratorConfig& cfg) {
  return cfg.h_max > 0.0 ? cfg.h_max : cfg.t_final / 10.0;
}

// ---------------------------------------------------------------------------
// state flattening

int swarm_flat_size(int n, int d, int k) { return n * (d * d + k * (k + 1) / 2); }

int consensus_flat_size(int n, int d, int k) { return n * d * k; }

Eigen::VectorXd flatten(const SwarmState& swarm) {
  Eigen::VectorXd y(swarm_flat_size(swarm.n, swarm.d, swarm.k));
  Eigen::Index pos = 0;
  for (const AgentState& a : swarm.agents) {
    for (Eigen::Index j = 0; j < swarm.d; ++j) {
      for (Eigen::Index i = 0; i < swarm.d; ++i) {
        y(pos++) = a.Q.m(i, j);
      }
    }
    for (Eigen::Index i = 0; i < swarm.k; ++i) {
      for (Eigen::Index j = i; j < swarm.k; ++j) {
        y(pos++) = a.R.m(i, j);
      }
    }
  }
  return y;
}

SwarmState unflatten_swarm(const Eigen::VectorXd& y, int n, int d, int k) {
  SwarmState swarm;
  swarm.n = n;
  swarm.d = d;
  swarm.k = k;
  swarm.agents.reserve(static_cast<std::size_t>(n));
  Eigen::Index pos = 0;
  for (int a = 0; a < n; ++a) {
    Eigen::MatrixXd q(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) {
        q(i, j) = y(pos++);
      }
    }
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = i; j < k; ++j) {
        r(i, j) = y(pos++);
      }
    }
    swarm.agents.push_back(AgentState{RotationMatrix{std::move(q)},
                                      UpperTriPos{std::move(r)}});
  }
  return swarm;
}

Eigen::VectorXd flatten(const ConsensusState& state) {
  Eigen::VectorXd y(consensus_flat_size(state.n, state.d, state.k));
  Eigen::Index pos = 0;
  for (const Eigen::MatrixXd& z : state.Z) {
    for (Eigen::Index j = 0; j < state.k; ++j) {
      for (Eigen::Index i = 0; i < state.d; ++i) {
        y(pos++) = z(i, j);
      }
    }
  }
  return y;
}

ConsensusState unflatten_consensus(const Eigen::VectorXd& y, int n, int d,
                                   int k) {
  ConsensusState state;
  state.n = n;
  state.d = d;
  state.k = k;
  state.Z.reserve(static_cast<std::size_t>(n));
  Eigen::Index pos = 0;
  for (int a = 0; a < n; ++a) {
    Eigen::MatrixXd z(d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) {
        z(i, j) = y(pos++);
      }
    }
    state.Z.push_back(std::move(z));
  }
  return state;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) driver

namespace {

// Butcher tableau (classic DOPRI5 coefficients). Both vector fields here are
// autonomous, so the tableau's c row never enters a derivative call.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b(5th) - b(4th): error estimator weights (k7 = f at the new point).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI step-size controller constants (stabilized control, standard choices).
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kFacShrinkMax = 5.0; // h may shrink to h/5 per retry
constexpr double kFacGrowMax = 0.1;   // h may grow to 10h (h / 0.1)

struct RawTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Event> events;
  RunStatus status = RunStatus::Completed;
};

using DerivFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using PostAcceptFn = std::function<void(Eigen::VectorXd&)>;
// Returns offending agent (0-based) or -1.
using SingularCheckFn = std::function<int(const Eigen::VectorXd&)>;

RawTrajectory integrate_adaptive(const DerivFn& deriv,
                                 const PostAcceptFn& post_accept,
                                 const SingularCheckFn& singular_check,
                                 const Eigen::VectorXd& y0,
                                 const IntegratorConfig& cfg) {
  const double t_final = cfg.t_final;
  const double h_max = resolved_h_max(cfg);

  RawTrajectory traj;
  Eigen::VectorXd y = y0;
  double t = 0.0;
  traj.times.push_back(t);
  traj.states.push_back(y);

  const auto record = [&](double time, const Eigen::VectorXd& state) {
    traj.times.push_back(time);
    traj.states.push_back(state);
  };

  double h = std::min(cfg.h_init, h_max);
  double facold = 1e-4;
  bool prev_rejected = false;
  long accepted = 0;
  bool last_recorded = true;

  const Eigen::Index dim = y.size();
  Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim),
      k7(dim), ynew(dim), errv(dim);

  try {
    while (t < t_final) {
      bool landing = false;
      if (t + h >= t_final) {
        h = t_final - t;
        landing = true;
      }

      k1 = deriv(y);
      k2 = deriv(y + h * (a21 * k1));
      k3 = deriv(y + h * (a31 * k1 + a32 * k2));
      k4 = deriv(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      k5 = deriv(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      k6 = deriv(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      k7 = deriv(ynew);
      errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      // Weighted RMS error, component scale abs_tol + rel_tol * |y|.
      double sumsq = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double scale =
            cfg.abs_tol +
            cfg.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
        const double q = errv(i) / scale;
        sumsq += q * q;
      }
      const double err = std::sqrt(sumsq / static_cast<double>(dim));

      const double fac11 = std::pow(std::max(err, 0.0), kExpo);
      if (err <= 1.0) {
        t = landing ? t_final : t + h;
        y = ynew;
        if (post_accept) {
          post_accept(y);
        }
        ++accepted;

        const int bad_agent = singular_check ? singular_check(y) : -1;
        if (bad_agent >= 0) {
          traj.events.push_back({t, EventKind::SingularR, bad_agent});
          traj.status = RunStatus::SingularR;
          record(t, y);
          last_recorded = true;
          break;
        }

        last_recorded = (accepted % cfg.record_stride == 0) || t >= t_final;
        if (last_recorded) {
          record(t, y);
        }

        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::max(kFacGrowMax, std::min(kFacShrinkMax, fac / kSafety));
        double hnew = h / fac;
        if (prev_rejected) {
          hnew = std::min(hnew, h);
        }
        h = std::min(hnew, h_max);
        facold = std::max(err, 1e-4);
        prev_rejected = false;
      } else {
        const double hnew = h / std::min(kFacShrinkMax, fac11 / kSafety);
        prev_rejected = true;
        if (hnew < cfg.h_min) {
          traj.events.push_back({t, EventKind::StepUnderflow, -1});
          traj.status = RunStatus::StepUnderflow;
          break;
        }
        h = hnew;
      }
    }
  } catch (const SingularRError& e) {
    // Thrown while evaluating a stage: attribute the event to the last
    // accepted time (no root polishing of the event time).
    traj.events.push_back({t, EventKind::SingularR, e.agent()});
    traj.status = RunStatus::SingularR;
  }

  if (!last_recorded) {
    record(t, y);
  }
  return traj;
}

int first_singular_agent(const Eigen::VectorXd& y, int n, int d, int k) {
  const int per_agent = d * d + k * (k + 1) / 2;
  for (int a = 0; a < n; ++a) {
    const Eigen::Index base = a * per_agent + d * d;
    // Diagonal entries of R sit at the start of each triangle row:
    // row i begins at offset sum_{p<i} (k - p).
    double lo = 0.0, hi = 0.0;
    Eigen::Index off = base;
    for (int i = 0; i < k; ++i) {
      const double diag = std::abs(y(off));
      if (i == 0) {
        lo = hi = diag;
      } else {
        lo = std::min(lo, diag);
        hi = std::max(hi, diag);
      }
      off += k - i;
    }
    if (lo <= kSingularRTolRel * hi) {
      return a;
    }
  }
  return -1;
}

void reproject_swarm(Eigen::VectorXd& y, int n, int d, int k,
                     double threshold) {
  const int per_agent = d * d + k * (k + 1) / 2;
  for (int a = 0; a < n; ++a) {
    Eigen::Map<Eigen::MatrixXd> q(y.data() + a * per_agent, d, d);
    if (orth_error(q) > threshold) {
      q = project_to_so(q).m;
    }
  }
}

template <class StateT>
Trajectory<StateT> wrap_trajectory(const RawTrajectory& raw,
                                   StateT (*unflatten)(const Eigen::VectorXd&,
                                                       int, int, int),
                                   int n, int d, int k) {
  Trajectory<StateT> out;
  out.times = raw.times;
  out.events = raw.events;
  out.status = raw.status;
  out.states.reserve(raw.states.size());
  for (const Eigen::VectorXd& y : raw.states) {
    out.states.push_back(unflatten(y, n, d, k));
  }
  return out;
}

} // namespace

SwarmTrajectory integrate_closed_loop(const SwarmState& swarm0,
                                      const DirectedWeightedGraph& g,
                                      const IntegratorConfig& cfg,
                                      EvalMode mode) {
  validate(cfg);
  validate_swarm(swarm0);
  if (g.node_count() != swarm0.n) {
    throw std::invalid_argument("integrate_closed_loop: graph size mismatch");
  }
  const int n = swarm0.n, d = swarm0.d, k = swarm0.k;

  const DerivFn deriv = [&](const Eigen::VectorXd& y) {
    const SwarmState s = unflatten_swarm(y, n, d, k);
    const SwarmDerivative sd = closed_loop_derivative(s, g, mode);
    SwarmState ds;
    ds.n = n;
    ds.d = d;
    ds.k = k;
    ds.agents.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      ds.agents.push_back(AgentState{RotationMatrix{sd.dQ[static_cast<std::size_t>(i)]},
                                     UpperTriPos{sd.dR[static_cast<std::size_t>(i)]}});
    }
    return flatten(ds);
  };
  const PostAcceptFn post = [&](Eigen::VectorXd& y) {
    reproject_swarm(y, n, d, k, cfg.reproject_threshold);
  };
  const SingularCheckFn check = [&](const Eigen::VectorXd& y) {
    return first_singular_agent(y, n, d, k);
  };

  const RawTrajectory raw =
      integrate_adaptive(deriv, post, check, flatten(swarm0), cfg);
  return wrap_trajectory<SwarmState>(raw, &unflatten_swarm, n, d, k);
}

ConsensusTrajectory integrate_consensus(const ConsensusState& z0,
                                        const DirectedWeightedGraph& g,
                                        const IntegratorConfig& cfg,
                                        EvalMode mode) {
  validate(cfg);
  validate_consensus(z0);
  if (g.node_count() != z0.n) {
    throw std::invalid_argument("integrate_consensus: graph size mismatch");
  }
  const int n = z0.n, d = z0.d, k = z0.k;

  const DerivFn deriv = [&](const Eigen::VectorXd& y) {
    const ConsensusState s = unflatten_consensus(y, n, d, k);
    const std::vector<Eigen::MatrixXd> dz = consensus_derivative(s, g, mode);
    ConsensusState ds;
    ds.n = n;
    ds.d = d;
    ds.k = k;
    ds.Z = dz;
    return flatten(ds);
  };

  const RawTrajectory raw =
      integrate_adaptive(deriv, nullptr, nullptr, flatten(z0), cfg);
  return wrap_trajectory<ConsensusState>(raw, &unflatten_consensus, n, d, k);
}

EquivalenceResult equivalence_run(const ConsensusState& z0,
                                  const DirectedWeightedGraph& g,
                                  const IntegratorConfig& cfg,
                                  Rng& completion_rng, EvalMode mode) {
  validate(cfg);
  validate_consensus(z0);
  if (z0.k > z0.d - 1) {
    throw std::invalid_argument("equivalence_run: need k <= d-1");
  }
  const int n = z0.n, d = z0.d, k = z0.k;

  // Initial swarm from the factorization of each Z0 block.
  SwarmState swarm0;
  swarm0.n = n;
  swarm0.d = d;
  swarm0.k = k;
  for (int i = 0; i < n; ++i) {
    QrFactors f = map_h(z0.Z[static_cast<std::size_t>(i)]);
    RotationMatrix full = complete_to_rotation(f.q.m, completion_rng);
    swarm0.agents.push_back(AgentState{std::move(full), std::move(f.r)});
  }
  validate_swarm(swarm0);

  const int swarm_len = swarm_flat_size(n, d, k);
  const int cons_len = consensus_flat_size(n, d, k);

  const DerivFn deriv = [&](const Eigen::VectorXd& y) {
    const SwarmState s = unflatten_swarm(y.head(swarm_len), n, d, k);
    const ConsensusState c = unflatten_consensus(y.tail(cons_len), n, d, k);
    const SwarmDerivative sd = closed_loop_derivative(s, g, mode);
    const std::vector<Eigen::MatrixXd> dz = consensus_derivative(c, g, mode);
    SwarmState ds;
    ds.n = n;
    ds.d = d;
    ds.k = k;
    for (int i = 0; i < n; ++i) {
      ds.agents.push_back(AgentState{RotationMatrix{sd.dQ[static_cast<std::size_t>(i)]},
                                     UpperTriPos{sd.dR[static_cast<std::size_t>(i)]}});
    }
    ConsensusState dc;
    dc.n = n;
    dc.d = d;
    dc.k = k;
    dc.Z = dz;
    Eigen::VectorXd out(swarm_len + cons_len);
    out.head(swarm_len) = flatten(ds);
    out.tail(cons_len) = flatten(dc);
    return out;
  };
  const PostAcceptFn post = [&](Eigen::VectorXd& y) {
    Eigen::VectorXd head = y.head(swarm_len);
    reproject_swarm(head, n, d, k, cfg.reproject_threshold);
    y.head(swarm_len) = head;
  };
  const SingularCheckFn check = [&](const Eigen::VectorXd& y) {
    return first_singular_agent(y.head(swarm_len), n, d, k);
  };

  Eigen::VectorXd y0(swarm_len + cons_len);
  y0.head(swarm_len) = flatten(swarm0);
  y0.tail(cons_len) = flatten(z0);

  const RawTrajectory raw = integrate_adaptive(deriv, post, check, y0, cfg);

  EquivalenceResult result;
  result.swarm.times = raw.times;
  result.swarm.events = raw.events;
  result.swarm.status = raw.status;
  result.consensus.times = raw.times;
  result.consensus.events = raw.events;
  result.consensus.status = raw.status;
  result.deviation.reserve(raw.states.size());
  for (const Eigen::VectorXd& y : raw.states) {
    SwarmState s = unflatten_swarm(y.head(swarm_len), n, d, k);
    ConsensusState c = unflatten_consensus(y.tail(cons_len), n, d, k);
    double dev = 0.0;
    for (int i = 0; i < n; ++i) {
      const AgentState& a = s.agents[static_cast<std::size_t>(i)];
      dev = std::max(dev, (a.Q.m.leftCols(k) * a.R.m -
                           c.Z[static_cast<std::size_t>(i)])
                              .norm());
    }
    result.deviation.push_back(dev);
    result.sup_deviation = std::max(result.sup_deviation, dev);
    result.swarm.states.push_back(std::move(s));
    result.consensus.states.push_back(std::move(c));
  }
  return result;
}

} // namespace rotsync
