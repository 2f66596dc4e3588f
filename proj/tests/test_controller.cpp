#include <doctest.h>

#include "rotsync/consensus.hpp"
#include "rotsync/controller.hpp"
#include "rotsync/errors.hpp"
#include "test_support.hpp"

using namespace rotsync;

TEST_CASE("relative_rotation_cols: canned examples") {
  const Eigen::MatrixXd q = test::random_rotation(1, 3);
  // Q_ii = [I_k, 0]^T
  Eigen::MatrixXd ik = Eigen::MatrixXd::Identity(3, 3).leftCols(2);
  CHECK((relative_rotation_cols(q, q, 2) - ik).cwiseAbs().maxCoeff() <= 1e-15);
  // Qi = I returns Qj's columns.
  CHECK(relative_rotation_cols(Eigen::MatrixXd::Identity(3, 3), q, 2) ==
        q.leftCols(2));
  // Columns stay orthonormal.
  const Eigen::MatrixXd q2 = test::random_rotation(2, 3);
  CHECK(orth_error(relative_rotation_cols(q, q2, 2)) <= 1e-12);
}

TEST_CASE("relative_r: canned examples and reconstruction") {
  Rng rng(3);
  const Eigen::MatrixXd r1 = init_gaussian_qr(5, 1, 4, 3).agents[0].R.m;
  const Eigen::MatrixXd r2 = init_gaussian_qr(6, 1, 4, 3).agents[0].R.m;
  CHECK((relative_r(r1, r1) - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-12);
  CHECK((relative_r(Eigen::MatrixXd::Identity(3, 3), r2) - r2).norm() <= 1e-14);
  // (Rj Ri^{-1}) Ri = Rj
  CHECK((relative_r(r1, r2) * r1 - r2).norm() <= 1e-12 * r2.norm());

  Eigen::MatrixXd singular = Eigen::MatrixXd::Identity(3, 3);
  singular(1, 1) = 1e-14;
  CHECK_THROWS_AS(relative_r(singular, r2), SingularRError);
}

TEST_CASE("compute_V: hand-evaluated two-agent example") {
  // n=2, d=2, k=1, Q1 = I, Q2 = rotation by pi/2, R1 = R2 = [1], a_12 = 1:
  // V_1 = Q_12(:,1) - [1, 0]^T = [-1, 1]^T and agent 2 sees nothing.
  SwarmState swarm;
  swarm.n = 2;
  swarm.d = 2;
  swarm.k = 1;
  Eigen::MatrixXd q1 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd q2(2, 2);
  q2 << 0, -1, 1, 0;
  swarm.agents.push_back(
      AgentState{RotationMatrix{q1}, UpperTriPos{Eigen::MatrixXd::Ones(1, 1)}});
  swarm.agents.push_back(
      AgentState{RotationMatrix{q2}, UpperTriPos{Eigen::MatrixXd::Ones(1, 1)}});
  DirectedWeightedGraph g(2, {{0, 1, 1.0}});

  const Eigen::MatrixXd v1 = compute_V(0, swarm, g);
  CHECK(v1(0, 0) == doctest::Approx(-1.0));
  CHECK(v1(1, 0) == doctest::Approx(1.0));
  // Empty neighborhood: zero.
  CHECK(compute_V(1, swarm, g).isZero(0.0));
}

TEST_CASE("compute_V vanishes on the synchronization set") {
  const SwarmState swarm = test::synchronized_swarm(9, 4, 3, 2);
  const DirectedWeightedGraph g = make_complete_graph(4);
  for (int i = 0; i < 4; ++i) {
    CHECK(test::max_abs(compute_V(i, swarm, g)) <= 1e-14);
  }
}

TEST_CASE("compute_U_full: canned example and exact skewness") {
  Eigen::MatrixXd v(2, 1);
  v << 0.3, -0.7;
  const SkewMatrix u = compute_U_full(v);
  CHECK(u.m(0, 0) == 0.0);
  CHECK(u.m(0, 1) == 0.7);
  CHECK(u.m(1, 0) == -0.7);
  CHECK(u.m(1, 1) == 0.0);

  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform01() * 3);
    const int d = k + 1 + static_cast<int>(rng.uniform01() * 4);
    Eigen::MatrixXd m(d, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < d; ++i) {
        m(i, j) = rng.normal();
      }
    }
    const SkewMatrix u_rand = compute_U_full(m);
    // Exactly skew, bit for bit.
    CHECK(u_rand.m == Eigen::MatrixXd(-u_rand.m.transpose()));
    CHECK(compute_U_full(Eigen::MatrixXd::Zero(d, k)).m.isZero(0.0));
  }
}

TEST_CASE("compute_U_k equals the first k columns of compute_U_full exactly") {
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform01() * 3);
    const int d = k + 1 + static_cast<int>(rng.uniform01() * 4);
    Eigen::MatrixXd v(d, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < d; ++i) {
        v(i, j) = rng.normal();
      }
    }
    CHECK(compute_U_k(v) == Eigen::MatrixXd(compute_U_full(v).m.leftCols(k)));
  }
  // d=2, k=1 expansion: U_k = [0, v2]^T.
  Eigen::MatrixXd v(2, 1);
  v << 5.0, -3.25;
  const Eigen::MatrixXd uk = compute_U_k(v);
  CHECK(uk(0, 0) == 0.0);
  CHECK(uk(1, 0) == -3.25);
}

TEST_CASE("compute_R_dot: zero inputs, upper-triangular output") {
  Rng rng(47);
  CHECK(compute_R_dot(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(3, 2),
                      Eigen::MatrixXd::Identity(2, 2))
            .isZero(0.0));
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform01() * 2);
    const int d = k + 1;
    Eigen::MatrixXd v(d, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < d; ++i) {
        v(i, j) = rng.normal();
      }
    }
    const Eigen::MatrixXd r = init_gaussian_qr(trial, 1, d, k).agents[0].R.m;
    const Eigen::MatrixXd rdot = compute_R_dot(v, compute_U_k(v), r);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < i; ++j) {
        CHECK(rdot(i, j) == 0.0);
      }
    }
  }
}

TEST_CASE("equilibrium: synchronized swarm has zero derivatives") {
  const std::vector<std::pair<int, int>> dims = {{2, 1}, {3, 1}, {3, 2}, {4, 3}};
  for (auto [d, k] : dims) {
    const SwarmState swarm = test::synchronized_swarm(50 + d + k, 5, d, k);
    const DirectedWeightedGraph g = make_default_graph();
    const SwarmDerivative deriv = closed_loop_derivative(swarm, g);
    for (int i = 0; i < 5; ++i) {
      CHECK(test::max_abs(deriv.dQ[static_cast<std::size_t>(i)]) <= 1e-12);
      CHECK(test::max_abs(deriv.dR[static_cast<std::size_t>(i)]) <= 1e-12);
    }
  }
}

TEST_CASE("single agent with no neighbors sits still") {
  const SwarmState swarm = test::random_swarm(61, 1, 3, 2);
  const DirectedWeightedGraph g(1, {});
  const SwarmDerivative deriv = closed_loop_derivative(swarm, g);
  CHECK(deriv.dQ[0].isZero(0.0));
  CHECK(deriv.dR[0].isZero(0.0));
}

TEST_CASE("product rule: closed loop is the consensus flow on Q(:,1:k) R") {
  // For Z_i = Q_i(:,1:k) R_i the chain rule gives
  //   dZ_i = dQ_i(:,1:k) R_i + Q_i(:,1:k) dR_i,
  // which must equal the linear consensus derivative of the Z blocks.
  Rng rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 4);
    const int d = 2 + static_cast<int>(rng.uniform01() * 3);
    const int k = 1 + static_cast<int>(rng.uniform01() * (d - 1));
    const SwarmState swarm = test::random_swarm(1000 + trial, n, d, k);
    const DirectedWeightedGraph g = test::random_qsc_graph(n, rng);

    const SwarmDerivative deriv = closed_loop_derivative(swarm, g);

    ConsensusState z;
    z.n = n;
    z.d = d;
    z.k = k;
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
      const AgentState& a = swarm.agents[static_cast<std::size_t>(i)];
      z.Z.push_back(a.Q.m.leftCols(k) * a.R.m);
      scale = std::max(scale, z.Z.back().norm());
    }
    const std::vector<Eigen::MatrixXd> dz = consensus_derivative(z, g);

    for (int i = 0; i < n; ++i) {
      const AgentState& a = swarm.agents[static_cast<std::size_t>(i)];
      const Eigen::MatrixXd product_rule =
          deriv.dQ[static_cast<std::size_t>(i)].leftCols(k) * a.R.m +
          a.Q.m.leftCols(k) * deriv.dR[static_cast<std::size_t>(i)];
      CHECK((product_rule - dz[static_cast<std::size_t>(i)]).norm() <=
            1e-10 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("locality: non-neighbor state changes leave V_i bit-identical") {
  const int n = 5, d = 3, k = 2;
  SwarmState swarm = test::random_swarm(71, n, d, k);
  // Graph where agent 1 observes only agent 2.
  DirectedWeightedGraph g(
      n, {{0, 1, 0.8}, {1, 2, 0.5}, {2, 3, 0.4}, {3, 4, 0.9}});
  const Eigen::MatrixXd v_before = compute_V(0, swarm, g);
  // Perturb agents 3..5 (not observed by agent 1).
  for (int i = 2; i < n; ++i) {
    swarm.agents[static_cast<std::size_t>(i)] =
        test::random_swarm(200 + i, 1, d, k).agents[0];
  }
  const Eigen::MatrixXd v_after = compute_V(0, swarm, g);
  CHECK(v_before == v_after);
}

TEST_CASE("frame invariance: common left rotation leaves controllers fixed") {
  Rng rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4, d = 3, k = 2;
    const SwarmState swarm = test::random_swarm(300 + trial, n, d, k);
    const DirectedWeightedGraph g = test::random_qsc_graph(n, rng);
    const Eigen::MatrixXd common = test::random_rotation(400 + trial, d);

    SwarmState rotated = swarm;
    for (AgentState& a : rotated.agents) {
      a.Q.m = common * a.Q.m;
    }
    for (int i = 0; i < n; ++i) {
      const ControlOutput before = compute_control(i, swarm, g);
      const ControlOutput after = compute_control(i, rotated, g);
      CHECK((before.V - after.V).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((before.U_full.m - after.U_full.m).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((before.R_dot - after.R_dot).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("closed_loop_derivative reports the first singular agent") {
  SwarmState swarm = test::random_swarm(81, 3, 3, 2);
  swarm.agents[1].R.m(1, 1) = 1e-12; // collapse one diagonal entry
  const DirectedWeightedGraph g = make_complete_graph(3);
  try {
    closed_loop_derivative(swarm, g);
    FAIL("expected SingularRError");
  } catch (const SingularRError& e) {
    CHECK(e.agent() == 1);
  }
}
