#include "rotsync/matops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "rotsync/errors.hpp"

namespace rotsync {

namespace {

void require_tall(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() < m.cols()) {
    throw std::invalid_argument(std::string(who) + ": need rows >= cols, got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
}

} // namespace

double orth_error(const Eigen::MatrixXd& q) {
  const Eigen::Index k = q.cols();
  return (q.transpose() * q - Eigen::MatrixXd::Identity(k, k)).norm();
}

bool is_upper_tri_pos(const Eigen::MatrixXd& r) {
  if (r.rows() != r.cols()) {
    return false;
  }
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < r.rows(); ++i) {
      if (r(i, j) != 0.0) {
        return false;
      }
    }
    if (!(r(j, j) > 0.0)) {
      return false;
    }
  }
  return true;
}

TallQ make_tall_q(Eigen::MatrixXd m, double tol) {
  require_tall(m, "make_tall_q");
  const double err = orth_error(m);
  if (err > tol) {
    throw std::invalid_argument("make_tall_q: columns not orthonormal, error " +
                                std::to_string(err));
  }
  return TallQ{std::move(m)};
}

UpperTriPos make_upper_tri_pos(Eigen::MatrixXd m) {
  if (!is_upper_tri_pos(m)) {
    throw std::invalid_argument(
        "make_upper_tri_pos: not upper triangular with positive diagonal");
  }
  return UpperTriPos{std::move(m)};
}

RotationMatrix make_rotation(Eigen::MatrixXd m, double tol) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("make_rotation: matrix must be square");
  }
  const double err = orth_error(m);
  if (err > tol) {
    throw std::invalid_argument("make_rotation: not orthogonal, error " +
                                std::to_string(err));
  }
  const double det = m.determinant();
  if (std::abs(det - 1.0) > std::max(tol, 1e-9)) {
    throw std::invalid_argument("make_rotation: determinant " +
                                std::to_string(det) + ", expected +1");
  }
  return RotationMatrix{std::move(m)};
}

Eigen::MatrixXd low(const Eigen::MatrixXd& m) {
  require_tall(m, "low");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      out(i, j) = m(i, j);
    }
  }
  return out;
}

Eigen::MatrixXd up(const Eigen::MatrixXd& m) {
  require_tall(m, "up");
  const Eigen::Index k = m.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      out(i, j) = m(i, j);
    }
  }
  return out;
}

QrFactors qr_positive(const Eigen::MatrixXd& x) {
  require_tall(x, "qr_positive");
  const Eigen::Index k = x.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), k);
  Eigen::MatrixXd r =
      qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  double max_diag = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    max_diag = std::max(max_diag, std::abs(r(j, j)));
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (std::abs(r(j, j)) <= kRankTolRel * max_diag) {
      throw RankDeficientError("qr_positive: column " + std::to_string(j + 1) +
                               " numerically dependent");
    }
  }
  // Sign pass: flip Q column j and R row j wherever R_jj < 0; this picks the
  // unique factorization with positive diagonal.
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) {
      q.col(j) = -q.col(j);
      r.row(j) = -r.row(j);
    }
  }
  return QrFactors{TallQ{std::move(q)}, UpperTriPos{std::move(r)}};
}

QrFactors map_h(const Eigen::MatrixXd& x) {
  require_tall(x, "map_h");
  const Eigen::Index k = x.cols();
  const Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw RankDeficientError("map_h: X^T X not positive definite");
  }
  Eigen::MatrixXd r = llt.matrixU();
  double max_diag = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    max_diag = std::max(max_diag, r(j, j));
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) <= kRankTolRel * max_diag) {
      throw RankDeficientError("map_h: X^T X numerically singular");
    }
  }
  // Q = X R^{-1}, via a triangular solve from the right.
  Eigen::MatrixXd q =
      r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(x);
  return QrFactors{TallQ{std::move(q)}, UpperTriPos{std::move(r)}};
}

Eigen::MatrixXd map_h_inv(const TallQ& q, const UpperTriPos& r) {
  return q.m * r.m;
}

RotationMatrix complete_to_rotation(const Eigen::MatrixXd& q_tall, Rng& rng) {
  const Eigen::Index d = q_tall.rows();
  const Eigen::Index k = q_tall.cols();
  if (k > d - 1) {
    throw std::invalid_argument("complete_to_rotation: need k <= d-1");
  }
  const double err = orth_error(q_tall);
  if (err > kStateOrthTol) {
    throw std::invalid_argument(
        "complete_to_rotation: input columns not orthonormal, error " +
        std::to_string(err));
  }
  Eigen::MatrixXd full(d, d);
  full.leftCols(k) = q_tall;
  for (Eigen::Index c = k; c < d; ++c) {
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      Eigen::VectorXd v(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        v(i) = rng.normal();
      }
      // Modified Gram-Schmidt, two passes.
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index p = 0; p < c; ++p) {
          v -= full.col(p).dot(v) * full.col(p);
        }
      }
      const double norm = v.norm();
      if (norm > 1e-8) {
        full.col(c) = v / norm;
        ok = true;
      }
    }
    if (!ok) {
      throw std::runtime_error(
          "complete_to_rotation: failed to extend basis (degenerate draws)");
    }
  }
  if (full.determinant() < 0.0) {
    full.col(d - 1) = -full.col(d - 1);
  }
  return RotationMatrix{std::move(full)};
}

RotationMatrix project_to_so(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("project_to_so: matrix must be square");
  }
  if (!(m.determinant() > 0.0)) {
    throw std::domain_error("project_to_so: determinant not positive");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd rot = svd.matrixU() * svd.matrixV().transpose();
  // det(U V^T) = sign(det m) = +1 here; a negative value would mean the
  // input was outside the precondition's neighborhood.
  if (rot.determinant() < 0.0) {
    throw std::domain_error("project_to_so: polar factor left SO(d)");
  }
  return RotationMatrix{std::move(rot)};
}

} // namespace rotsync
