#pragma once

#include <Eigen/Dense>

#include "rotsync/rng.hpp"

namespace rotsync {

/// Orthonormality tolerance for freshly constructed factors.
inline constexpr double kFactorOrthTol = 1e-12;
/// Orthonormality tolerance for integrated states (drift budget).
inline constexpr double kStateOrthTol = 1e-9;
/// Relative rank decision threshold (scaled by the largest singular value
/// or diagonal magnitude of the matrix at hand).
inline constexpr double kRankTolRel = 1e-10;

/// d x k matrix with orthonormal columns (k <= d).
struct TallQ {
  Eigen::MatrixXd m;
};

/// k x k upper triangular matrix with strictly positive diagonal. The
/// strictly lower part is exactly zero by construction.
struct UpperTriPos {
  Eigen::MatrixXd m;
};

/// Element of SO(d): orthonormal columns, determinant +1.
struct RotationMatrix {
  Eigen::MatrixXd m;
};

/// Skew-symmetric d x d matrix; skewness is exact by construction.
struct SkewMatrix {
  Eigen::MatrixXd m;
};

/// ||Q^T Q - I||_F
double orth_error(const Eigen::MatrixXd& q);

/// Strictly lower part exactly zero and diagonal > 0?
bool is_upper_tri_pos(const Eigen::MatrixXd& r);

/// Validating factories; throw std::invalid_argument on violation.
TallQ make_tall_q(Eigen::MatrixXd m, double tol = kFactorOrthTol);
UpperTriPos make_upper_tri_pos(Eigen::MatrixXd m);
RotationMatrix make_rotation(Eigen::MatrixXd m, double tol = kFactorOrthTol);

/// Strict lower triangular part, shape preserved. Requires rows >= cols.
Eigen::MatrixXd low(const Eigen::MatrixXd& m);

/// Upper triangular part (diagonal included) of the top cols x cols block.
/// Requires rows >= cols.
Eigen::MatrixXd up(const Eigen::MatrixXd& m);

struct QrFactors {
  TallQ q;
  UpperTriPos r;
};

/// The unique QR factorization of a full-column-rank d x k matrix with
/// positive diagonal in R. Householder QR plus a diagonal sign pass.
/// Throws RankDeficientError when X is numerically rank deficient.
QrFactors qr_positive(const Eigen::MatrixXd& x);

/// Same map as qr_positive computed by the Cholesky route:
/// R = upper Cholesky factor of X^T X, Q = X R^{-1}. Kept as a deliberately
/// independent implementation; the two must agree to ~1e-10 on
/// well-conditioned inputs. Throws RankDeficientError when X^T X is not
/// numerically positive definite.
QrFactors map_h(const Eigen::MatrixXd& x);

/// Inverse of the factorization map: the product Q * R.
Eigen::MatrixXd map_h_inv(const TallQ& q, const UpperTriPos& r);

/// Extends a d x k orthonormal column block (k <= d-1) to a full rotation:
/// appends d-k Gaussian columns, orthonormalizes by modified Gram-Schmidt
/// with re-orthogonalization, and flips the last column if needed so
/// det = +1. Deterministic for a given rng state.
RotationMatrix complete_to_rotation(const Eigen::MatrixXd& q_tall, Rng& rng);

/// Nearest rotation in Frobenius norm (SVD polar factor). Requires
/// det(m) > 0; throws std::domain_error otherwise. Idempotent on exact
/// rotations.
RotationMatrix project_to_so(const Eigen::MatrixXd& m);

} // namespace rotsync
