#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "catsim/linalg.hpp"
#include "catsim/state.hpp"

namespace catsim {

struct EigenOptions {
  /// Bound on ||H v - lambda v|| / ||H|| for every eigenpair.
  double residual_tol = 1e-10;
  /// Eigenvector matrices with a larger condition number are treated as defective.
  double cond_ceiling = 1e12;
};

struct SpectralData {
  /// Sorted by descending imaginary part, then descending real part.
  ComplexVector eigenvalues;
  /// Right eigenvectors as unit-norm columns, in eigenvalue order.
  ComplexMatrix eigvecs;
  ComplexMatrix eigvecs_inverse;
  /// Filled by construct_q.
  std::optional<ComplexMatrix> q_op;
  double cond_estimate = 1.0;
  double max_residual = 0.0;
  /// True when the normal-matrix path (orthonormal eigenvectors) was taken.
  bool normal = false;

  Eigen::Index dim() const { return eigenvalues.size(); }
};

/// Eigendecomposition of a dense, possibly non-normal matrix.
///
/// Normal matrices (Hermitian ones included) go through a Hermitian solve of
/// H_h + g * (-i H_a), which yields an orthonormal basis even inside
/// degenerate eigenspaces. Everything else uses a complex Schur-based solver;
/// the result is rejected as NotDiagonalizable when cond(P) exceeds the
/// ceiling and as NoConvergence when an eigenpair misses the residual bound.
SpectralData eigendecompose(const ComplexMatrix& h, const EigenOptions& opts = {});

/// Q = (P P^dagger)^{-1}. Hermitian positive definite, and P^dagger Q P = I for
/// the column-normalized eigenvector matrix P.
ComplexMatrix q_from_eigvecs(const ComplexMatrix& p);

/// Computes Q from the eigenvectors, stores it in spectral.q_op and returns it.
const ComplexMatrix& construct_q(SpectralData& spectral);

/// Inner-product convention: plain Euclidean or weighted by a Hermitian
/// positive-definite Q.
class InnerProductTag {
 public:
  static InnerProductTag euclidean() { return InnerProductTag(nullptr); }
  /// Validates Q (square, Hermitian, positive definite).
  static InnerProductTag q_weighted(std::shared_ptr<const ComplexMatrix> q);
  static InnerProductTag q_weighted(const ComplexMatrix& q) {
    return q_weighted(std::make_shared<const ComplexMatrix>(q));
  }

  bool is_euclidean() const { return q_ == nullptr; }
  const ComplexMatrix* q() const { return q_.get(); }

 private:
  explicit InnerProductTag(std::shared_ptr<const ComplexMatrix> q) : q_(std::move(q)) {}
  std::shared_ptr<const ComplexMatrix> q_;
};

/// u^dagger v or u^dagger Q v.
cplx q_inner(const ComplexVector& u, const ComplexVector& v, const InnerProductTag& tag);
cplx q_inner(const StateVector& u, const StateVector& v, const InnerProductTag& tag);

struct HermitianSplit {
  ComplexMatrix hermitian;       // (H + H^dagger) / 2
  ComplexMatrix anti_hermitian;  // (H - H^dagger) / 2
};

HermitianSplit hermitian_split(const ComplexMatrix& h);

/// Largest off-diagonal magnitude of P^dagger Q P divided by its largest
/// diagonal magnitude.
double q_orthogonality_defect(const ComplexMatrix& p, const ComplexMatrix& q);

}  // namespace catsim
