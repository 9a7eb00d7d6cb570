#include "catsim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "catsim/errors.hpp"

namespace catsim {
namespace {

// Mixing weight for the Hermitian solve of a normal matrix; any irrational
// value works unless it makes two distinct eigenvalues collide.
constexpr double kNormalMix = 0.6180339887498949;

std::vector<Eigen::Index> spectral_order(const ComplexVector& lambda) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(lambda.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto key_less = [&](Eigen::Index a, Eigen::Index b) {
    if (lambda(a).imag() != lambda(b).imag()) return lambda(a).imag() > lambda(b).imag();
    return lambda(a).real() > lambda(b).real();
  };
  std::stable_sort(idx.begin(), idx.end(), key_less);

  // Imaginary parts equal up to rounding form one group ordered by real part.
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  const double eps = 1e-12 * scale;
  std::size_t start = 0;
  while (start < idx.size()) {
    std::size_t end = start + 1;
    while (end < idx.size() &&
           std::abs(lambda(idx[end - 1]).imag() - lambda(idx[end]).imag()) <= eps)
      ++end;
    std::stable_sort(idx.begin() + static_cast<std::ptrdiff_t>(start),
                     idx.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return lambda(a).real() > lambda(b).real();
                     });
    start = end;
  }
  return idx;
}

double max_relative_residual(const ComplexMatrix& h, const ComplexVector& lambda,
                             const ComplexMatrix& p) {
  const double scale = h.norm();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    const double r = (h * p.col(k) - lambda(k) * p.col(k)).norm();
    worst = std::max(worst, scale > 0.0 ? r / scale : r);
  }
  return worst;
}

SpectralData finish(const ComplexMatrix& h, const ComplexVector& raw_lambda,
                    const ComplexMatrix& raw_p, bool normal, const EigenOptions& opts) {
  const Eigen::Index n = raw_lambda.size();
  const auto order = spectral_order(raw_lambda);
  SpectralData out;
  out.normal = normal;
  out.eigenvalues.resize(n);
  out.eigvecs.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = raw_lambda(src);
    const double len = raw_p.col(src).norm();
    if (!(len > 0.0)) fail(Errc::not_diagonalizable, "eigendecompose: zero eigenvector");
    out.eigvecs.col(k) = raw_p.col(src) / len;
  }
  out.cond_estimate = normal ? 1.0 : condition_number(out.eigvecs);
  if (!(out.cond_estimate <= opts.cond_ceiling))
    fail(Errc::not_diagonalizable,
         "eigendecompose: eigenvector matrix condition " + std::to_string(out.cond_estimate) +
             " exceeds ceiling");
  out.max_residual = max_relative_residual(h, out.eigenvalues, out.eigvecs);
  if (!(out.max_residual <= opts.residual_tol))
    fail(Errc::no_convergence,
         "eigendecompose: eigenpair residual " + std::to_string(out.max_residual) +
             " exceeds tolerance");
  out.eigvecs_inverse = normal ? ComplexMatrix(out.eigvecs.adjoint())
                               : ComplexMatrix(out.eigvecs.partialPivLu().inverse());
  return out;
}

SpectralData general_solve(const ComplexMatrix& h, const EigenOptions& opts) {
  Eigen::ComplexEigenSolver<ComplexMatrix> ces(h, true);
  if (ces.info() != Eigen::Success)
    fail(Errc::no_convergence, "eigendecompose: Schur iteration did not converge");
  return finish(h, ces.eigenvalues(), ces.eigenvectors(), false, opts);
}

}  // namespace

SpectralData eigendecompose(const ComplexMatrix& h, const EigenOptions& opts) {
  require_square_finite(h, "eigendecompose");
  if (is_normal(h, 1e-13)) {
    const HermitianSplit parts = hermitian_split(h);
    const ComplexMatrix mixed = parts.hermitian - (kNormalMix * kI) * parts.anti_hermitian;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> sae(mixed);
    if (sae.info() == Eigen::Success) {
      const ComplexMatrix& p = sae.eigenvectors();
      ComplexVector lambda(h.rows());
      for (Eigen::Index k = 0; k < h.rows(); ++k) lambda(k) = p.col(k).dot(h * p.col(k));
      if (max_relative_residual(h, lambda, p) <= opts.residual_tol)
        return finish(h, lambda, p, true, opts);
    }
  }
  return general_solve(h, opts);
}

ComplexMatrix q_from_eigvecs(const ComplexMatrix& p) {
  require_square_finite(p, "q_from_eigvecs");
  Eigen::PartialPivLU<ComplexMatrix> lu(p);
  const ComplexMatrix p_inv = lu.inverse();
  if (!p_inv.allFinite()) fail(Errc::not_diagonalizable, "q_from_eigvecs: singular eigenvectors");
  ComplexMatrix q = p_inv.adjoint() * p_inv;
  // Exact Hermitian symmetry; the product above is Hermitian only up to rounding.
  q = (0.5 * (q + q.adjoint())).eval();
  return q;
}

const ComplexMatrix& construct_q(SpectralData& spectral) {
  if (!(spectral.cond_estimate <= 1e300) || spectral.eigvecs.size() == 0)
    fail(Errc::not_diagonalizable, "construct_q: eigenvector matrix unusable");
  if (spectral.normal) {
    spectral.q_op = ComplexMatrix::Identity(spectral.dim(), spectral.dim());
  } else {
    ComplexMatrix q = spectral.eigvecs_inverse.adjoint() * spectral.eigvecs_inverse;
    spectral.q_op = (0.5 * (q + q.adjoint())).eval();
  }
  return *spectral.q_op;
}

InnerProductTag InnerProductTag::q_weighted(std::shared_ptr<const ComplexMatrix> q) {
  if (!q) fail(Errc::invalid_argument, "q_weighted: null Q");
  require_square_finite(*q, "q_weighted");
  if (!is_hermitian(*q, 1e-12)) fail(Errc::invalid_argument, "q_weighted: Q is not Hermitian");
  Eigen::LLT<ComplexMatrix> llt(*q);
  if (llt.info() != Eigen::Success)
    fail(Errc::invalid_argument, "q_weighted: Q is not positive definite");
  return InnerProductTag(std::move(q));
}

cplx q_inner(const ComplexVector& u, const ComplexVector& v, const InnerProductTag& tag) {
  if (u.size() != v.size()) fail(Errc::dimension_mismatch, "q_inner: state dimensions differ");
  if (tag.is_euclidean()) return inner(u, v);
  if (tag.q()->rows() != u.size()) fail(Errc::dimension_mismatch, "q_inner: Q dimension differs");
  return bilinear(u, *tag.q(), v);
}

cplx q_inner(const StateVector& u, const StateVector& v, const InnerProductTag& tag) {
  return q_inner(u.amplitudes, v.amplitudes, tag) * std::exp(u.log_scale + v.log_scale);
}

HermitianSplit hermitian_split(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) fail(Errc::invalid_argument, "hermitian_split: matrix must be square");
  const ComplexMatrix ha = h.adjoint();
  return {0.5 * (h + ha), 0.5 * (h - ha)};
}

double q_orthogonality_defect(const ComplexMatrix& p, const ComplexMatrix& q) {
  const ComplexMatrix g = p.adjoint() * q * p;
  double diag = 0.0, off = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      (i == j ? diag : off) = std::max(i == j ? diag : off, std::abs(g(i, j)));
  return diag > 0.0 ? off / diag : std::numeric_limits<double>::infinity();
}

}  // namespace catsim
