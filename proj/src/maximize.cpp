#include <algorithm>
#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "catsim/errors.hpp"
#include "catsim/observables.hpp"
#include "catsim/parallel.hpp"
#include "catsim/random.hpp"

namespace catsim {
namespace {

struct AscentRun {
  ComplexVector x;
  double value = 0.0;
  int iterations = 0;
};

// Projected gradient ascent of |M x|^2 on the Euclidean unit sphere.
AscentRun ascend(const ComplexMatrix& m, ComplexVector x, const MaximizeOptions& opts) {
  const ComplexMatrix gram = m.adjoint() * m;
  const double scale = gram.cwiseAbs().colwise().sum().maxCoeff();  // >= sigma_max^2
  const double eta = scale > 0.0 ? 4.0 / scale : 1.0;
  x /= x.norm();
  AscentRun run;
  for (run.iterations = 0; run.iterations < opts.max_iterations; ++run.iterations) {
    ComplexVector next = x + eta * matvec(gram, x);
    next /= next.norm();
    const double change = (next - x).norm();
    x = std::move(next);
    if (change <= opts.ascent_tol) break;
  }
  run.value = matvec(m, x).norm();
  run.x = std::move(x);
  return run;
}

}  // namespace

MaximizationResult maximize_transition(const ComplexMatrix& h, double t_a, double t_b,
                                       const MaximizeOptions& opts) {
  require_square_finite(h, "maximize_transition");
  if (!(t_b > t_a)) fail(Errc::invalid_argument, "maximize_transition: requires T_B > T_A");
  if (!(opts.hbar > 0.0)) fail(Errc::invalid_argument, "maximize_transition: hbar must be positive");
  SpectralData sd = eigendecompose(h, opts.eigen);
  const ComplexMatrix q = construct_q(sd);
  const double span = t_b - t_a;
  const Eigen::Index n = sd.dim();

  MaximizationResult out;
  out.q = q;
  const double top_im = sd.eigenvalues(0).imag();
  const double tie = opts.degeneracy_threshold * std::max(1.0, sd.eigenvalues.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k)
    if (top_im - sd.eigenvalues(k).imag() <= tie) out.top_subspace.push_back(static_cast<std::size_t>(k));
  out.degenerate = out.top_subspace.size() > 1;
  out.eigen_index = 0;
  out.eigenvalue = sd.eigenvalues(0);
  out.log_amplitude = top_im * span / opts.hbar;

  const ComplexVector p = sd.eigvecs.col(0);
  const ComplexVector p_q = p / std::sqrt(bilinear(p, q, p).real());
  out.a0 = p_q;
  out.b_final = p_q;

  // Measured amplitude from the actual time development of the pair.
  PropagationOptions prop;
  prop.hbar = opts.hbar;
  prop.eigen = opts.eigen;
  const StateVector a_end = propagate_A(h, make_state(out.a0, StateLabel::A, t_a), t_b, prop);
  out.log_amplitude_measured =
      std::log(std::abs(bilinear(out.b_final, q, a_end.amplitudes))) + a_end.log_scale;

  // Independent route: with Q = L L^dagger and x = L^dagger a, the amplitude
  // <b|Q U a> becomes y^dagger M x with M = L^dagger U L^{-dagger}; U is taken
  // from a Pade matrix exponential rather than the eigenbasis.
  Eigen::LLT<ComplexMatrix> llt(q);
  if (llt.info() != Eigen::Success)
    fail(Errc::not_diagonalizable, "maximize_transition: Q is not positive definite");
  const ComplexMatrix l = llt.matrixL();
  const ComplexMatrix l_adj = l.adjoint();
  const double shift = out.log_amplitude;
  const ComplexMatrix gen =
      (-kI * span / opts.hbar) * h - cplx(shift, 0.0) * ComplexMatrix::Identity(n, n);
  const ComplexMatrix u = gen.exp();
  // M = L^dagger U L^{-dagger}: solve M L^dagger = L^dagger U for M.
  const ComplexMatrix m =
      l.triangularView<Eigen::Lower>().solve(ComplexMatrix(l_adj * u).adjoint()).adjoint();

  const int restarts = std::max(1, opts.restarts);
  std::vector<AscentRun> runs(static_cast<std::size_t>(restarts));
  parallel_for(opts.jobs, runs.size(), [&](std::size_t r) {
    Rng rng(opts.seed + r);
    ComplexVector x0(n);
    for (Eigen::Index i = 0; i < n; ++i) x0(i) = rng.disk(1.0);
    runs[r] = ascend(m, x0, opts);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].value > runs[best].value) best = r;

  // a = L^{-dagger} x is Q-normalized.
  const ComplexVector a = l_adj.triangularView<Eigen::Upper>().solve(runs[best].x);
  out.ascent_state = a;
  out.ascent_iterations = runs[best].iterations;
  out.ascent_log_amplitude = std::log(runs[best].value) + shift;
  double captured = 0.0;
  for (std::size_t k : out.top_subspace) {
    const ComplexVector pk = sd.eigvecs.col(static_cast<Eigen::Index>(k));
    captured += std::norm(bilinear(pk, q, a)) / bilinear(pk, q, pk).real();
  }
  out.ascent_fidelity = captured / bilinear(a, q, a).real();
  return out;
}

}  // namespace catsim
