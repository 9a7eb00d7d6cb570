#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "catsim/evolution.hpp"
#include "catsim/linalg.hpp"
#include "catsim/model.hpp"

namespace catsim {

enum class ExpectationKind { BA, AA, QBA, QAA };

std::string_view kind_name(ExpectationKind kind) noexcept;

struct ExpectationOptions {
  /// A sample is flagged when |<B|A>| < floor * |B| |A| (or the Q analogue).
  double denominator_floor = 1e-12;
};

/// Normalized matrix elements along a trajectory. Flagged samples hold NaN.
struct ExpectationSeries {
  std::vector<double> times;
  std::vector<cplx> values;
  std::vector<bool> flagged;
  ExpectationKind kind = ExpectationKind::BA;
  std::string operator_label;

  bool any_flagged() const;
};

/// <B(t)|O|A(t)> / <B(t)|A(t)>
ExpectationSeries expect_BA(const ComplexMatrix& o, const Trajectory& a, const Trajectory& b,
                            std::string label = "O", const ExpectationOptions& opts = {});
/// <A(t)|O|A(t)> / <A(t)|A(t)>
ExpectationSeries expect_AA(const ComplexMatrix& o, const Trajectory& a, std::string label = "O");
/// <B(t)|Q O|A(t)> / <B(t)|Q|A(t)>
ExpectationSeries expect_QBA(const ComplexMatrix& o, const ComplexMatrix& q, const Trajectory& a,
                             const Trajectory& b, std::string label = "O",
                             const ExpectationOptions& opts = {});
/// <A(t)|Q O|A(t)> / <A(t)|Q|A(t)>
ExpectationSeries expect_QAA(const ComplexMatrix& o, const ComplexMatrix& q, const Trajectory& a,
                             std::string label = "O");

/// Pointwise residual of an exact time-development identity df/dt = g.
///
/// Each interior sample compares the central difference (f[k+1] - f[k-1]) / 2h
/// with the Simpson-weighted right-hand side (g[k-1] + 4 g[k] + g[k+1]) / 6.
/// Both sides carry the same h^2 f''' / 6 term, so for an identity that holds
/// exactly the residual vanishes like h^4; a violated identity leaves a
/// step-independent remainder.
struct IdentityResidual {
  std::string identity_name;
  std::vector<double> times;
  std::vector<double> residual_magnitudes;
  double tolerance_used = 0.0;
  double max_residual = 0.0;
  /// Samples skipped because a normalized matrix element was flagged.
  std::size_t skipped = 0;

  bool passed() const { return max_residual <= tolerance_used; }
};

IdentityResidual identity_residual(std::string name, const std::vector<double>& times,
                                   const std::vector<cplx>& f, const std::vector<cplx>& g,
                                   double tolerance);

/// d<O>^BA/dt = <(i/hbar)[H, O]>^BA
IdentityResidual heisenberg_residual_BA(const ComplexMatrix& o, const ComplexMatrix& h,
                                        const Trajectory& a, const Trajectory& b, double hbar = 1.0,
                                        double tolerance = 1e-6);

/// Both orderings of the fluctuation term, evaluated in the normalized state:
/// <{O, H_a - <H_a>}> and <{O - <O>, H_a}>.
std::pair<cplx, cplx> fluctuation_forms(const ComplexMatrix& o, const ComplexMatrix& h_a,
                                        const ComplexVector& state);

struct AaIdentityResult {
  /// i hbar d<O>^AA/dt = <[O, H_h]>^AA + <F(O, H_a)>^AA
  IdentityResidual identity;
  /// Largest pointwise disagreement between the two forms of F.
  double f_form_gap = 0.0;
};

AaIdentityResult aa_identity_residual(const ComplexMatrix& o, const ComplexMatrix& h,
                                      const Trajectory& a, double hbar = 1.0,
                                      double tolerance = 1e-6);

struct EhrenfestResult {
  /// d<q>^BA/dt = <p>^BA / m
  IdentityResidual position;
  /// d<p>^BA/dt = -<V'>^BA with the lattice force operator (i/hbar)[p, V]
  IdentityResidual momentum;
  /// max_t |<(i/hbar)[p, V]>^BA - <V'(q)>^BA|: discretization gap between
  /// the lattice force and the analytic derivative.
  double force_discretization_gap = 0.0;
};

EhrenfestResult ehrenfest_residual_BA(const ParticleModel& model, const Trajectory& a,
                                      const Trajectory& b, double tolerance = 1e-6);

/// Gaussian packet specified by its momentum-space width sigma_p (position
/// width hbar / (2 sigma_p)). Throws PacketTooWide when the position width
/// exceeds a quarter of the box.
ComplexVector momentum_packet(const GridSpec& grid, double center, double momentum,
                              double sigma_p, double hbar);

struct MomentumRelationReport {
  std::vector<double> times;
  /// |d<q>^AA/dt - <p>^AA / m_eff| per interior sample.
  std::vector<double> effective_residual;
  /// |d<q>^AA/dt - <p>^AA / m| (complex m).
  std::vector<double> complex_mass_residual;
  /// |<F(q, H_a)>^AA / (i hbar)|
  std::vector<double> fluctuation;
  double max_effective_residual = 0.0;
  double max_complex_mass_residual = 0.0;
  double max_fluctuation = 0.0;
  /// max_t |d<q>/dt - <p>/m_eff - <F(q, H_a)>/(i hbar)|: the exact decomposition.
  double decomposition_residual = 0.0;
  double m_eff = 0.0;
};

MomentumRelationReport momentum_relation_AA(const ParticleModel& model, const Trajectory& a);

struct LinearFit {
  double rate = 0.0;  // negated slope
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of y = intercept - rate * x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct CorrespondenceOptions {
  double hbar = 1.0;
  /// Smallest accepted gap between the two largest imaginary parts.
  double gap_threshold = 1e-6;
  /// Run (and report) even when the gap is below threshold.
  bool allow_degenerate = false;
  /// Samples with |delta| below this are left out of the fit.
  double fit_floor = 1e-280;
  PropagationOptions propagation{};
};

struct CorrespondenceReport {
  std::vector<double> times;
  std::vector<cplx> ba;
  std::vector<cplx> q_aa;
  std::vector<double> delta;
  LinearFit fit;
  double expected_rate = 0.0;
  double imaginary_gap = 0.0;
  bool degenerate = false;
  bool decay_detected = false;
  double max_delta = 0.0;
};

/// Compares <O>^BA against <O>_Q^AA on the grid and fits log|difference|
/// against T_B - t. `a0` is given at T_A and `b_final` at T_B.
CorrespondenceReport correspondence_experiment(const ComplexMatrix& h, const ComplexMatrix& q,
                                               const ComplexMatrix& o, const ComplexVector& a0,
                                               const ComplexVector& b_final, double t_a,
                                               double t_b, const std::vector<double>& times,
                                               const CorrespondenceOptions& opts = {});

struct MaximizeOptions {
  double hbar = 1.0;
  /// Relative gap below which the top imaginary parts count as tied.
  double degeneracy_threshold = 1e-9;
  int restarts = 4;
  std::uint64_t seed = 1;
  int max_iterations = 500000;
  double ascent_tol = 1e-15;
  int jobs = 1;
  EigenOptions eigen{};
};

struct MaximizationResult {
  /// Q-normalized boundary states: a0 at T_A, b_final at T_B.
  ComplexVector a0;
  ComplexVector b_final;
  ComplexMatrix q;
  cplx eigenvalue;
  std::size_t eigen_index = 0;
  /// Indices tied for the largest imaginary part (size > 1 when degenerate).
  std::vector<std::size_t> top_subspace;
  bool degenerate = false;
  /// (Im lambda_max)(T_B - T_A) / hbar
  double log_amplitude = 0.0;
  /// log |<B(T_B)|_Q A(T_B)>| from propagating the selected pair.
  double log_amplitude_measured = 0.0;
  /// Cross-check by projected gradient ascent on the Q-unit sphere.
  ComplexVector ascent_state;
  double ascent_fidelity = 0.0;
  double ascent_log_amplitude = 0.0;
  int ascent_iterations = 0;
};

/// Boundary states maximizing |<B(t)|_Q A(t)>| over unit-Q-norm states.
MaximizationResult maximize_transition(const ComplexMatrix& h, double t_a, double t_b,
                                       const MaximizeOptions& opts = {});

/// Q-Hermitian companion of a Hermitian K: O = Q^{-1} K, so that Q O = O^dagger Q.
ComplexMatrix q_hermitian_from(const ComplexMatrix& q, const ComplexMatrix& k);

}  // namespace catsim
