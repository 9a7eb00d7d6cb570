#include "catsim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "catsim/errors.hpp"

namespace catsim {
namespace {

const cplx kNaN{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};

bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_aligned(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) fail(Errc::dimension_mismatch, "trajectories differ in length");
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double ta = a.samples[k].time, tb = b.samples[k].time;
    if (std::abs(ta - tb) > 1e-12 * std::max(1.0, std::abs(ta)))
      fail(Errc::invalid_argument, "trajectories must share a time grid");
    if (a.samples[k].dim() != b.samples[k].dim())
      fail(Errc::dimension_mismatch, "trajectory state dimensions differ");
  }
}

void require_operator(const ComplexMatrix& o, const Trajectory& a, const char* what) {
  require_square_finite(o, what);
  if (a.size() > 0 && a.samples.front().dim() != o.rows())
    fail(Errc::dimension_mismatch, std::string(what) + ": operator dimension differs from states");
}


}  // namespace

std::string_view kind_name(ExpectationKind kind) noexcept {
  switch (kind) {
    case ExpectationKind::BA: return "BA";
    case ExpectationKind::AA: return "AA";
    case ExpectationKind::QBA: return "QBA";
    case ExpectationKind::QAA: return "QAA";
  }
  return "?";
}

bool ExpectationSeries::any_flagged() const {
  return std::any_of(flagged.begin(), flagged.end(), [](bool f) { return f; });
}

ExpectationSeries expect_BA(const ComplexMatrix& o, const Trajectory& a, const Trajectory& b,
                            std::string label, const ExpectationOptions& opts) {
  require_aligned(a, b);
  require_operator(o, a, "expect_BA");
  ExpectationSeries s{{}, {}, {}, ExpectationKind::BA, std::move(label)};
  for (std::size_t k = 0; k < a.size(); ++k) {
    const ComplexVector& av = a.samples[k].amplitudes;
    const ComplexVector& bv = b.samples[k].amplitudes;
    const cplx den = inner(bv, av);
    const bool low = !(std::abs(den) >= opts.denominator_floor * norm(av) * norm(bv)) ||
                     std::abs(den) == 0.0;
    s.times.push_back(a.samples[k].time);
    s.flagged.push_back(low);
    s.values.push_back(low ? kNaN : bilinear(bv, o, av) / den);
  }
  return s;
}

ExpectationSeries expect_AA(const ComplexMatrix& o, const Trajectory& a, std::string label) {
  require_operator(o, a, "expect_AA");
  ExpectationSeries s{{}, {}, {}, ExpectationKind::AA, std::move(label)};
  for (const auto& sample : a.samples) {
    const double den = inner(sample.amplitudes, sample.amplitudes).real();
    const bool low = !(den > 0.0);
    s.times.push_back(sample.time);
    s.flagged.push_back(low);
    s.values.push_back(low ? kNaN : bilinear(sample.amplitudes, o, sample.amplitudes) / den);
  }
  return s;
}

ExpectationSeries expect_QBA(const ComplexMatrix& o, const ComplexMatrix& q, const Trajectory& a,
                             const Trajectory& b, std::string label,
                             const ExpectationOptions& opts) {
  require_aligned(a, b);
  require_operator(o, a, "expect_QBA");
  require_operator(q, a, "expect_QBA");
  ExpectationSeries s{{}, {}, {}, ExpectationKind::QBA, std::move(label)};
  for (std::size_t k = 0; k < a.size(); ++k) {
    const ComplexVector& av = a.samples[k].amplitudes;
    const ComplexVector qb = matvec(q, b.samples[k].amplitudes);
    const cplx den = inner(qb, av);
    const double na = std::sqrt(std::abs(bilinear(av, q, av)));
    const double nb = std::sqrt(std::abs(inner(b.samples[k].amplitudes, qb)));
    const bool low = !(std::abs(den) >= opts.denominator_floor * na * nb) || std::abs(den) == 0.0;
    s.times.push_back(a.samples[k].time);
    s.flagged.push_back(low);
    s.values.push_back(low ? kNaN : inner(qb, matvec(o, av)) / den);
  }
  return s;
}

ExpectationSeries expect_QAA(const ComplexMatrix& o, const ComplexMatrix& q, const Trajectory& a,
                             std::string label) {
  require_operator(o, a, "expect_QAA");
  require_operator(q, a, "expect_QAA");
  ExpectationSeries s{{}, {}, {}, ExpectationKind::QAA, std::move(label)};
  for (const auto& sample : a.samples) {
    const ComplexVector qa = matvec(q, sample.amplitudes);
    const cplx den = inner(qa, sample.amplitudes);
    const bool low = !(std::abs(den) > 0.0);
    s.times.push_back(sample.time);
    s.flagged.push_back(low);
    s.values.push_back(low ? kNaN : inner(qa, matvec(o, sample.amplitudes)) / den);
  }
  return s;
}

IdentityResidual identity_residual(std::string name, const std::vector<double>& times,
                                   const std::vector<cplx>& f, const std::vector<cplx>& g,
                                   double tolerance) {
  if (times.size() != f.size() || times.size() != g.size())
    fail(Errc::dimension_mismatch, "identity_residual: series lengths differ");
  if (times.size() < 3)
    fail(Errc::grid_too_short, "identity_residual: at least three samples are required");
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::abs((times[k] - times[k - 1]) - h) > 1e-9 * std::abs(h))
      fail(Errc::invalid_argument, "identity_residual: time grid must be uniform");
  IdentityResidual r;
  r.identity_name = std::move(name);
  r.tolerance_used = tolerance;
  for (std::size_t k = 1; k + 1 < times.size(); ++k) {
    if (!is_finite(f[k - 1]) || !is_finite(f[k + 1]) || !is_finite(g[k - 1]) ||
        !is_finite(g[k]) || !is_finite(g[k + 1])) {
      ++r.skipped;
      continue;
    }
    const cplx lhs = (f[k + 1] - f[k - 1]) / (2.0 * h);
    const cplx rhs = (g[k - 1] + 4.0 * g[k] + g[k + 1]) / 6.0;
    const double res = std::abs(lhs - rhs);
    r.times.push_back(times[k]);
    r.residual_magnitudes.push_back(res);
    r.max_residual = std::max(r.max_residual, res);
  }
  return r;
}

IdentityResidual heisenberg_residual_BA(const ComplexMatrix& o, const ComplexMatrix& h,
                                        const Trajectory& a, const Trajectory& b, double hbar,
                                        double tolerance) {
  require_square_finite(h, "heisenberg_residual_BA");
  if (h.rows() != o.rows()) fail(Errc::dimension_mismatch, "heisenberg_residual_BA: dimensions");
  const ComplexMatrix rate = (kI / hbar) * commutator(h, o);
  const ExpectationSeries lhs = expect_BA(o, a, b);
  const ExpectationSeries rhs = expect_BA(rate, a, b);
  return identity_residual("heisenberg_BA", lhs.times, lhs.values, rhs.values, tolerance);
}

std::pair<cplx, cplx> fluctuation_forms(const ComplexMatrix& o, const ComplexMatrix& h_a,
                                        const ComplexVector& state) {
  if (o.rows() != state.size() || h_a.rows() != state.size())
    fail(Errc::dimension_mismatch, "fluctuation_forms: dimensions");
  const double n2 = inner(state, state).real();
  if (!(n2 > 0.0)) fail(Errc::invalid_argument, "fluctuation_forms: zero state");
  const ComplexVector psi = state / std::sqrt(n2);
  const ComplexVector o_psi = matvec(o, psi);
  const ComplexVector a_psi = matvec(h_a, psi);
  const cplx mean_o = inner(psi, o_psi);
  const cplx mean_a = inner(psi, a_psi);
  // {O, H_a - <H_a>} psi = O (H_a - <H_a>) psi + (H_a - <H_a>) O psi
  const ComplexVector shifted_a = a_psi - mean_a * psi;
  const ComplexVector first =
      matvec(o, shifted_a) + (matvec(h_a, o_psi) - mean_a * o_psi);
  // {O - <O>, H_a} psi = (O - <O>) H_a psi + H_a (O - <O>) psi
  const ComplexVector shifted_o = o_psi - mean_o * psi;
  const ComplexVector second =
      (matvec(o, a_psi) - mean_o * a_psi) + matvec(h_a, shifted_o);
  return {inner(psi, first), inner(psi, second)};
}

AaIdentityResult aa_identity_residual(const ComplexMatrix& o, const ComplexMatrix& h,
                                      const Trajectory& a, double hbar, double tolerance) {
  require_square_finite(h, "aa_identity_residual");
  require_operator(o, a, "aa_identity_residual");
  const HermitianSplit parts = hermitian_split(h);
  const ComplexMatrix comm = commutator(o, parts.hermitian);
  const ExpectationSeries lhs = expect_AA(o, a);
  const ExpectationSeries comm_series = expect_AA(comm, a);
  AaIdentityResult out;
  std::vector<cplx> rhs(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto [f1, f2] = fluctuation_forms(o, parts.anti_hermitian, a.samples[k].amplitudes);
    out.f_form_gap = std::max(out.f_form_gap, std::abs(f1 - f2));
    rhs[k] = (comm_series.values[k] + f1) / (kI * hbar);
  }
  out.identity = identity_residual("aa_identity", lhs.times, lhs.values, rhs, tolerance);
  return out;
}

EhrenfestResult ehrenfest_residual_BA(const ParticleModel& model, const Trajectory& a,
                                      const Trajectory& b, double tolerance) {
  validate(model);
  const ComplexMatrix q = build_position_operator(model.grid);
  const ComplexMatrix p = build_momentum_operator(model.grid, model.hbar);
  const ComplexMatrix force = build_lattice_force_gradient(model);
  const ComplexMatrix grad = build_potential_gradient(model);
  const ExpectationSeries q_ba = expect_BA(q, a, b, "q");
  const ExpectationSeries p_ba = expect_BA(p, a, b, "p");
  const ExpectationSeries f_ba = expect_BA(force, a, b, "lattice V'");
  const ExpectationSeries g_ba = expect_BA(grad, a, b, "V'");
  const cplx inv_m = 1.0 / model.mass.value();

  std::vector<cplx> velocity(p_ba.values.size()), neg_force(f_ba.values.size());
  EhrenfestResult out;
  for (std::size_t k = 0; k < velocity.size(); ++k) {
    velocity[k] = inv_m * p_ba.values[k];
    neg_force[k] = -f_ba.values[k];
    if (is_finite(f_ba.values[k]) && is_finite(g_ba.values[k]))
      out.force_discretization_gap =
          std::max(out.force_discretization_gap, std::abs(f_ba.values[k] - g_ba.values[k]));
  }
  out.position = identity_residual("ehrenfest_BA_position", q_ba.times, q_ba.values, velocity,
                                   tolerance);
  out.momentum = identity_residual("ehrenfest_BA_momentum", p_ba.times, p_ba.values, neg_force,
                                   tolerance);
  return out;
}

ComplexVector momentum_packet(const GridSpec& grid, double center, double momentum,
                              double sigma_p, double hbar) {
  if (!(sigma_p > 0.0)) fail(Errc::invalid_argument, "momentum_packet: sigma must be positive");
  const double sigma_x = hbar / (2.0 * sigma_p);
  if (sigma_x > 0.25 * (grid.x_max - grid.x_min))
    fail(Errc::packet_too_wide, "momentum_packet: position width " + std::to_string(sigma_x) +
                                    " exceeds a quarter of the box");
  return gaussian_packet(grid, center, momentum, sigma_x, hbar);
}

MomentumRelationReport momentum_relation_AA(const ParticleModel& model, const Trajectory& a) {
  validate(model);
  const ComplexMatrix q = build_position_operator(model.grid);
  const ComplexMatrix p = build_momentum_operator(model.grid, model.hbar);
  const ComplexMatrix h_a = hermitian_split(build_particle_hamiltonian(model)).anti_hermitian;
  const ExpectationSeries q_aa = expect_AA(q, a, "q");
  const ExpectationSeries p_aa = expect_AA(p, a, "p");

  MomentumRelationReport out;
  out.m_eff = effective_mass(model.mass);
  const cplx inv_m = 1.0 / model.mass.value();
  const std::size_t n = a.size();
  std::vector<cplx> g_eff(n), g_complex(n), g_full(n), fluct(n);
  for (std::size_t k = 0; k < n; ++k) {
    fluct[k] = fluctuation_forms(q, h_a, a.samples[k].amplitudes).first / (kI * model.hbar);
    g_eff[k] = p_aa.values[k] / out.m_eff;
    g_complex[k] = inv_m * p_aa.values[k];
    g_full[k] = g_eff[k] + fluct[k];
  }
  const auto eff = identity_residual("momentum_AA_m_eff", q_aa.times, q_aa.values, g_eff, 0.0);
  const auto cpx = identity_residual("momentum_AA_m", q_aa.times, q_aa.values, g_complex, 0.0);
  const auto full = identity_residual("momentum_AA_decomposition", q_aa.times, q_aa.values, g_full,
                                      0.0);
  out.times = eff.times;
  out.effective_residual = eff.residual_magnitudes;
  out.complex_mass_residual = cpx.residual_magnitudes;
  out.max_effective_residual = eff.max_residual;
  out.max_complex_mass_residual = cpx.max_residual;
  out.decomposition_residual = full.max_residual;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    out.fluctuation.push_back(std::abs(fluct[k]));
    out.max_fluctuation = std::max(out.max_fluctuation, std::abs(fluct[k]));
  }
  return out;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(Errc::dimension_mismatch, "fit_line: lengths differ");
  LinearFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return fit;
  const double slope = sxy / sxx;
  fit.rate = -slope;
  fit.intercept = my - slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

ComplexMatrix q_hermitian_from(const ComplexMatrix& q, const ComplexMatrix& k) {
  require_square_finite(q, "q_hermitian_from");
  if (k.rows() != q.rows()) fail(Errc::dimension_mismatch, "q_hermitian_from: dimensions");
  Eigen::LLT<ComplexMatrix> llt(q);
  if (llt.info() != Eigen::Success)
    fail(Errc::invalid_argument, "q_hermitian_from: Q is not positive definite");
  return llt.solve(k);
}

}  // namespace catsim
