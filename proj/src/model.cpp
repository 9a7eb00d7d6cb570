#include "catsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "catsim/errors.hpp"
#include "catsim/random.hpp"

namespace catsim {

double effective_mass(const ComplexMass& m) {
  if (!(m.re > 0.0) || !std::isfinite(m.im))
    fail(Errc::invalid_argument, "effective_mass: requires m_R > 0");
  return m.re + m.im * m.im / m.re;
}

double GridSpec::spacing() const {
  const double len = x_max - x_min;
  return boundary == Boundary::Periodic ? len / n_points : len / (n_points + 1);
}

double GridSpec::point(int j) const {
  return boundary == Boundary::Periodic ? x_min + j * spacing() : x_min + (j + 1) * spacing();
}

RealVector GridSpec::points() const {
  RealVector x(n_points);
  for (int j = 0; j < n_points; ++j) x(j) = point(j);
  return x;
}

void validate(const GridSpec& grid) {
  if (grid.n_points < 8)
    fail(Errc::grid_too_coarse, "grid: n_points must be at least 8, got " +
                                    std::to_string(grid.n_points));
  if (!(grid.x_max > grid.x_min) || !std::isfinite(grid.x_min) || !std::isfinite(grid.x_max))
    fail(Errc::invalid_argument, "grid: requires finite x_min < x_max");
}

void validate(const ParticleModel& model) {
  validate(model.grid);
  if (!(model.mass.re > 0.0) || !std::isfinite(model.mass.im))
    fail(Errc::invalid_argument, "model: mass requires m_R > 0");
  if (!(model.hbar > 0.0) || !std::isfinite(model.hbar))
    fail(Errc::invalid_argument, "model: hbar must be positive");
  for (int j = 0; j < model.grid.n_points; ++j) {
    const double x = model.grid.point(j);
    const cplx v = model.potential.value(x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      fail(Errc::invalid_argument, "model: potential is not finite on the grid");
  }
}

Potential Potential::zero() { return Potential{}; }

Potential Potential::constant(double v_re, double v_im) {
  Potential p;
  p.kind = "constant";
  p.v_re = [v_re](double) { return v_re; };
  p.v_im = [v_im](double) { return v_im; };
  return p;
}

Potential Potential::harmonic(cplx k, double center) {
  Potential p;
  p.kind = "harmonic";
  p.v_re = [k, center](double x) { return 0.5 * k.real() * (x - center) * (x - center); };
  p.v_im = [k, center](double x) { return 0.5 * k.imag() * (x - center) * (x - center); };
  p.dv_re = [k, center](double x) { return k.real() * (x - center); };
  p.dv_im = [k, center](double x) { return k.imag() * (x - center); };
  return p;
}

Potential Potential::quartic(cplx a, cplx b) {
  Potential p;
  p.kind = "quartic";
  p.v_re = [a, b](double x) { return a.real() * x * x * x * x + b.real() * x * x; };
  p.v_im = [a, b](double x) { return a.imag() * x * x * x * x + b.imag() * x * x; };
  p.dv_re = [a, b](double x) { return 4.0 * a.real() * x * x * x + 2.0 * b.real() * x; };
  p.dv_im = [a, b](double x) { return 4.0 * a.imag() * x * x * x + 2.0 * b.imag() * x; };
  return p;
}

namespace {

// Piecewise-linear interpolation of column `col`; `slope` selects the derivative.
double interpolate(const std::vector<std::array<double, 3>>& rows, double x, int col, bool slope) {
  if (x <= rows.front()[0]) return slope ? 0.0 : rows.front()[col];
  if (x >= rows.back()[0]) return slope ? 0.0 : rows.back()[col];
  const auto it = std::upper_bound(rows.begin(), rows.end(), x,
                                   [](double v, const std::array<double, 3>& r) { return v < r[0]; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double s = (hi[col] - lo[col]) / (hi[0] - lo[0]);
  return slope ? s : lo[col] + s * (x - lo[0]);
}

}  // namespace

Potential Potential::table(std::vector<std::array<double, 3>> rows) {
  if (rows.size() < 2) fail(Errc::invalid_argument, "potential table: need at least two rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (double v : rows[i])
      if (!std::isfinite(v)) fail(Errc::invalid_argument, "potential table: non-finite entry");
    if (i > 0 && !(rows[i][0] > rows[i - 1][0]))
      fail(Errc::invalid_argument, "potential table: x must be strictly increasing");
  }
  Potential p;
  p.kind = "table";
  auto shared = std::make_shared<const std::vector<std::array<double, 3>>>(std::move(rows));
  p.v_re = [shared](double x) { return interpolate(*shared, x, 1, false); };
  p.v_im = [shared](double x) { return interpolate(*shared, x, 2, false); };
  p.dv_re = [shared](double x) { return interpolate(*shared, x, 1, true); };
  p.dv_im = [shared](double x) { return interpolate(*shared, x, 2, true); };
  return p;
}

ComplexMatrix second_difference(const GridSpec& grid) {
  validate(grid);
  const int n = grid.n_points;
  const double inv = 1.0 / (grid.spacing() * grid.spacing());
  ComplexMatrix d2 = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    d2(j, j) = -2.0 * inv;
    if (j + 1 < n) d2(j, j + 1) = d2(j + 1, j) = inv;
  }
  if (grid.boundary == Boundary::Periodic) d2(0, n - 1) = d2(n - 1, 0) = inv;
  return d2;
}

ComplexMatrix first_difference(const GridSpec& grid) {
  validate(grid);
  const int n = grid.n_points;
  const double h = 0.5 / grid.spacing();
  ComplexMatrix d1 = ComplexMatrix::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) {
    d1(j, j + 1) = h;
    d1(j + 1, j) = -h;
  }
  if (grid.boundary == Boundary::Periodic) {
    d1(n - 1, 0) = h;
    d1(0, n - 1) = -h;
  }
  return d1;
}

ComplexMatrix build_potential_operator(const ParticleModel& model) {
  validate(model);
  const int n = model.grid.n_points;
  ComplexMatrix v = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) v(j, j) = model.potential.value(model.grid.point(j));
  return v;
}

ComplexMatrix build_particle_hamiltonian(const ParticleModel& model) {
  validate(model);
  const cplx kinetic = -(model.hbar * model.hbar) / (2.0 * model.mass.value());
  return kinetic * second_difference(model.grid) + build_potential_operator(model);
}

ComplexMatrix build_position_operator(const GridSpec& grid) {
  validate(grid);
  return grid.points().cast<cplx>().asDiagonal();
}

ComplexMatrix build_momentum_operator(const GridSpec& grid, double hbar) {
  return (-kI * hbar) * first_difference(grid);
}

ComplexMatrix build_potential_gradient(const ParticleModel& model) {
  validate(model);
  const int n = model.grid.n_points;
  ComplexMatrix g = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) g(j, j) = model.potential.derivative(model.grid.point(j));
  return g;
}

ComplexMatrix build_lattice_force_gradient(const ParticleModel& model) {
  const ComplexMatrix p = build_momentum_operator(model.grid, model.hbar);
  return (kI / model.hbar) * commutator(p, build_potential_operator(model));
}

ComplexMatrix build_two_level(cplx a, cplx b, cplx c, cplx d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ComplexMatrix random_nonnormal(int dim, std::uint64_t seed, const RandomMatrixOptions& opts) {
  if (dim < 2) fail(Errc::invalid_argument, "random_nonnormal: dim must be at least 2");
  if (!(opts.spread > 0.0)) fail(Errc::invalid_argument, "random_nonnormal: spread must be positive");
  Rng rng(seed);
  for (int attempt = 0; attempt <= opts.max_redraws; ++attempt) {
    ComplexMatrix m(dim, dim);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i) m(i, j) = rng.disk(opts.spread);
    try {
      (void)eigendecompose(m, opts.eigen);
      return m;
    } catch (const Error& e) {
      if (e.code() != Errc::not_diagonalizable && e.code() != Errc::no_convergence) throw;
    }
  }
  fail(Errc::not_diagonalizable, "random_nonnormal: every draw was defective");
}

ComplexMatrix random_hermitian(int dim, std::uint64_t seed) {
  if (dim < 1) fail(Errc::invalid_argument, "random_hermitian: dim must be positive");
  Rng rng(seed);
  ComplexMatrix m(dim, dim);
  for (int j = 0; j < dim; ++j) {
    m(j, j) = rng.uniform(-1.0, 1.0);
    for (int i = j + 1; i < dim; ++i) {
      m(i, j) = rng.disk(1.0);
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

ComplexVector random_state(int dim, std::uint64_t seed) {
  if (dim < 1) fail(Errc::invalid_argument, "random_state: dim must be positive");
  Rng rng(seed);
  ComplexVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.disk(1.0);
  return v / v.norm();
}

ComplexVector gaussian_packet(const GridSpec& grid, double center, double momentum, double sigma_x,
                              double hbar) {
  validate(grid);
  if (!(sigma_x > 0.0)) fail(Errc::invalid_argument, "gaussian_packet: sigma must be positive");
  ComplexVector psi(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) {
    const double x = grid.point(j);
    const double u = (x - center) / sigma_x;
    psi(j) = std::exp(cplx(-0.25 * u * u, momentum * x / hbar));
  }
  return psi / psi.norm();
}

double effective_lagrangian(const ParticleModel& model, double q, double qdot) {
  return 0.5 * effective_mass(model.mass) * qdot * qdot - model.potential.v_re(q);
}

double euler_lagrange_residual(const ParticleModel& model, double q, double qddot) {
  return effective_mass(model.mass) * qddot + model.potential.dv_re(q);
}

}  // namespace catsim
