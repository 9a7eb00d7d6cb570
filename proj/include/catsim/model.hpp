#pragma once

#include <cstdint>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "catsim/linalg.hpp"
#include "catsim/spectral.hpp"

namespace catsim {

struct ComplexMass {
  double re = 1.0;
  double im = 0.0;

  cplx value() const { return {re, im}; }
};

/// m_R + m_I^2 / m_R, which equals 1 / Re(1/m). Requires m_R > 0.
double effective_mass(const ComplexMass& m);

enum class Boundary { Dirichlet, Periodic };

/// Uniform 1D grid. Periodic grids place n points on [x_min, x_max) with
/// spacing (x_max - x_min) / n; Dirichlet grids place n interior points
/// strictly inside (x_min, x_max) with spacing (x_max - x_min) / (n + 1) and
/// the wave function pinned to zero at both ends.
struct GridSpec {
  int n_points = 64;
  double x_min = -8.0;
  double x_max = 8.0;
  Boundary boundary = Boundary::Dirichlet;

  double spacing() const;
  double point(int j) const;
  RealVector points() const;
};

void validate(const GridSpec& grid);

using RealFn = std::function<double(double)>;

/// V(q) = V_R(q) + i V_I(q) together with its derivative.
struct Potential {
  std::string kind = "zero";
  RealFn v_re = [](double) { return 0.0; };
  RealFn v_im = [](double) { return 0.0; };
  RealFn dv_re = [](double) { return 0.0; };
  RealFn dv_im = [](double) { return 0.0; };

  cplx value(double x) const { return {v_re(x), v_im(x)}; }
  cplx derivative(double x) const { return {dv_re(x), dv_im(x)}; }

  static Potential zero();
  static Potential constant(double v_re, double v_im);
  /// (k / 2) (x - center)^2 with complex stiffness k.
  static Potential harmonic(cplx k, double center = 0.0);
  /// a x^4 + b x^2
  static Potential quartic(cplx a, cplx b);
  /// Rows of (x, V_R, V_I) with strictly increasing x; linear interpolation,
  /// held constant outside the table.
  static Potential table(std::vector<std::array<double, 3>> rows);
};

struct ParticleModel {
  ComplexMass mass;
  Potential potential;
  GridSpec grid;
  double hbar = 1.0;
};

void validate(const ParticleModel& model);

/// Second-difference matrix (1, -2, 1) / dx^2 for the grid's boundary.
ComplexMatrix second_difference(const GridSpec& grid);
/// Central first difference (psi_{j+1} - psi_{j-1}) / (2 dx).
ComplexMatrix first_difference(const GridSpec& grid);

/// H = -(hbar^2 / 2m) D2 + diag(V_R + i V_I).
ComplexMatrix build_particle_hamiltonian(const ParticleModel& model);
ComplexMatrix build_position_operator(const GridSpec& grid);
/// -i hbar D1; Hermitian.
ComplexMatrix build_momentum_operator(const GridSpec& grid, double hbar);
/// diag(V(x_j)).
ComplexMatrix build_potential_operator(const ParticleModel& model);
/// diag(V'(x_j)) from the analytic derivative.
ComplexMatrix build_potential_gradient(const ParticleModel& model);
/// (i/hbar)[p, V]: the lattice operator that plays the role of V'(q) in the
/// exact discrete Ehrenfest relation d<p>/dt = -<(i/hbar)[p, V]>. Converges to
/// diag(V'(x)) as the spacing shrinks.
ComplexMatrix build_lattice_force_gradient(const ParticleModel& model);

ComplexMatrix build_two_level(cplx a, cplx b, cplx c, cplx d);

struct RandomMatrixOptions {
  double spread = 1.0;
  int max_redraws = 32;
  EigenOptions eigen{};
};

/// Dense matrix with entries uniform in the disk of radius `spread`,
/// reproducible from the seed. Draws that are numerically defective are
/// discarded and redrawn from the same stream.
ComplexMatrix random_nonnormal(int dim, std::uint64_t seed, const RandomMatrixOptions& opts = {});
/// Hermitian matrix with entries uniform in the unit disk (diagonal real).
ComplexMatrix random_hermitian(int dim, std::uint64_t seed);
/// Normalized vector with entries uniform in the unit disk.
ComplexVector random_state(int dim, std::uint64_t seed);

/// Normalized Gaussian packet on the grid:
/// exp(-(x - center)^2 / (4 sigma_x^2) + i p0 x / hbar).
ComplexVector gaussian_packet(const GridSpec& grid, double center, double momentum, double sigma_x,
                              double hbar);

/// 1/2 m_eff qdot^2 - V_R(q).
double effective_lagrangian(const ParticleModel& model, double q, double qdot);
/// m_eff qddot + V_R'(q): zero along solutions of the effective (real) dynamics.
double euler_lagrange_residual(const ParticleModel& model, double q, double qddot);

}  // namespace catsim
