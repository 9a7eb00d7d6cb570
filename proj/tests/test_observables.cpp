#include <doctest.h>

#include <cmath>
#include <vector>

#include "catsim/errors.hpp"
#include "catsim/evolution.hpp"
#include "catsim/model.hpp"
#include "catsim/observables.hpp"
#include "oracles.hpp"

using namespace catsim;

namespace {

ComplexVector vec2(cplx a, cplx b) {
  ComplexVector v(2);
  v << a, b;
  return v;
}

struct Pair {
  Trajectory a, b;
};

Pair joint(const ComplexMatrix& h, const ComplexVector& a0, const ComplexVector& bf, double t_a,
           double t_b, double step, double hbar = 1.0) {
  const auto grid = uniform_grid(t_a, t_b, step);
  PropagationOptions o;
  o.hbar = hbar;
  return {sample_A(h, make_state(a0, StateLabel::A, t_a), grid, o),
          sample_B(h, make_state(bf, StateLabel::B, t_b), grid, o)};
}

ParticleModel harmonic_model(cplx mass, cplx k, int n = 64) {
  ParticleModel m;
  m.mass = {mass.real(), mass.imag()};
  m.potential = Potential::harmonic(k);
  m.grid = {n, -8.0, 8.0, Boundary::Dirichlet};
  return m;
}

}  // namespace

TEST_CASE("BA with B = A and Hermitian data is the ordinary real expectation") {
  const ComplexMatrix h = random_hermitian(4, 1), o = random_hermitian(4, 2);
  const ComplexVector v = random_state(4, 3);
  const auto grid = uniform_grid(0.0, 1.0, 0.25);
  const auto a = sample_A(h, make_state(v), grid);
  // B(t) = A(t) when B(T_B) = A(T_B) and H is Hermitian.
  const auto end = propagate_A(h, make_state(v), 1.0);
  const auto b = sample_B(h, make_state(end.amplitudes, StateLabel::B, 1.0), grid);
  const auto ba = expect_BA(o, a, b);
  const auto aa = expect_AA(o, a);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(ba.values[k].imag()) < 1e-12);
    CHECK(std::abs(ba.values[k] - aa.values[k]) < 1e-12);
  }
}

TEST_CASE("identity operator gives one for every kind") {
  const ComplexMatrix h = random_nonnormal(3, 4);
  auto s = eigendecompose(h);
  const ComplexMatrix q = construct_q(s);
  const auto p = joint(h, random_state(3, 1), random_state(3, 2), 0.0, 1.0, 0.1);
  const ComplexMatrix id = ComplexMatrix::Identity(3, 3);
  for (const auto& series : {expect_BA(id, p.a, p.b), expect_AA(id, p.a),
                             expect_QBA(id, q, p.a, p.b), expect_QAA(id, q, p.a)})
    for (const auto& v : series.values) CHECK(std::abs(v - 1.0) < 1e-13);
}

TEST_CASE("orthogonal boundary states are flagged, not dropped") {
  const ComplexMatrix h = build_two_level(1, 0, 0, 2);
  const auto p = joint(h, vec2(1, 0), vec2(0, 1), 0.0, 1.0, 0.5);
  const auto ba = expect_BA(ComplexMatrix::Identity(2, 2), p.a, p.b);
  CHECK(ba.values.size() == 3);
  CHECK(ba.any_flagged());
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(ba.flagged[k]);
    CHECK(std::isnan(ba.values[k].real()));
  }
}

TEST_CASE("two-level BA series matches the closed form") {
  // H = diag(1, 2 + i), A(0) = B(0) = (1, 1)/sqrt2 with B given at t = 0 and
  // both propagated forward.
  const ComplexMatrix h = build_two_level(1, 0, 0, cplx(2, 1));
  const ComplexVector v = vec2(1, 1) / std::sqrt(2.0);
  const auto grid = uniform_grid(0.0, 6.0, 0.5);
  const auto a = sample_A(h, make_state(v), grid);
  const auto b = sample_B(h, make_state(v, StateLabel::B, 0.0), grid);
  const auto ba = expect_BA(build_two_level(0, 0, 0, 1), a, b);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    // <B|A> is conserved, so <O>^BA = conj(B2) A2 / <B|A> with B2 A2 product
    // constant in time as well: the value stays at 1/2.
    const double t = grid[k];
    const cplx a2 = oracle::diag_evolve(v(1), cplx(2, 1), t);
    const cplx b2 = oracle::diag_evolve(v(1), cplx(2, -1), t);
    const cplx a1 = oracle::diag_evolve(v(0), 1.0, t);
    const cplx b1 = oracle::diag_evolve(v(0), 1.0, t);
    const cplx want = std::conj(b2) * a2 / (std::conj(b1) * a1 + std::conj(b2) * a2);
    CHECK(std::abs(ba.values[k] - want) < 1e-12);
  }
  // With A alone the weight of the growing state approaches 1.
  const auto aa = expect_AA(build_two_level(0, 0, 0, 1), a);
  const double t = grid.back();
  CHECK(aa.values.back().real() ==
        doctest::Approx(std::exp(2 * t) / (1 + std::exp(2 * t))).epsilon(1e-12));
}

TEST_CASE("QBA reduces to BA for Hermitian H with Q = identity") {
  const ComplexMatrix h = random_hermitian(3, 7), o = random_nonnormal(3, 8);
  const auto p = joint(h, random_state(3, 1), random_state(3, 2), 0.0, 1.0, 0.2);
  const auto ba = expect_BA(o, p.a, p.b);
  const auto qba = expect_QBA(o, ComplexMatrix::Identity(3, 3), p.a, p.b);
  for (std::size_t k = 0; k < ba.values.size(); ++k)
    CHECK(std::abs(ba.values[k] - qba.values[k]) < 1e-13);
}

TEST_CASE("identity residual input checks") {
  CHECK_THROWS_AS(identity_residual("x", {0.0, 1.0}, {1, 1}, {0, 0}, 1e-6), Error);
  try {
    identity_residual("x", {0.0, 1.0}, {1, 1}, {0, 0}, 1e-6);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::grid_too_short);
  }
  CHECK_THROWS_AS(identity_residual("x", {0.0, 1.0, 3.0}, {1, 1, 1}, {0, 0, 0}, 1e-6), Error);
  const auto r = identity_residual("x", {0.0, 0.5, 1.0, 1.5}, {0.0, 0.25, 1.0, 2.25},
                                   {0.0, 1.0, 2.0, 3.0}, 1e-12);
  CHECK(r.max_residual < 1e-14);
  CHECK(r.passed());
}

TEST_CASE("Heisenberg BA: commuting operator and convergence") {
  const ComplexMatrix h = random_nonnormal(4, 3);
  auto s = eigendecompose(h);
  // An operator commuting with H: a polynomial in H.
  const ComplexMatrix o = h * h + 2.0 * h;
  const auto p = joint(h, random_state(4, 1), random_state(4, 2), 0.0, 1.0, 0.05);
  const auto r = heisenberg_residual_BA(o, h, p.a, p.b);
  const auto ba = expect_BA(o, p.a, p.b);
  for (const auto& v : ba.values) CHECK(std::abs(v - ba.values.front()) < 1e-10 * std::abs(v));
  CHECK(r.max_residual < 1e-9);
}

TEST_CASE("Heisenberg BA converges under step halving on a non-normal two-level H") {
  const ComplexMatrix h = build_two_level(cplx(1, 0.5), cplx(0.3, 0), cplx(0.1, -0.2), cplx(-0.5, -0.3));
  const ComplexMatrix o = build_two_level(0.2, cplx(1, 1), cplx(1, -1), -0.7);
  auto run = [&](double step) {
    const auto p = joint(h, vec2(1, 0.5), vec2(0.3, 1), 0.0, 2.0, step);
    return heisenberg_residual_BA(o, h, p.a, p.b).max_residual;
  };
  const double r1 = run(0.04), r2 = run(0.02);
  CHECK(r1 / r2 >= 12.0);
  CHECK(r1 / r2 <= 20.0);
}

TEST_CASE("AA identity: Hermitian limit and identity operator") {
  const ComplexMatrix h = random_hermitian(4, 9), o = random_hermitian(4, 10);
  const auto a = sample_A(h, make_state(random_state(4, 3)), uniform_grid(0.0, 1.0, 0.01));
  const auto res = aa_identity_residual(o, h, a);
  CHECK(res.f_form_gap == 0.0);
  CHECK(res.identity.max_residual < 1e-7);

  const ComplexMatrix hn = random_nonnormal(4, 11);
  const auto an = sample_A(hn, make_state(random_state(4, 3)), uniform_grid(0.0, 1.0, 0.01));
  const auto id = aa_identity_residual(ComplexMatrix::Identity(4, 4), hn, an);
  CHECK(id.identity.max_residual < 1e-12);
}

TEST_CASE("AA identity on random non-normal H converges under step halving") {
  const ComplexMatrix h = random_nonnormal(6, 13), o = random_hermitian(6, 14);
  auto run = [&](double step) {
    const auto a = sample_A(h, make_state(random_state(6, 5)), uniform_grid(0.0, 1.0, step));
    return aa_identity_residual(o, h, a);
  };
  const auto r1 = run(0.02), r2 = run(0.01);
  CHECK(r1.identity.max_residual / r2.identity.max_residual >= 12.0);
  CHECK(r1.identity.max_residual / r2.identity.max_residual <= 20.0);
  CHECK(r1.f_form_gap < 1e-12);
}

TEST_CASE("fluctuation forms agree on random inputs") {
  for (std::uint64_t s = 1; s <= 30; ++s) {
    const int dim = 2 + static_cast<int>(s % 7);
    const ComplexMatrix o = random_hermitian(dim, s), h = random_nonnormal(dim, 100 + s);
    const auto [f1, f2] = fluctuation_forms(o, hermitian_split(h).anti_hermitian,
                                            random_state(dim, 200 + s));
    CHECK(std::abs(f1 - f2) <= 1e-12);
  }
  // Hermitian H: H_a = 0, no fluctuation.
  const auto [z1, z2] = fluctuation_forms(random_hermitian(3, 1), ComplexMatrix::Zero(3, 3),
                                          random_state(3, 2));
  CHECK(z1 == cplx(0, 0));
  CHECK(z2 == cplx(0, 0));
}

TEST_CASE("Ehrenfest BA relations on particle models") {
  SUBCASE("free particle: momentum is conserved") {
    ParticleModel m = harmonic_model(cplx(1, 0.5), 0.0, 48);
    m.potential = Potential::zero();
    const ComplexMatrix h = build_particle_hamiltonian(m);
    const auto p = joint(h, gaussian_packet(m.grid, -1, 1, 1, 1), gaussian_packet(m.grid, 1, 1, 1, 1),
                         0.0, 1.0, 0.01);
    const auto r = ehrenfest_residual_BA(m, p.a, p.b);
    CHECK(r.momentum.max_residual < 1e-9);
    CHECK(r.force_discretization_gap == 0.0);
  }
  SUBCASE("complex harmonic potential: both relations converge") {
    ParticleModel m = harmonic_model(cplx(1, 0.3), cplx(1, 0.2));
    const ComplexMatrix h = build_particle_hamiltonian(m);
    auto run = [&](double step) {
      const auto p = joint(h, gaussian_packet(m.grid, -1, 0.5, 1, 1),
                           gaussian_packet(m.grid, 0.5, 0, 1, 1), 0.0, 1.0, step);
      return ehrenfest_residual_BA(m, p.a, p.b);
    };
    const auto r1 = run(1.0 / 64), r2 = run(1.0 / 128);
    CHECK(r1.position.max_residual / r2.position.max_residual >= 12.0);
    CHECK(r1.momentum.max_residual / r2.momentum.max_residual >= 12.0);
    CHECK(r2.position.max_residual < 1e-9);
    CHECK(r2.force_discretization_gap < 0.05);
  }
}

TEST_CASE("momentum packet width guard") {
  GridSpec g{64, -8, 8, Boundary::Dirichlet};
  CHECK_NOTHROW(momentum_packet(g, 0, 0, 0.5, 1.0));
  try {
    momentum_packet(g, 0, 0, 0.1, 1.0);  // position width 5 > 16/4
    FAIL("expected PacketTooWide");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::packet_too_wide);
  }
}

TEST_CASE("momentum relation AA: real mass has no kinetic fluctuation") {
  ParticleModel m;
  m.mass = {1.0, 0.0};
  m.grid = {96, -12, 12, Boundary::Dirichlet};
  const ComplexMatrix h = build_particle_hamiltonian(m);
  const auto a = sample_A(h, make_state(momentum_packet(m.grid, -2, 1, 0.5, 1)),
                          uniform_grid(0.0, 2.0, 0.01));
  const auto rep = momentum_relation_AA(m, a);
  CHECK(rep.m_eff == 1.0);
  CHECK(rep.max_fluctuation == 0.0);
  CHECK(rep.max_effective_residual < 1e-8);
}

TEST_CASE("momentum relation AA: fluctuation shrinks with the momentum width") {
  ParticleModel m;
  m.mass = {1.0, 0.5};
  m.grid = {256, -60, 60, Boundary::Dirichlet};
  const ComplexMatrix h = build_particle_hamiltonian(m);
  std::vector<double> eff, cpx;
  for (double sigma : {0.2, 0.1, 0.05}) {
    const auto a = sample_A(h, make_state(momentum_packet(m.grid, 0, 1, sigma, 1)),
                            uniform_grid(0.0, 4.0, 0.05));
    const auto rep = momentum_relation_AA(m, a);
    CHECK(rep.m_eff == doctest::Approx(1.25));
    CHECK(rep.decomposition_residual < 1e-6);
    eff.push_back(rep.max_effective_residual);
    cpx.push_back(rep.max_complex_mass_residual);
  }
  CHECK(eff[1] < eff[0]);
  CHECK(eff[2] < eff[1]);
  CHECK(cpx[2] >= 5.0 * eff[2]);
}

TEST_CASE("correspondence on diag(i, -i)") {
  const ComplexMatrix h = build_two_level(cplx(0, 1), 0, 0, cplx(0, -1));
  const ComplexMatrix o = build_two_level(0, 1, 1, 0);
  const auto grid = uniform_grid(12.0, 17.0, 0.25);
  const auto rep = correspondence_experiment(h, ComplexMatrix::Identity(2, 2), o,
                                             vec2(0.6, cplx(0.3, 0.7)), vec2(cplx(0.2, -0.5), 0.8),
                                             0.0, 20.0, grid);
  CHECK(rep.expected_rate == doctest::Approx(2.0));
  CHECK(rep.fit.rate == doctest::Approx(2.0).epsilon(0.05));
  CHECK(rep.fit.r_squared >= 0.99);
  CHECK(rep.decay_detected);
}

TEST_CASE("correspondence: dim 1 and Hermitian H") {
  ComplexMatrix one(1, 1);
  one(0, 0) = cplx(0.3, 0.2);
  ComplexVector x(1);
  x(0) = 1.0;
  const auto rep = correspondence_experiment(one, ComplexMatrix::Identity(1, 1), one, x, x, 0.0,
                                             5.0, uniform_grid(0.0, 5.0, 0.5));
  CHECK(rep.max_delta < 1e-14);
  CHECK_FALSE(rep.decay_detected);

  const ComplexMatrix h = random_hermitian(3, 4);
  try {
    correspondence_experiment(h, ComplexMatrix::Identity(3, 3), random_hermitian(3, 5),
                              random_state(3, 1), random_state(3, 2), 0.0, 10.0,
                              uniform_grid(0.0, 10.0, 0.5));
    FAIL("expected DegenerateImaginaryParts");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_imaginary_parts);
  }
  CorrespondenceOptions opts;
  opts.allow_degenerate = true;
  const auto herm = correspondence_experiment(h, ComplexMatrix::Identity(3, 3),
                                              random_hermitian(3, 5), random_state(3, 1),
                                              random_state(3, 2), 0.0, 10.0,
                                              uniform_grid(0.0, 10.0, 0.25), opts);
  CHECK(herm.degenerate);
  CHECK_FALSE(herm.decay_detected);
}

TEST_CASE("maximization: diag(1 + i, 2)") {
  const auto r = maximize_transition(build_two_level(cplx(1, 1), 0, 0, 2), 0.0, 3.0);
  CHECK(std::abs(std::abs(r.a0(0)) - 1.0) < 1e-12);
  CHECK(std::abs(r.a0(1)) < 1e-12);
  CHECK(r.log_amplitude == doctest::Approx(3.0));
  CHECK(r.log_amplitude_measured == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_FALSE(r.degenerate);
  CHECK(r.ascent_fidelity >= 1 - 1e-6);
}

TEST_CASE("maximization: Hermitian H is flagged degenerate with unit amplitude") {
  const auto r = maximize_transition(random_hermitian(4, 2), 0.0, 2.0);
  CHECK(r.degenerate);
  CHECK(r.top_subspace.size() == 4);
  CHECK(std::abs(r.log_amplitude) < 1e-12);
  CHECK(std::abs(r.log_amplitude_measured) < 1e-10);
}

TEST_CASE("maximization: ascent agrees with the eigenbasis argmax, and Q-Hermitian BA is real") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ComplexMatrix h = random_nonnormal(5, 500 + seed);
    MaximizeOptions opts;
    opts.seed = seed;
    const auto r = maximize_transition(h, 0.0, 4.0, opts);
    CHECK(r.ascent_fidelity >= 1 - 1e-6);
    CHECK(std::abs(r.ascent_log_amplitude - r.log_amplitude) <= 1e-8 * std::max(1.0, std::abs(r.log_amplitude)));
    CHECK(std::abs(r.log_amplitude_measured - r.log_amplitude) <= 1e-8 * std::max(1.0, std::abs(r.log_amplitude)));

    const ComplexMatrix o = q_hermitian_from(r.q, random_hermitian(5, seed));
    CHECK(((r.q * o) - (o.adjoint() * r.q)).norm() < 1e-10 * (r.q * o).norm());
    const auto grid = uniform_grid(0.0, 4.0, 0.5);
    const auto a = sample_A(h, make_state(r.a0), grid);
    const auto b = sample_B_q(h, r.q, make_state(r.b_final, StateLabel::B, 4.0), grid);
    const auto qba = expect_QBA(o, r.q, a, b);
    for (const auto& v : qba.values) CHECK(std::abs(v.imag()) <= 1e-10 * std::abs(v.real()) + 1e-12);
  }
}

TEST_CASE("linear fit") {
  const auto f = fit_line({0, 1, 2, 3}, {1, -1, -3, -5});
  CHECK(f.rate == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
}
