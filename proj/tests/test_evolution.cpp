#include <doctest.h>

#include <cmath>
#include <vector>

#include "catsim/errors.hpp"
#include "catsim/evolution.hpp"
#include "catsim/model.hpp"
#include "oracles.hpp"

using namespace catsim;

namespace {

ComplexMatrix diag2(cplx a, cplx b) { return build_two_level(a, 0, 0, b); }

ComplexVector vec2(cplx a, cplx b) {
  ComplexVector v(2);
  v << a, b;
  return v;
}

/// Physical amplitudes including the stored log-scale.
ComplexVector physical(const StateVector& s) { return s.amplitudes * std::exp(s.log_scale); }

PropagationOptions rk4(double step) {
  PropagationOptions o;
  o.method = Stepper::RK4;
  o.step = step;
  return o;
}

}  // namespace

TEST_CASE("zero Hamiltonian is the identity evolution") {
  const ComplexVector a = random_state(3, 5);
  const auto out = propagate_A(ComplexMatrix::Zero(3, 3), make_state(a), 4.2);
  CHECK((physical(out) - a).norm() < 1e-15);
  CHECK(out.time == 4.2);
  CHECK((physical(propagate_A(ComplexMatrix::Zero(3, 3), make_state(a), 4.2, rk4(0.1))) - a)
            .norm() < 1e-15);
}

TEST_CASE("diagonal H multiplies basis amplitudes by the scalar exponential") {
  const cplx l1(0.7, 0.3), l2(-1.1, -0.4);
  const double hbar = 0.5;
  PropagationOptions opts;
  opts.hbar = hbar;
  for (int k = 0; k < 2; ++k) {
    const ComplexVector e = k == 0 ? vec2(1, 0) : vec2(0, 1);
    const auto out = propagate_A(diag2(l1, l2), make_state(e), 1.7, opts);
    const cplx want = oracle::diag_evolve(1.0, k == 0 ? l1 : l2, 1.7, hbar);
    CHECK(std::abs(physical(out)(k) - want) < 1e-13);
    CHECK(std::abs(physical(out)(1 - k)) < 1e-15);
  }
}

TEST_CASE("norm grows with positive imaginary eigenvalue") {
  const auto out = propagate_A(diag2(cplx(0.2, 0.5), cplx(1, 0)), make_state(vec2(1, 0)), 3.0);
  CHECK(physical(out).norm() == doctest::Approx(std::exp(1.5)).epsilon(1e-13));
}

TEST_CASE("B evolves under the adjoint") {
  const ComplexMatrix h = random_hermitian(4, 3);
  const ComplexVector v = random_state(4, 9);
  const auto a = propagate_A(h, make_state(v), 1.3);
  const auto b = propagate_B(h, make_state(v, StateLabel::B), 1.3);
  CHECK((physical(a) - physical(b)).norm() < 1e-12);

  ComplexMatrix one(1, 1);
  one(0, 0) = cplx(0, 1);
  ComplexVector x(1);
  x(0) = 1.0;
  const auto a1 = propagate_A(one, make_state(x), 2.0);
  const auto b1 = propagate_B(one, make_state(x, StateLabel::B), 2.0);
  CHECK(physical(a1).norm() == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(physical(b1).norm() == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("<B(t)|A(t)> is conserved along joint evolution") {
  const ComplexMatrix h = random_nonnormal(6, 21);
  const ComplexVector a0 = random_state(6, 1), b0 = random_state(6, 2);
  const cplx c0 = b0.dot(a0);
  for (double t : {0.3, 1.0, 2.5, -1.2}) {
    const auto a = propagate_A(h, make_state(a0), t);
    const auto b = propagate_B(h, make_state(b0, StateLabel::B), t);
    const cplx c = physical(b).dot(physical(a));
    CHECK(std::abs(c - c0) <= 1e-10 * std::abs(c0));
  }
}

TEST_CASE("backward propagation of B from the final time") {
  const ComplexMatrix h = random_nonnormal(4, 5);
  const ComplexVector bf = random_state(4, 6);
  const auto back = propagate_B(h, make_state(bf, StateLabel::B, 2.0), 0.5);
  const auto fwd = propagate_B(h, back, 2.0);
  CHECK((physical(fwd) - bf).norm() < 1e-11);
  const auto back_rk = propagate_B(h, make_state(bf, StateLabel::B, 2.0), 0.5, rk4(1e-3));
  CHECK((physical(back_rk) - physical(back)).norm() < 1e-9 * physical(back).norm());
}

TEST_CASE("semigroup property of the exact propagator") {
  const ComplexMatrix h = random_nonnormal(5, 17);
  const ComplexVector a0 = random_state(5, 3);
  const auto direct = propagate_A(h, make_state(a0), 2.0);
  const auto split = propagate_A(h, propagate_A(h, make_state(a0), 0.8), 2.0);
  CHECK((physical(direct) - physical(split)).norm() <= 1e-9 * physical(direct).norm());
}

TEST_CASE("RK4 converges to the exact propagator at fourth order") {
  const ComplexMatrix h = random_nonnormal(6, 33);
  const ComplexVector a0 = random_state(6, 4);
  const auto exact = physical(propagate_A(h, make_state(a0), 2.0));
  auto err = [&](double step) {
    return (physical(propagate_A(h, make_state(a0), 2.0, rk4(step))) - exact).norm();
  };
  const double e1 = err(0.04), e2 = err(0.02);
  const double ratio = e1 / e2;
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("RK4 flags an oversized step") {
  const ComplexMatrix h = 30.0 * random_nonnormal(4, 2);
  auto opts = rk4(0.2);
  opts.local_error_tol = 1e-8;
  try {
    propagate_A(h, make_state(random_state(4, 1)), 1.0, opts);
    FAIL("expected StepTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::step_too_large);
  }
}

TEST_CASE("norm guard rescales and records the log scale") {
  ComplexMatrix h(1, 1);
  h(0, 0) = cplx(0, 400.0);
  ComplexVector x(1);
  x(0) = 1.0;
  const auto out = propagate_A(h, make_state(x), 2.0);
  CHECK(std::isfinite(out.amplitudes(0).real()));
  CHECK(out.log_scale + std::log(std::abs(out.amplitudes(0))) == doctest::Approx(800.0));
}

TEST_CASE("sampled trajectories share the requested grid") {
  const ComplexMatrix h = random_nonnormal(3, 8);
  const auto grid = uniform_grid(0.0, 1.0, 0.1);
  REQUIRE(grid.size() == 11);
  CHECK(grid.back() == 1.0);
  const auto ta = sample_A(h, make_state(random_state(3, 1)), grid);
  const auto tb = sample_B(h, make_state(random_state(3, 2), StateLabel::B, 1.0), grid);
  CHECK(ta.times() == grid);
  CHECK(tb.times() == grid);
  const auto tr = sample_A(h, make_state(random_state(3, 1)), grid, rk4(1e-3));
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK((physical(tr.samples[k]) - physical(ta.samples[k])).norm() < 1e-9);
}

TEST_CASE("Q-adjoint generator keeps the Q pairing constant") {
  const ComplexMatrix h = random_nonnormal(4, 12);
  auto s = eigendecompose(h);
  const ComplexMatrix q = construct_q(s);
  const ComplexMatrix g = q_adjoint_generator(h, q);
  const ComplexVector a0 = random_state(4, 1), b0 = random_state(4, 2);
  const cplx c0 = b0.dot(q * a0);
  const auto a = propagate_A(h, make_state(a0), 1.5);
  const auto b = propagate_A(g, make_state(b0), 1.5);
  CHECK(std::abs(physical(b).dot(q * physical(a)) - c0) < 1e-10 * std::abs(c0));
}

TEST_CASE("normalized flow reduces to unitary evolution for Hermitian H") {
  const ComplexMatrix h = random_hermitian(4, 6);
  const ComplexVector a0 = random_state(4, 7);
  const auto traj = propagate_A_normalized(h, make_state(a0, StateLabel::ANormalized), 1.0, 1e-3);
  const auto exact = propagate_A(h, make_state(a0), 1.0);
  CHECK(fidelity(traj.samples.back().amplitudes, physical(exact)) >= 1 - 1e-12);
}

TEST_CASE("normalized flow keeps unit norm and tracks the exact normalized state") {
  const ComplexMatrix h = random_nonnormal(5, 41);
  const ComplexVector a0 = random_state(5, 8);
  const auto traj = propagate_A_normalized(h, make_state(a0, StateLabel::ANormalized), 10.0, 1e-3);
  double drift = 0;
  for (const auto& s : traj.samples) drift = std::max(drift, std::abs(s.amplitudes.norm() - 1.0));
  CHECK(drift <= 1e-6);
  const auto exact = propagate_A(h, make_state(a0), 10.0);
  CHECK(fidelity(traj.samples.back().amplitudes, physical(exact)) >= 1 - 1e-8);
  for (const auto& s : traj.samples) CHECK(s.label == StateLabel::ANormalized);
}

TEST_CASE("normalized flow on diag(i, -i) converges to the growing eigenstate") {
  const ComplexVector a0 = vec2(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  const auto traj = propagate_A_normalized(diag2(cplx(0, 1), cplx(0, -1)),
                                           make_state(a0, StateLabel::ANormalized), 20.0, 2e-3);
  const ComplexVector last = traj.samples.back().amplitudes;
  CHECK(fidelity(last, vec2(1, 0)) >= 1 - 1e-6);
  // Closed form: |c1|^2 = 1 / (1 + e^{-4t}).
  for (std::size_t k = 0; k < traj.samples.size(); k += 997) {
    const double t = traj.samples[k].time;
    CHECK(std::norm(traj.samples[k].amplitudes(0)) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-4.0 * t))).epsilon(1e-9));
  }
  // Phase convention: largest amplitude is real and positive.
  CHECK(last(0).real() > 0.0);
  CHECK(std::abs(last(0).imag()) < 1e-15);
}

TEST_CASE("normalized flow requires a unit-norm start") {
  CHECK_THROWS_AS(propagate_A_normalized(diag2(1, 2), make_state(vec2(2, 0)), 1.0, 0.01), Error);
}
