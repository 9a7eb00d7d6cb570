#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "catsim/errors.hpp"
#include "catsim/pathsel.hpp"
#include "catsim/random.hpp"
#include "oracles.hpp"

using namespace catsim;

namespace {

constexpr double kPi = std::numbers::pi;

double td_oracle(double alpha, double beta, double t_b) {
  const double c = 1.0 - beta / alpha;
  const double tc = t_b / kPi * std::acos(c);
  return oracle::bisect([&](double t) { return std::sin(kPi * t / t_b) - c * kPi / t_b * t; }, tc,
                        t_b);
}

}  // namespace

TEST_CASE("closed-form actions") {
  const auto p2 = PathProfile::constant("2", -1.5, 4.0);
  CHECK(s_i_partial(p2, 2.0) == doctest::Approx(-3.0));
  CHECK(s_i_partial(p2, 0.0) == 0.0);
  const auto p1 = PathProfile::cosine_dip("1", 2.0, 3.0);
  CHECK(s_i_partial(p1, 3.0) == doctest::Approx(-6.0).epsilon(1e-14));
  CHECK(s_i_partial(p1, 0.0) == 0.0);
  CHECK_THROWS_AS(s_i_partial(p1, 3.5), Error);
  CHECK_THROWS_AS(s_i_partial(p1, -0.1), Error);
}

TEST_CASE("numeric quadrature agrees with the cosine-dip closed form") {
  for (double alpha : {0.5, 2.0, 7.0}) {
    const auto p = PathProfile::cosine_dip("1", alpha, kPi);
    for (double t : {0.1, 1.0, 2.0, kPi}) {
      const double exact = s_i_partial(p, t);
      CHECK(std::abs(s_i_numeric(p, t) - exact) <= 1e-9 * std::abs(exact));
      CHECK(std::abs(oracle::simpson([&](double s) { return p.l_i(s); }, 0.0, t) - exact) <=
            1e-9 * std::abs(exact));
    }
  }
}

TEST_CASE("tabulated profiles integrate piecewise-linear data exactly") {
  const auto p = PathProfile::tabulated("t", {0.0, 1.0, 3.0}, {0.0, 2.0, -2.0});
  CHECK(p.l_i(0.5) == 1.0);
  CHECK(p.l_i(2.0) == 0.0);
  CHECK(s_i_partial(p, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s_i_partial(p, 3.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s_i_partial(p, 2.0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(PathProfile::tabulated("bad", {0.0, 0.0}, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(PathProfile::tabulated("bad", {0.0, 1.0}, {1.0}), Error);
}

TEST_CASE("crossing time") {
  CHECK(crossing_time_tc(2, 1, 3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(crossing_time_tc(2, 1, kPi) == doctest::Approx(kPi / 3).epsilon(1e-15));
  CHECK(crossing_time_tc(1, 1e-12, 1) < 1e-5);
  const double tc = crossing_time_tc(2, 1, kPi);
  const auto p1 = PathProfile::cosine_dip("1", 2, kPi);
  CHECK(std::abs(p1.l_i(tc) - (-1.0)) < 1e-12);
  try {
    crossing_time_tc(1, 1, 1);
    FAIL("expected RegimeViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::regime_violation);
  }
  CHECK_THROWS_AS(crossing_time_tc(1, 2, 1), Error);
  CHECK_THROWS_AS(crossing_time_tc(1, 0, 1), Error);
}

TEST_CASE("balance time against the bisection oracle") {
  const double td = balance_time_td(2, 1, kPi);
  const double ref = oracle::bisect([](double x) { return std::sin(x) - x / 2; }, 1.0, 3.0);
  CHECK(std::abs(td - ref) < 1e-9);
  CHECK(std::abs(td - 1.895494267) < 1e-8);
  CHECK(balance_time_td(1, 1 - 1e-9, 2.0) > 2.0 - 1e-3);
  CHECK_THROWS_AS(balance_time_td(1, 1, 1), Error);
}

TEST_CASE("random regime samples: substitution residual and ordering") {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const double alpha = rng.uniform(0.1, 10.0);
    const double beta = alpha * rng.uniform(0.01, 0.99);
    const double t_b = rng.uniform(0.5, 20.0);
    const double tc = crossing_time_tc(alpha, beta, t_b);
    const double td = balance_time_td(alpha, beta, t_b);
    CHECK(tc < td);
    CHECK(td < t_b);
    CHECK(std::abs(std::sin(kPi * td / t_b) - (1 - beta / alpha) * kPi / t_b * td) <= 1e-10);
    CHECK(std::abs(td - td_oracle(alpha, beta, t_b)) <= 1e-9 * t_b);
  }
}

TEST_CASE("monotonic action difference around t_c") {
  const double alpha = 2, beta = 1, t_b = kPi;
  const auto p1 = PathProfile::cosine_dip("1", alpha, t_b);
  const auto p2 = PathProfile::constant("2", -beta, t_b);
  const double tc = crossing_time_tc(alpha, beta, t_b);
  double prev = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double t = tc * k / 200.0;
    const double d = s_i_partial(p1, t) - s_i_partial(p2, t);
    CHECK(d > prev);
    prev = d;
  }
  for (int k = 1; k <= 200; ++k) {
    const double t = tc + (t_b - tc) * k / 200.0;
    const double d = s_i_partial(p1, t) - s_i_partial(p2, t);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("path weights") {
  const auto zero = PathProfile::constant("0", 0.0, 1.0);
  CHECK(path_weight(zero, 0.5) == 0.0);
  const auto p2 = PathProfile::constant("2", -1.0, 5.0);
  CHECK(path_weight(p2, 2.0, 0.5) == doctest::Approx(4.0));
  CHECK(path_weight(p2, 3.0) > path_weight(p2, 2.0));
  const auto p1 = PathProfile::cosine_dip("1", 2.0, kPi);
  const auto q2 = PathProfile::constant("2", -1.0, kPi);
  CHECK(path_weight(p1, kPi) - path_weight(q2, kPi) == doctest::Approx((2.0 - 1.0) * kPi));
}

TEST_CASE("second example timeline") {
  const auto rep = preference_timeline(
      {PathProfile::cosine_dip("path 1", 2, kPi), PathProfile::constant("path 2", -1, kPi)}, kPi);
  const double td = balance_time_td(2, 1, kPi);
  REQUIRE(rep.times.size() == 2048);
  CHECK(rep.times.front() == 0.0);
  CHECK(rep.times.back() == kPi);
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    REQUIRE(rep.fni_winner[k].has_value());
    CHECK(*rep.fni_winner[k] == (rep.times[k] < td ? 1u : 0u));
  }
  REQUIRE(rep.fi_winner.has_value());
  CHECK(*rep.fi_winner == 0);
  CHECK(rep.contradiction);
  CHECK(rep.unresolved_ties.empty());
  const auto tc = rep.first_crossing(CrossingKind::LagrangianCross);
  const auto tdr = rep.first_crossing(CrossingKind::ActionBalance);
  REQUIRE(tc.has_value());
  REQUIRE(tdr.has_value());
  CHECK(std::abs(*tc - kPi / 3) < 1e-9);
  CHECK(std::abs(*tdr - td) < 1e-9);
}

TEST_CASE("first example timeline") {
  const auto rep = preference_timeline(
      {PathProfile::constant("path 1", 0, 5.0), PathProfile::constant("path 2", -1, 5.0)}, 5.0);
  for (const auto& w : rep.fni_winner) {
    REQUIRE(w.has_value());
    CHECK(*w == 1);
  }
  CHECK(*rep.fi_winner == 1);
  CHECK_FALSE(rep.contradiction);
  CHECK(rep.crossings.empty());
}

TEST_CASE("single path wins trivially; identical paths are reported as ties") {
  const auto one = preference_timeline({PathProfile::constant("only", 0.3, 1.0)}, 1.0);
  for (const auto& w : one.fni_winner) CHECK(w == std::optional<std::size_t>(0));
  CHECK(one.fi_winner == std::optional<std::size_t>(0));
  CHECK_FALSE(one.contradiction);

  const auto tie = preference_timeline(
      {PathProfile::constant("a", -1, 1.0), PathProfile::constant("b", -1, 1.0)}, 1.0);
  CHECK(tie.unresolved_ties.size() == tie.times.size());
  CHECK_FALSE(tie.fi_winner.has_value());
  CHECK_FALSE(tie.contradiction);
}

TEST_CASE("fi winner does not depend on the time grid") {
  std::vector<PathProfile> paths{PathProfile::cosine_dip("1", 3, 2.0),
                                 PathProfile::constant("2", -2, 2.0),
                                 PathProfile::tabulated("3", {0, 1, 2}, {-1, -3, 0})};
  std::optional<std::size_t> first;
  for (int n : {16, 301, 2048, 5000}) {
    TimelineOptions o;
    o.grid_points = n;
    const auto rep = preference_timeline(paths, 2.0, o);
    if (!first) first = rep.fi_winner;
    CHECK(rep.fi_winner == first);
  }
}

TEST_CASE("L_I from particle models") {
  ParticleModel m;
  m.mass = {1.0, 0.0};
  const auto zero = l_i_from_model(m, [](double t) { return t; }, [](double) { return 1.0; }, 2.0);
  CHECK(s_i_partial(zero, 2.0) == 0.0);

  m.potential = Potential::constant(0.0, 0.7);
  const auto flat = l_i_from_model(m, [](double t) { return t; }, [](double) { return 1.0; }, 2.0);
  for (double t : {0.0, 0.3, 2.0}) CHECK(flat.l_i(t) == doctest::Approx(-0.7));

  // qdot^2 = (2 alpha / m_I)(cos(pi t / T_B) - 1) + 2 V_I / m_I with V_I = c
  // chosen large enough to keep qdot^2 >= 0.
  const double alpha = 0.5, t_b = 2.0, mi = 2.0, c = 1.5;
  m.mass = {1.0, mi};
  m.potential = Potential::constant(0.0, c);
  auto qdot = [&](double t) {
    return std::sqrt(2 * alpha / mi * (std::cos(kPi * t / t_b) - 1) + 2 * c / mi);
  };
  const auto tab = l_i_from_model(m, [](double) { return 0.0; }, qdot, t_b);
  const auto dip = PathProfile::cosine_dip("dip", alpha, t_b);
  for (double t : {0.0, 0.37, 1.0, 1.9}) CHECK(std::abs(tab.l_i(t) - dip.l_i(t)) < 1e-6);
  CHECK(std::abs(s_i_partial(tab, t_b) - s_i_partial(dip, t_b)) < 1e-6);
}
