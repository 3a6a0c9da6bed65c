#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "scatrel/errors.hpp"
#include "scatrel/potential.hpp"

using namespace scatrel;

namespace {

std::vector<PotentialModel> shipped_models() {
  std::vector<double> r, v;
  for (int i = 0; i <= 20; ++i) {
    const double ri = 4.0 * i / 20.0;
    r.push_back(ri);
    // smooth profile hitting zero at the last knot
    const double u = ri / 4.0;
    v.push_back(i == 20 ? 0.0 : 0.05 * std::pow(1.0 - u * u, 3));
  }
  return {
      PotentialModel::zero(2),
      PotentialModel::gaussian(0.1, 1.0, 2),
      PotentialModel::gaussian(-1.0, 1.0, 2),
      PotentialModel::compact_bump(0.2, 3.0, 2),
      PotentialModel::yukawa_smoothed(0.1, 1.0, 0.5, 2),
      PotentialModel::radial_tabulated(r, v, 2),
  };
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Central finite differences, the independent oracle for grad/hess.
Vec fd_grad(const PotentialModel& m, const Vec& x, double step) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    g[i] = (m.eval(xp) - m.eval(xm)) / (2.0 * step);
  }
  return g;
}

Mat fd_hess(const PotentialModel& m, const Vec& x, double step) {
  Mat h(x.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    h.col(i) = (fd_grad(m, xp, step) - fd_grad(m, xm, step)) / (2.0 * step);
  }
  return h;
}

} // namespace

TEST_CASE("zero potential evaluates to zero") {
  auto m = PotentialModel::zero(2);
  CHECK(m.eval(vec2(3, 4)) == 0.0);
  CHECK(m.grad(vec2(3, 4)).norm() == 0.0);
  CHECK(m.hess(vec2(3, 4)).norm() == 0.0);
}

TEST_CASE("gaussian values against high-precision evaluation") {
  auto m = PotentialModel::gaussian(0.1, 1.0, 2);
  CHECK(m.eval(vec2(0, 0)) == doctest::Approx(0.1).epsilon(1e-15));
  // 0.1 * exp(-1/2), digits from independent evaluation
  CHECK(m.eval(vec2(1, 0)) ==
        doctest::Approx(0.060653065971263342).epsilon(1e-14));
  CHECK(m.grad(vec2(0, 0)).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("non-finite input is rejected") {
  auto m = PotentialModel::gaussian(0.1, 1.0, 2);
  CHECK_THROWS_AS(m.eval(vec2(std::nan(""), 0.0)), DomainError);
}

TEST_CASE("gradient matches central differences at (1,0)") {
  auto m = PotentialModel::gaussian(0.1, 1.0, 2);
  const Vec g = m.grad(vec2(1, 0));
  const Vec gfd = fd_grad(m, vec2(1, 0), 1e-4);
  CHECK((g - gfd).norm() <= 1e-7);
}

TEST_CASE("grad/hess vs finite differences over 100 deterministic points, all kinds") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> coord(-3.5, 3.5);
  for (const auto& m : shipped_models()) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec x = vec2(coord(rng), coord(rng));
      const double scale = std::max(1e-8, m.grad(x).norm());
      const double ge = (m.grad(x) - fd_grad(m, x, 1e-4)).norm() / std::max(1e-3, scale);
      const double hs = std::max(1e-8, m.hess(x).norm());
      const double he = (m.hess(x) - fd_hess(m, x, 1e-4)).norm() / std::max(1e-3, hs);
      worst = std::max({worst, ge, he});
    }
    INFO("kind = ", to_string(m.kind()));
    // The bump's derivatives steepen sharply toward the support edge, so the
    // finite-difference oracle itself carries larger truncation error there.
    const double bound = m.kind() == PotentialKind::CompactBump ? 1e-4 : 1e-6;
    CHECK(worst <= bound);
  }
}

TEST_CASE("rotation invariance of radial kinds") {
  for (const auto& m : shipped_models()) {
    for (double a : {0.3, 1.1, 2.9, 4.4}) {
      const Mat R = rotation2(a);
      const Vec x = vec2(0.7, -1.3);
      CHECK(std::abs(m.eval(R * x) - m.eval(x)) <= 1e-12);
    }
  }
}

TEST_CASE("compact kinds vanish exactly beyond the support radius") {
  auto bump = PotentialModel::compact_bump(0.2, 3.0, 2);
  CHECK(bump.eval(vec2(3.01, 0)) == 0.0);
  CHECK(bump.grad(vec2(0, 5)).norm() == 0.0);
  REQUIRE(bump.support_radius().has_value());
  CHECK(*bump.support_radius() == 3.0);
}

TEST_CASE("verify_decay passes for every shipped model") {
  for (const auto& m : shipped_models()) {
    const auto rep = m.verify_decay(200);
    INFO("kind = ", to_string(m.kind()));
    CHECK(rep.pass);
  }
}

TEST_CASE("verify_decay flags a mis-declared constant with a witness") {
  auto m = PotentialModel::gaussian(0.1, 1.0, 2);
  m.set_decay_constant(0, 0.0);
  const auto rep = m.verify_decay(50);
  CHECK_FALSE(rep.pass);
  CHECK(rep.witness_order == 0);
  CHECK(rep.witness_radius > 0.0);
}

TEST_CASE("zero model decay report is identically zero") {
  const auto rep = PotentialModel::zero(2).verify_decay(10);
  CHECK(rep.pass);
  CHECK(rep.max_ratio[0] == 0.0);
}

TEST_CASE("tabulated model rejects a nonzero tail value") {
  std::vector<double> r{0.0, 1.0, 2.0, 3.0}, v{1.0, 0.5, 0.2, 0.1};
  CHECK_THROWS_AS(PotentialModel::radial_tabulated(r, v, 2), DomainError);
}
