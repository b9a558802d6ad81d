#include <doctest.h>

#include <cmath>
#include <random>

#include "weaklab/common/errors.hpp"
#include "weaklab/qgrid/operator.hpp"
#include "weaklab/qgrid/polar.hpp"
#include "weaklab/qgrid/propagator.hpp"

using namespace weaklab;
using namespace weaklab::qgrid;

namespace {

CVec random_state(const Grid1D& g, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  CVec v(g.n());
  for (auto& a : v) a = {n(eng), n(eng)};
  return v;
}

double density_width(const WaveFunction& w) {
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t j = 0; j < w.grid.n(); ++j) {
    const double r = std::norm(w.psi[j]), x = w.grid.x(j);
    m0 += r;
    m1 += r * x;
    m2 += r * x * x;
  }
  m1 /= m0;
  return std::sqrt(m2 / m0 - m1 * m1);
}

double max_diff(const CVec& a, const CVec& b) {
  double m = 0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 8), ConfigError);
  CHECK_THROWS_AS(Grid1D(1.0, 0.0, 64), ConfigError);
  Grid1D g(-4.0, 4.0, 64);
  CHECK(g.dx() == doctest::Approx(0.125));
  CHECK(g.wavenumbers()[32] == doctest::Approx(-kPi / g.dx()));
}

TEST_CASE("free Hamiltonian has a zero mode") {
  Grid1D g(-10, 10, 256);
  Physics phys;
  const auto h = build_hamiltonian(g, PotentialModel::free_space(), 0.0, phys);
  const auto sp = h.decompose(4);
  CHECK(std::abs(sp.eigenvalues()[0]) < 1e-10);
}

TEST_CASE("harmonic spectrum against k + 1/2") {
  Grid1D g(-10, 10, 256);
  Physics phys;
  const auto h = build_hamiltonian(g, PotentialModel::harmonic(1.0), 0.0, phys);
  const auto sp = h.decompose(6);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(sp.eigenvalues()[k] - (k + 0.5)) < 1e-4);

  SUBCASE("eigenvectors are orthonormal") {
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b) {
        const cplx o = inner(g, sp.eigenvector(a), sp.eigenvector(b));
        CHECK(std::abs(o - (a == b ? 1.0 : 0.0)) < 1e-8);
      }
  }
  SUBCASE("expectation on an eigenstate") {
    WaveFunction w(g, sp.eigenvector(3));
    CHECK(std::abs(expectation(h, w) - sp.eigenvalues()[3]) < 1e-10);
  }
}

TEST_CASE("barrier far from the packet leaves <H> at the free value") {
  Grid1D g(-40, 40, 1024);
  Physics phys;
  const auto psi = gaussian_packet(g, -15.0, 1.0, 1.5);
  const double e_free = expectation(build_hamiltonian(g, PotentialModel::free_space(), 0, phys), psi);
  const double e_bar = expectation(build_hamiltonian(g, PotentialModel::barrier(3.0, 10.0, 11.0), 0, phys), psi);
  CHECK(std::abs(e_free - e_bar) < 1e-8);
}

TEST_CASE("barrier narrower than four points is rejected") {
  Grid1D g(-10, 10, 64);
  CHECK_THROWS_AS(build_hamiltonian(g, PotentialModel::barrier(1.0, 0.0, 0.5), 0, Physics{}), ConfigError);
}

TEST_CASE("Hermiticity and spectral consistency on random vectors") {
  Grid1D g(-8, 8, 128);
  for (auto scheme : {KineticScheme::spectral, KineticScheme::stencil}) {
    Physics phys;
    phys.kinetic = scheme;
    const CVec a = random_state(g, 1), b = random_state(g, 2);
    std::vector<SpectralOperator> ops = {
        SpectralOperator::position(g), SpectralOperator::momentum(g, phys),
        build_hamiltonian(g, PotentialModel::harmonic(0.7, 0.3), 0, phys), SpectralOperator::window(g, -1.3, 2.2)};
    for (const auto& op : ops) {
      CAPTURE(op.label());
      const cplx lhs = inner(g, a, op.apply(b));
      const cplx rhs = std::conj(inner(g, b, op.apply(a)));
      CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(lhs)));
      const auto sp = op.decompose();
      const CVec direct = op.apply(a), expanded = sp.apply(a);
      double scale = 0;
      for (const auto& v : direct) scale = std::max(scale, std::abs(v));
      CHECK(max_diff(direct, expanded) < 1e-8 * scale);
    }
  }
}

TEST_CASE("window projector integrates the piecewise-linear density") {
  Grid1D g(-5, 5, 100);
  const auto w = window_weights(g, -0.37, 1.21);
  // f(x) = 1 + x is linear, so its hat interpolant is exact.
  double s = 0;
  for (std::size_t j = 0; j < g.n(); ++j) s += w[j] * (1.0 + g.x(j)) * g.dx();
  const double exact = (1.21 + 0.5 * 1.21 * 1.21) - (-0.37 + 0.5 * 0.37 * 0.37);
  CHECK(s == doctest::Approx(exact).epsilon(1e-12));
  const auto whole = window_weights(g, g.x_min(), g.x_max());
  for (double v : whole) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("free Gaussian spreading matches the analytic width") {
  Grid1D g(-30, 30, 512);
  Physics phys;
  const double s0 = 1.0, t = 2.0;
  Propagator prop(g, phys, PotentialModel::free_space(), {0.01, Method::split_operator, 1});
  const auto out = prop.propagate(gaussian_packet(g, 0.0, s0, 0.0), t);
  const double expect = s0 * std::sqrt(1.0 + std::pow(phys.hbar * t / (2 * phys.mass * s0 * s0), 2));
  CHECK(std::abs(density_width(out) - expect) < 1e-4);
  CHECK(out.time == doctest::Approx(t));
}

TEST_CASE("zero duration is the identity") {
  Grid1D g(-10, 10, 64);
  const auto psi = gaussian_packet(g, 1.0, 1.0, 0.5);
  Propagator prop(g, Physics{}, PotentialModel::harmonic(1.0), {0.01, Method::crank_nicolson, 1});
  CHECK(max_diff(prop.propagate(psi, 0.0).psi, psi.psi) == 0.0);
}

TEST_CASE("per-step norm drift stays below 1e-10") {
  Grid1D g(-10, 10, 128);
  const auto psi = gaussian_packet(g, 1.0, 1.0, 0.5);
  for (auto m : {Method::split_operator, Method::crank_nicolson}) {
    Propagator prop(g, Physics{}, PotentialModel::harmonic(1.0), {0.01, m, 1});
    auto w = psi;
    for (int s = 0; s < 50; ++s) {
      const double before = w.norm2();
      w = prop.propagate(w, 0.01);
      CHECK(std::abs(w.norm2() - before) < 1e-10);
    }
  }
}

TEST_CASE("Crank-Nicolson time reversal") {
  Grid1D g(-12, 12, 256);
  for (auto scheme : {KineticScheme::spectral, KineticScheme::stencil}) {
    Physics phys;
    phys.kinetic = scheme;
    const auto pot = PotentialModel::barrier(1.0, 0.5, 1.5).with_drive({0.3, 1.0, 0.0});
    Propagator prop(g, phys, pot, {0.005, Method::crank_nicolson, 1});
    const auto psi = gaussian_packet(g, -3.0, 1.0, 1.2);
    const auto fwd = prop.propagate(psi, 1.5);
    const auto back = prop.propagate(fwd, -1.5);
    CHECK(max_diff(back.psi, psi.psi) < 1e-8);
    CHECK(back.time == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("eigenstate density is stationary and energy is conserved") {
  Grid1D g(-10, 10, 256);
  Physics phys;
  const auto pot = PotentialModel::harmonic(1.0);
  const auto h = build_hamiltonian(g, pot, 0, phys);
  const auto sp = h.decompose(3);
  Propagator prop(g, phys, pot, {0.01, Method::crank_nicolson, 1});
  WaveFunction e2(g, sp.eigenvector(2));
  const auto out = prop.propagate(e2, 1.0);
  double m = 0;
  for (std::size_t j = 0; j < g.n(); ++j) m = std::max(m, std::abs(std::norm(out.psi[j]) - std::norm(e2.psi[j])));
  CHECK(m < 1e-8);

  const auto packet = gaussian_packet(g, 1.5, 0.8, 0.4);
  const double e0 = expectation(h, packet);
  CHECK(std::abs(expectation(h, prop.propagate(packet, 2.0)) - e0) < 1e-8);
}

TEST_CASE("unstable step size is reported with its dt") {
  Grid1D g(-10, 10, 128);
  Propagator prop(g, Physics{}, PotentialModel::harmonic(1.0), {0.5, Method::crank_nicolson, 1});
  try {
    prop.propagate(gaussian_packet(g, 0, 1, 0), 1.0);
    FAIL("expected StepSizeError");
  } catch (const StepSizeError& e) {
    CHECK(e.dt() == doctest::Approx(0.5));
  }
}

TEST_CASE("evolution frames and striding") {
  Grid1D g(-10, 10, 64);
  Propagator prop(g, Physics{}, PotentialModel::free_space(), {0.01, Method::split_operator, 5});
  const auto evo = prop.evolve(gaussian_packet(g, 0, 1, 0), 1.0);
  CHECK(evo.size() == 21);
  CHECK(evo.dt_out() == doctest::Approx(0.05));
  CHECK(evo.index_of(0.5) == 10);
  CHECK_THROWS(evo.index_of(0.51));
  const auto half = evo.strided(2);
  CHECK(half.size() == 11);
  CHECK(half.steps_per_frame == 10);
}

TEST_CASE("polar decomposition") {
  Grid1D g(-8, 8, 128);
  SUBCASE("plane wave") {
    const auto pw = plane_wave(g, 3);
    const double k = 2 * kPi * 3 / g.length();
    const auto p = polar_decompose(pw, 1.0);
    const double r0 = 1.0 / std::sqrt(g.length());
    for (std::size_t j = 0; j < g.n(); ++j) {
      CHECK(p.modulus[j] == doctest::Approx(r0));
      CHECK(p.phase[j] - p.phase[0] == doctest::Approx(k * (g.x(j) - g.x(0))).epsilon(1e-10));
    }
  }
  SUBCASE("real Gaussian has zero phase") {
    const auto p = polar_decompose(gaussian_packet(g, 0, 1, 0), 1.0);
    for (std::size_t j = 0; j < g.n(); ++j)
      if (!p.node[j]) CHECK(std::abs(p.phase[j]) < 1e-14);
  }
  SUBCASE("two Gaussians with a node") {
    auto w = sample_function(g, [](double x) {
      return cplx(std::exp(-(x - 2) * (x - 2)) - std::exp(-(x + 2) * (x + 2)), 0.0);
    });
    w.psi[64] = 0.0;  // x = 0 exactly
    const double hbar = 0.7;
    const auto p = polar_decompose(w, hbar);
    CHECK(p.node[64] == 1);
    for (std::size_t j = 0; j < g.n(); ++j) {
      if (p.node[j]) continue;
      const cplx rec = p.modulus[j] * std::exp(cplx(0, p.phase[j] / hbar));
      CHECK(std::abs(rec - w.psi[j]) < 1e-10);
    }
  }
}

TEST_CASE("expectation values against analytic oracles") {
  Grid1D g(-20, 20, 512);
  Physics phys{1.0, 2.0, 1.0};
  SUBCASE("momentum on a plane wave") {
    const auto pw = plane_wave(g, 5);
    CHECK(expectation(SpectralOperator::momentum(g, phys), pw) ==
          doctest::Approx(phys.hbar * 2 * kPi * 5 / g.length()));
  }
  SUBCASE("free Gaussian kinetic energy") {
    const double s0 = 1.3;
    const auto psi = gaussian_packet(g, 0.0, s0, 0.0);
    const double oracle = phys.hbar * phys.hbar / (8.0 * phys.mass * s0 * s0);
    CHECK(std::abs(expectation(build_hamiltonian(g, PotentialModel::free_space(), 0, phys), psi) - oracle) < 1e-10);
  }
  SUBCASE("grid mismatch") {
    Grid1D other(-20, 20, 256);
    CHECK_THROWS_AS(expectation(SpectralOperator::position(other), gaussian_packet(g, 0, 1, 0)), DimensionError);
  }
}
