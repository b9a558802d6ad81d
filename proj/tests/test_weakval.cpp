#include <doctest.h>

#include <cmath>

#include "weaklab/bohm/fields.hpp"
#include "weaklab/bohm/trajectories.hpp"
#include "weaklab/common/errors.hpp"
#include "weaklab/weakval/weakval.hpp"

using namespace weaklab;
using namespace weaklab::qgrid;
using namespace weaklab::weakval;

TEST_CASE("eigenstates are fixed points of the energy weak value") {
  Grid1D g(-10, 10, 256);
  Physics phys;
  const auto pot = PotentialModel::harmonic(1.0);
  const auto H = build_hamiltonian(g, pot, 0, phys);
  const auto sp = H.decompose(3);
  for (std::size_t k = 0; k < 3; ++k) {
    WaveFunction e(g, sp.eigenvector(k));
    const auto f = weak_value_field(H, e);
    const auto rho = e.density();
    const double top = *std::max_element(rho.begin(), rho.end());
    for (std::size_t j = 0; j < g.n(); ++j) {
      if (rho[j] < 1e-6 * top) continue;
      CHECK(std::abs(f.re.values[j] - sp.eigenvalues()[k]) < 1e-8);
      CHECK(std::abs(f.im.values[j]) < 1e-8);
    }
  }
}

TEST_CASE("momentum weak value of two plane waves") {
  Grid1D g(-5, 5, 64);
  Physics phys{1.0, 1.0, 1.0};
  const double k1 = 2 * kPi * 2 / g.length(), k2 = 2 * kPi * -3 / g.length();
  const cplx a(0.8, 0.1), b(0.3, -0.4);
  const auto psi = sample_function(g, [&](double x) { return a * std::exp(cplx(0, k1 * x)) + b * std::exp(cplx(0, k2 * x)); }, false);
  const auto P = SpectralOperator::momentum(g, phys);
  for (std::size_t j = 0; j < g.n(); j += 5) {
    const double x = g.x(j);
    const cplx e1 = a * std::exp(cplx(0, k1 * x)), e2 = b * std::exp(cplx(0, k2 * x));
    const cplx want = phys.hbar * (k1 * e1 + k2 * e2) / (e1 + e2);
    CHECK(std::abs(aav_weak_value(P, psi, x) - want) < 1e-8);
  }
}

TEST_CASE("weak averages reproduce expectation values") {
  Grid1D g(-15, 15, 256);
  Physics phys{1.0, 1.4, 1.0};
  const auto pot = PotentialModel::barrier(0.7, 0.5, 1.5);
  const auto psi = gaussian_packet(g, -1.0, 1.1, 1.3);
  const auto P = SpectralOperator::momentum(g, phys);
  const auto H = build_hamiltonian(g, pot, 0, phys);
  const auto W = SpectralOperator::window(g, -0.3, 2.2);
  for (const auto* op : {&P, &H, &W}) CHECK(std::abs(weak_average_quadrature(*op, psi) - expectation(*op, psi)) < 1e-8);

  SUBCASE("ensemble estimate agrees within its standard error") {
    const auto xs = bohm::sample_initial_positions(psi, 20000, 5);
    const auto avg = ensemble_weak_average(P, psi, xs);
    CHECK(avg.used == xs.size());
    CHECK(std::abs(avg.mean - expectation(P, psi)) < 4 * avg.std_error);
  }
}

TEST_CASE("Bohm velocity equals the real part of the momentum weak value over m") {
  Grid1D g(-15, 15, 256);
  Physics phys{1.0, 2.5, 1.0};
  Propagator prop(g, phys, PotentialModel::harmonic(0.6), {0.01, Method::split_operator, 1});
  const auto psi = prop.propagate(gaussian_packet(g, 1.0, 0.8, -0.9), 0.7);
  const auto v = bohm::velocity_grid(psi, phys);
  const auto pw = weak_value_field(SpectralOperator::momentum(g, phys), psi);
  for (std::size_t j = 0; j < g.n(); ++j)
    if (v.valid[j]) CHECK(std::abs(v.values[j] - pw.re.values[j] / phys.mass) < 1e-8);
}

TEST_CASE("local energy splits into kinetic, quantum and potential parts") {
  Grid1D g(-12, 12, 256);
  Physics phys{1.0, 1.0, 1.0};
  auto pot = PotentialModel::harmonic(1.0, 0.4);
  const auto psi = gaussian_packet(g, 0.0, 0.9, 0.7);
  const auto e = local_energy_grid(psi, pot, phys);
  const auto v = bohm::velocity_grid(psi, phys);
  const auto q = bohm::quantum_potential_grid(psi, phys);
  const auto rho = psi.density();
  const double top = *std::max_element(rho.begin(), rho.end());
  for (std::size_t j = 0; j < g.n(); ++j) {
    if (rho[j] < 1e-8 * top) continue;
    const double want = 0.5 * phys.mass * v.values[j] * v.values[j] + q.values[j] + pot.static_at(g.x(j), phys);
    CHECK(std::abs(e.values[j] - want) < 1e-6);
  }
  // an external drive is not part of the local energy
  const auto driven = pot.with_drive({0.5, 1.0, 0.0, 0.0, 10.0});
  CHECK(local_energy(psi, driven, phys, 0.3) == doctest::Approx(local_energy(psi, pot, phys, 0.3)).epsilon(1e-14));
}

TEST_CASE("post-selection on a node") {
  Grid1D g(-8, 8, 128);
  auto w = sample_function(g, [](double x) { return cplx(x * std::exp(-x * x / 2), 0.0); });
  w.psi[64] = 0.0;
  CHECK_THROWS_AS(aav_weak_value(SpectralOperator::position(g), w, 0.0), PostSelectionImpossible);
}

TEST_CASE("dwell-time operator") {
  Grid1D g(-40, 40, 512);
  Physics phys;
  Propagator prop(g, phys, PotentialModel::barrier(1.0, 0.0, 1.0), {0.01, Method::split_operator, 5});
  const auto psi0 = gaussian_packet(g, -6.0, 1.0, 2.5);
  const double a = -1.0, b = 2.0;

  SUBCASE("integrand at t = 0 is the window indicator") {
    const RVec w = window_weights(g, a, b);
    for (std::size_t j : {std::size_t(245), std::size_t(250), std::size_t(255)})
      CHECK(std::abs(dwell_integrand(psi0, g.x(j), a, b, 0.0, prop) - cplx(w[j], 0)) < 1e-12);
  }

  SUBCASE("Horner sweep equals the trapezoid sum of direct integrands") {
    const auto evo = prop.evolve(psi0, 0.5);
    const auto r = dwell_operator_field(evo, prop, a, b, false);
    const double h = evo.dt_out();
    for (double x : {-6.5, -5.9, -4.8}) {
      cplx s = 0;
      for (std::size_t k = 0; k < evo.size(); ++k) {
        const double wk = (k == 0 || k + 1 == evo.size()) ? 0.5 * h : h;
        s += wk * dwell_integrand(psi0, x, a, b, evo.times[k], prop);
      }
      CHECK(std::abs(r.field.at(x) - s.real()) < 1e-8);
      CHECK(std::abs(r.field_imag.at(x) - s.imag()) < 1e-8);
    }
  }

  SUBCASE("expectation equals the time-integrated window mass") {
    const auto evo = prop.evolve(psi0, 6.0);
    const auto r = dwell_operator_field(evo, prop, a, b, false);
    const auto W = SpectralOperator::window(g, a, b);
    double s = 0;
    for (std::size_t k = 0; k < evo.size(); ++k) {
      const double wk = (k == 0 || k + 1 == evo.size()) ? 0.5 : 1.0;
      s += wk * evo.dt_out() * expectation(W, evo.frame(k));
    }
    CHECK(std::abs(r.expectation - s) < 1e-9);
    CHECK(r.richardson_rel < 1e-3);
    CHECK_THROWS_AS(dwell_operator_field(evo, prop, a, b, true), HorizonError);
  }
}

TEST_CASE("stationary state: dwell expectation is T times the window mass") {
  Grid1D g(-10, 10, 256);
  Physics phys;
  const auto pot = PotentialModel::harmonic(1.0);
  const auto e0 = WaveFunction(g, build_hamiltonian(g, pot, 0, phys).decompose(1).eigenvector(0));
  Propagator prop(g, phys, pot, {0.01, Method::crank_nicolson, 10});
  const double T = 2.0;
  const auto evo = prop.evolve(e0, T);
  const auto r = dwell_operator_field(evo, prop, -1.0, 1.5, false);
  CHECK(std::abs(r.expectation - T * expectation(SpectralOperator::window(g, -1.0, 1.5), e0)) < 1e-8);
}
