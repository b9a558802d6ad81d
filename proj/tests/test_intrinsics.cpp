#include <doctest.h>

#include <cmath>
#include <memory>

#include "weaklab/bohm/trajectories.hpp"
#include "weaklab/common/errors.hpp"
#include "weaklab/intrinsics/current.hpp"
#include "weaklab/intrinsics/dwell.hpp"
#include "weaklab/intrinsics/work.hpp"
#include "weaklab/qgrid/operator.hpp"

using namespace weaklab;
using namespace weaklab::qgrid;
using namespace weaklab::intrinsics;

namespace {

bohm::Trajectory hand_trajectory(RVec t, RVec x) {
  bohm::Trajectory tr;
  tr.times = std::make_shared<const RVec>(std::move(t));
  tr.positions = std::move(x);
  return tr;
}

WaveFunction ground_state(const Grid1D& g, const PotentialModel& pot, std::size_t k = 0) {
  return WaveFunction(g, build_hamiltonian(g, pot, 0, Physics{}).decompose(k + 1).eigenvector(k));
}

}  // namespace

TEST_CASE("work vanishes along frozen eigenstate trajectories") {
  Grid1D g(-10, 10, 256);
  const auto pot = PotentialModel::harmonic(1.0);
  Propagator prop(g, Physics{}, pot, {0.01, Method::crank_nicolson, 10});
  const auto e = ground_state(g, pot, 1);
  const auto evo = prop.evolve(e, 1.0);
  const auto ens = bohm::integrate_trajectories(evo, bohm::sample_initial_positions(e, 300, 1), 1);
  const auto recs = work_records(evo, ens, 0.0, 1.0);
  for (const auto& r : recs)
    if (!r.flagged) CHECK(std::abs(r.work) < 1e-8);
  const auto d = work_distribution(recs);
  CHECK(d.probabilities.size() == 1);
  CHECK(d.probabilities[0] == doctest::Approx(1.0));
  CHECK(std::abs(d.mean) < 1e-8);
}

TEST_CASE("free packet: mean work is zero within the error bar") {
  Grid1D g(-30, 30, 512);
  Propagator prop(g, Physics{}, PotentialModel::free_space(), {0.01, Method::split_operator, 5});
  const auto psi = gaussian_packet(g, 0.0, 1.0, 1.0);
  const auto evo = prop.evolve(psi, 1.5);
  const auto ens = bohm::integrate_trajectories(evo, bohm::sample_initial_positions(psi, 5000, 2), 2);
  const auto d = work_distribution(work_records(evo, ens, 0.0, 1.5));
  CHECK(d.N + d.flagged == 5000);
  CHECK(std::abs(d.mean) < 4 * d.std_error + 1e-3);
  double s = 0;
  for (double p : d.probabilities) s += p;
  CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("driven packet: mean work equals the system energy change") {
  Grid1D g(-30, 30, 512);
  Physics phys;
  const auto pot = PotentialModel::harmonic(0.5).with_drive({0.4, 0.0, 0.0, 0.5, 1.5});
  Propagator prop(g, phys, pot, {0.005, Method::split_operator, 4});
  const auto psi = gaussian_packet(g, 0.0, 1.2, 0.0);
  const auto evo = prop.evolve(psi, 2.0);
  const auto ens = bohm::integrate_trajectories(evo, bohm::sample_initial_positions(psi, 5000, 3), 3);
  const auto d = work_distribution(work_records(evo, ens, 0.0, 2.0));
  const auto H = build_hamiltonian(g, pot, 0.0, phys, false);
  const double dH = expectation(H, evo.frame(evo.size() - 1)) - expectation(H, evo.frame(0));
  CHECK(std::abs(dH) > 0.05);
  CHECK(std::abs(d.mean - dH) < 4 * d.std_error + 1e-3);
}

TEST_CASE("work histogram bookkeeping") {
  std::vector<WorkRecord> recs;
  for (int i = 0; i < 1000; ++i) recs.push_back({std::size_t(i), 0, 0, std::sin(0.37 * i), false});
  recs.push_back({1000, 0, 0, 99.0, true});
  const auto d = work_distribution(recs);
  CHECK(d.N == 1000);
  CHECK(d.flagged == 1);
  double s = 0, m = 0;
  for (int i = 0; i < 1000; ++i) m += std::sin(0.37 * i) / 1000.0;
  for (double p : d.probabilities) s += p;
  CHECK(s == doctest::Approx(1.0));
  CHECK(d.mean == doctest::Approx(m).epsilon(1e-12));
  CHECK(d.bin_edges.size() == d.probabilities.size() + 1);
  CHECK(std::abs(d.binned_mean - d.mean) < d.bin_edges[1] - d.bin_edges[0]);
  CHECK_THROWS_AS(work_distribution({{0, 0, 0, 1.0, true}}), EmptyEnsembleError);
}

TEST_CASE("power balance") {
  SUBCASE("plane wave has no residual") {
    Grid1D g(-10, 10, 128);
    Propagator prop(g, Physics{}, PotentialModel::free_space(), {0.01, Method::split_operator, 2});
    const auto pw = plane_wave(g, 3);
    const auto evo = prop.evolve(pw, 0.5);
    const auto ens = bohm::integrate_trajectories(evo, RVec{-2.0, 1.0});
    const auto p = power_balance_residual(evo, ens.trajectories[0], 10, 2);
    CHECK(std::abs(p.residual) < 1e-9);
    CHECK(std::abs(p.dQ_dt) < 1e-9);
  }
  SUBCASE("residual is second order in the frame spacing") {
    Grid1D g(-12, 12, 256);
    const auto pot = PotentialModel::harmonic(1.0);
    const auto sp = build_hamiltonian(g, pot, 0, Physics{}).decompose(2);
    CVec c(g.n());
    for (std::size_t j = 0; j < g.n(); ++j) c[j] = sp.eigenvector(0)[j] + cplx(0.0, 0.6) * sp.eigenvector(1)[j];
    WaveFunction psi(g, c);
    psi.normalize();
    Propagator prop(g, Physics{}, pot, {0.0025, Method::split_operator, 2});
    const auto evo = prop.evolve(psi, 1.0);
    const auto ens = bohm::integrate_trajectories(evo, RVec{-0.3, 0.4}, 0, {4});
    for (const auto& tr : ens.trajectories) {
      const double r1 = power_balance_residual(evo, tr, 100, 4).residual;
      const double r2 = power_balance_residual(evo, tr, 100, 8).residual;
      CHECK(std::abs(r2 / r1 - 4.0) < 0.5);
    }
  }
  SUBCASE("free Gaussian: halving the frame spacing quarters the residual") {
    Grid1D g(-30, 30, 512);
    Propagator prop(g, Physics{}, PotentialModel::free_space(), {0.0025, Method::split_operator, 2});
    const auto evo = prop.evolve(gaussian_packet(g, 0.0, 0.7, 0.5), 1.0);
    const auto ens = bohm::integrate_trajectories(evo, RVec{-0.6, 0.9}, 0, {4});
    for (const auto& tr : ens.trajectories) {
      const double r1 = power_balance_residual(evo, tr, 100, 4).residual;
      const double r2 = power_balance_residual(evo, tr, 100, 8).residual;
      CHECK(std::abs(r2 / r1 - 4.0) < 0.5);
    }
  }
}

TEST_CASE("current per experiment") {
  CurrentConfig cfg{2.5, 1.5};
  SUBCASE("plane wave") {
    Grid1D g(-10, 10, 128);
    Propagator prop(g, Physics{}, PotentialModel::free_space(), {0.01, Method::split_operator, 1});
    const auto evo = prop.evolve(plane_wave(g, 2), 0.1);
    const bohm::VelocityCache vel(evo);
    const auto ens = bohm::integrate_trajectories(evo, RVec{0.3});
    const double k = 2 * kPi * 2 / g.length();
    CHECK(current_per_experiment(vel, ens.trajectories[0], cfg, 5).value == doctest::Approx(cfg.charge * k / cfg.length));
  }
  SUBCASE("stationary real state carries no current") {
    Grid1D g(-10, 10, 256);
    const auto pot = PotentialModel::harmonic(1.0);
    const auto e = ground_state(g, pot);
    Propagator prop(g, Physics{}, pot, {0.01, Method::crank_nicolson, 5});
    const auto evo = prop.evolve(e, 0.5);
    const bohm::VelocityCache vel(evo);
    const auto ens = bohm::integrate_trajectories(evo, RVec{-1.0, 0.2, 1.3});
    const auto tr = current_traces(vel, ens, cfg, 0, evo.size() - 1);
    for (const auto& row : tr.currents)
      for (double i : row) CHECK(std::abs(i) < 1e-8);
  }
  SUBCASE("free Gaussian scaling") {
    Grid1D g(-30, 30, 512);
    Propagator prop(g, Physics{}, PotentialModel::free_space(), {0.01, Method::split_operator, 5});
    const auto evo = prop.evolve(gaussian_packet(g, 0.0, 1.0, 0.0), 1.0);
    const bohm::VelocityCache vel(evo);
    const auto ens = bohm::integrate_trajectories(evo, RVec{0.8});
    const auto& tr = ens.trajectories[0];
    const std::size_t k = evo.size() - 1;
    const double t = evo.times[k], c = 0.5;
    const double v = tr.positions[k] * c * c * t / (1 + c * c * t * t);
    CHECK(std::abs(current_per_experiment(vel, tr, cfg, k).value - cfg.charge * v / cfg.length) < 1e-4);
  }
}

TEST_CASE("noise spectrum") {
  const double dt = 0.1;
  const std::size_t T = 400, M = 40;
  auto make = [&](auto f) {
    std::vector<RVec> rows(3, RVec(T));
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t i = 0; i < T; ++i) rows[r][i] = f(r, static_cast<double>(i) * dt);
    return rows;
  };

  SUBCASE("zero signal") {
    const auto p = psd(make([](std::size_t, double) { return 0.0; }), dt, M);
    for (double v : p.values) CHECK(v == 0.0);
  }
  SUBCASE("evenness and the zero-frequency identity") {
    const auto rows = make([](std::size_t r, double t) { return std::sin(1.3 * t + r) + 0.2 * std::cos(4.1 * t * t); });
    const auto p = psd(rows, dt, M);
    REQUIRE(p.values.size() == 2 * M + 1);
    for (std::size_t k = 0; k <= M; ++k) CHECK(p.values[k] == doctest::Approx(p.values[2 * M - k]).epsilon(1e-12));
    // biased autocorrelation by direct summation
    auto corr = [&](std::size_t m) {
      double s = 0;
      for (const auto& x : rows)
        for (std::size_t i = 0; i + m < T; ++i) s += x[i] * x[i + m];
      return s / static_cast<double>(rows.size() * T);
    };
    double want = 0;
    for (std::size_t m = 0; m <= M; ++m) {
      const double w = m == M ? 0.5 : 1.0;
      want += (m == 0 ? 1.0 : 2.0) * w * corr(m) * dt;
    }
    CHECK(p.values[M] == doctest::Approx(want).epsilon(1e-10));
    CHECK(p.correlation[3] == doctest::Approx(corr(3)).epsilon(1e-10));
  }
  SUBCASE("cosine peaks at its frequency") {
    const double w0 = 2.0;
    const auto p = psd(make([&](std::size_t r, double t) { return std::cos(w0 * t + 0.7 * r); }), dt, M, true);
    std::size_t best = M;
    for (std::size_t k = M; k < p.values.size(); ++k)
      if (p.values[k] > p.values[best]) best = k;
    CHECK(std::abs(p.omega[best] - w0) <= kPi / (M * dt));
  }
  SUBCASE("lag window must fit the trace") {
    CHECK_THROWS_AS(psd(make([](std::size_t, double) { return 1.0; }), dt, T), LagError);
  }
}

TEST_CASE("dwell time of a single trajectory") {
  const RVec t{0, 1, 2, 3};
  CHECK(dwell_time_trajectory(hand_trajectory(t, {-5, -4, -3, -2}), 0, 2) == 0.0);
  CHECK(dwell_time_trajectory(hand_trajectory(t, {-1, 1, 3, 5}), 0, 2) == doctest::Approx(1.0));
  const auto frozen = hand_trajectory(t, {1, 1, 1, 1});
  CHECK(dwell_time_trajectory(frozen, 0, 2, HorizonPolicy::truncate) == doctest::Approx(3.0));
  CHECK_THROWS_AS(dwell_time_trajectory(frozen, 0, 2), HorizonError);
}

TEST_CASE("dwell time from the density") {
  Grid1D g(-10, 10, 256);
  const auto pot = PotentialModel::harmonic(1.0);
  const auto e = ground_state(g, pot);
  Propagator prop(g, Physics{}, pot, {0.01, Method::crank_nicolson, 5});
  const auto evo = prop.evolve(e, 2.0);
  const auto whole = dwell_time_density(evo, g.x_min() - 1, g.x_max() + 1, false);
  CHECK(whole.value == doctest::Approx(2.0).epsilon(1e-10));
  const double p = expectation(SpectralOperator::window(g, -0.5, 1.0), e);
  CHECK(dwell_time_density(evo, -0.5, 1.0, false).value == doctest::Approx(2.0 * p).epsilon(1e-8));
  CHECK_THROWS_AS(dwell_time_density(evo, -0.5, 1.0, true), HorizonError);
}

TEST_CASE("trajectory and density dwell times agree") {
  Grid1D g(-40, 40, 512);
  Propagator prop(g, Physics{}, PotentialModel::barrier(1.0, 0.0, 1.0), {0.01, Method::split_operator, 4});
  const auto psi = gaussian_packet(g, -6.0, 1.0, 2.5);
  const auto evo = prop.evolve(psi, 12.0);
  const auto ens = bohm::integrate_trajectories(evo, bohm::sample_initial_positions(psi, 4000, 11), 11);
  const auto dens = dwell_time_density(evo, 1.0, 3.0);
  const auto traj = dwell_time_ensemble(ens, 1.0, 3.0);
  CHECK(traj.n == 4000);
  CHECK(std::abs(traj.mean - dens.value) < 0.01 * dens.value + 4 * traj.std_error);
}
