#include "weaklab/measure/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "weaklab/common/errors.hpp"
#include "weaklab/common/parallel.hpp"
#include "weaklab/common/rng.hpp"

namespace weaklab::measure {

UnitaryMap evolution_map(const qgrid::Propagator& prop, double duration, double t0) {
  return [prop, duration, t0](const CVec& v) {
    return prop.propagate(WaveFunction(prop.grid(), v, t0), duration).psi;
  };
}

Protocol make_protocol(const SpectralOperator& S, const SpectralOperator& G, UnitaryMap U, const AncillaModel& anc) {
  qgrid::require_same_grid(S.grid(), G.grid());
  return Protocol{S, G, S.decompose(), G.decompose(), std::move(U), anc};
}

EntangledState premeasure(const WaveFunction& psi, const Spectrum& S, const AncillaModel& anc, double coverage,
                          double drop) {
  qgrid::require_same_grid(psi.grid, S.grid());
  const CVec c = S.coefficients(psi.psi);
  const double total_state = psi.norm2();
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return std::norm(c[a]) > std::norm(c[b]); });
  double full = 0.0;
  for (const auto& v : c) full += std::norm(v);
  if (full < (1.0 - coverage) * total_state) throw BasisCoverageError(full / total_state);

  EntangledState e;
  e.ancilla = anc;
  double kept = 0.0;
  for (std::size_t q = 0; q < order.size(); ++q) {
    if (full - kept <= drop * total_state && !e.index.empty()) break;
    e.index.push_back(order[q]);
    kept += std::norm(c[order[q]]);
  }
  std::sort(e.index.begin(), e.index.end());
  for (auto i : e.index) {
    e.coeffs.push_back(c[i]);
    e.eigenvalues.push_back(S.eigenvalues()[i]);
  }
  e.retained = kept;
  return e;
}

namespace {

void check_range(const EntangledState& ent) {
  const auto& a = ent.ancilla;
  double outside = 0.0;
  for (std::size_t i = 0; i < ent.coeffs.size(); ++i) {
    const double c = a.lambda * ent.eigenvalues[i];
    outside += std::norm(ent.coeffs[i]) * 0.5 *
               (std::erfc((a.y_max - c) / a.sigma) + std::erfc((c + a.y_max) / a.sigma));
  }
  if (outside > 1e-6) throw GridRangeError(outside);
}

}  // namespace

RVec readout_marginal(const EntangledState& ent) {
  check_range(ent);
  const auto& a = ent.ancilla;
  RVec p(a.ny, 0.0);
  for (std::size_t k = 0; k < a.ny; ++k) {
    const double y = a.y(k);
    for (std::size_t i = 0; i < ent.coeffs.size(); ++i) {
      const double v = a.a(y - a.lambda * ent.eigenvalues[i]);
      p[k] += std::norm(ent.coeffs[i]) * v * v;
    }
  }
  return p;
}

double marginal_mean(const EntangledState& ent, const RVec& marginal) {
  RVec f(marginal.size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = ent.ancilla.y(k) * marginal[k];
  return integrate(ent.ancilla, f);
}

Readout collapse(const EntangledState& ent, double y) {
  const auto& a = ent.ancilla;
  const std::size_t K = ent.coeffs.size();
  RVec la(K);
  for (std::size_t i = 0; i < K; ++i) la[i] = a.log_a(y - a.lambda * ent.eigenvalues[i]);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < K; ++i)
    if (ent.coeffs[i] != cplx(0.0)) m = std::max(m, la[i]);
  Readout r;
  r.y = y;
  r.collapsed.resize(K);
  double nn = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    r.collapsed[i] = ent.coeffs[i] * std::exp(la[i] - m);
    nn += std::norm(r.collapsed[i]);
  }
  const double s = 1.0 / std::sqrt(nn);
  for (auto& v : r.collapsed) v *= s;
  r.weight = std::exp(2.0 * m) * nn;
  return r;
}

CVec synthesize(const EntangledState& ent, const Spectrum& S, const CVec& coeffs) {
  return S.synthesize(ent.index, coeffs);
}

double JointOutcomeDistribution::total() const {
  double s = 0.0;
  for (const auto& row : density) {
    double r = 0.5 * (row.front() + row.back());
    for (std::size_t k = 1; k + 1 < row.size(); ++k) r += row[k];
    s += r * dy;
  }
  return s;
}

double JointOutcomeDistribution::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& row : density)
    for (double v : row) m = std::min(m, v);
  return m;
}

Eigen::MatrixXcd transition_matrix(const EntangledState& ent, const Protocol& p) {
  const std::size_t K = ent.index.size();
  const auto nG = static_cast<Eigen::Index>(p.G_spec.size());
  Eigen::MatrixXcd C(nG, static_cast<Eigen::Index>(K));
  std::vector<CVec> cols(K);
  parallel_for(K, [&](std::size_t i) {
    const CVec evolved = p.U(p.S_spec.eigenvector(ent.index[i]));
    cols[i] = p.G_spec.coefficients(evolved);
  });
  for (std::size_t i = 0; i < K; ++i)
    for (Eigen::Index j = 0; j < nG; ++j) C(j, static_cast<Eigen::Index>(i)) = cols[i][static_cast<std::size_t>(j)];
  return C;
}

namespace {

// Row of amplitudes A_a(y_k) = sum_i C_{a,i} c_i a(y_k - lambda s_i).
RVec joint_row(const EntangledState& ent, const Eigen::MatrixXcd& C, Eigen::Index a) {
  const auto& anc = ent.ancilla;
  RVec row(anc.ny);
  for (std::size_t k = 0; k < anc.ny; ++k) {
    const double y = anc.y(k);
    cplx amp = 0.0;
    for (std::size_t i = 0; i < ent.coeffs.size(); ++i)
      amp += C(a, static_cast<Eigen::Index>(i)) * ent.coeffs[i] * anc.a(y - anc.lambda * ent.eigenvalues[i]);
    row[k] = std::norm(amp);
  }
  return row;
}

}  // namespace

JointOutcomeDistribution two_time_joint(const WaveFunction& psi, const Protocol& p) {
  const EntangledState ent = premeasure(psi, p.S_spec, p.ancilla);
  check_range(ent);
  const Eigen::MatrixXcd C = transition_matrix(ent, p);
  JointOutcomeDistribution j;
  j.yk_grid = p.ancilla.y_grid();
  j.dy = p.ancilla.dy();
  const std::size_t nG = p.G_spec.size();
  j.yw_values.resize(nG);
  j.density.resize(nG);
  for (std::size_t g = 0; g < nG; ++g) j.yw_values[g] = p.ancilla.lambda * p.G_spec.eigenvalues()[g];
  parallel_for(nG, [&](std::size_t g) { j.density[g] = joint_row(ent, C, static_cast<Eigen::Index>(g)); });
  return j;
}

double two_time_correlation(const JointOutcomeDistribution& joint) {
  double s = 0.0;
  for (std::size_t g = 0; g < joint.density.size(); ++g) {
    const auto& row = joint.density[g];
    const std::size_t n = row.size();
    double m = 0.5 * (joint.yk_grid.front() * row.front() + joint.yk_grid.back() * row.back());
    for (std::size_t k = 1; k + 1 < n; ++k) m += joint.yk_grid[k] * row[k];
    s += joint.yw_values[g] * m * joint.dy;
  }
  return s;
}

double ideal_weak_correlation(const WaveFunction& psi, const SpectralOperator& S, const SpectralOperator& G,
                              const UnitaryMap& U, double lambda) {
  const CVec u_psi = U(psi.psi);
  const CVec gus_psi = G.apply(U(S.apply(psi.psi)));
  return lambda * lambda * qgrid::inner(psi.grid, u_psi, gus_psi).real();
}

void write_joint_csv(const JointOutcomeDistribution& joint, std::ostream& os) {
  const auto old = os.precision(kCsvPrecision);
  os << std::scientific << "y_w\\y_k";
  for (double y : joint.yk_grid) os << ',' << y;
  os << '\n';
  for (std::size_t g = 0; g < joint.density.size(); ++g) {
    os << joint.yw_values[g];
    for (double v : joint.density[g]) os << ',' << v;
    os << '\n';
  }
  os.precision(old);
  os << std::defaultfloat;
}

PerturbationTerms perturbation_decomposition(const WaveFunction& psi, double yk, double yw, const SpectralOperator& S,
                                             const SpectralOperator& G, const UnitaryMap& U, const AncillaModel& anc) {
  const auto& g = psi.grid;
  const CVec u = U(psi.psi);
  const CVec us = U(S.apply(psi.psi));
  const CVec gu = G.apply(u);
  const CVec gus = G.apply(us);
  auto lnorm = [&](const CVec& v) { return 0.5 * std::log(qgrid::inner(g, v, v).real()); };
  const double s2 = anc.sigma * anc.sigma;
  const double base = anc.log_a(yw) + anc.log_a(yk);
  const double ll = std::log(anc.lambda);  // -inf for lambda = 0
  const double lk = std::log(std::abs(yk) / s2), lw = std::log(std::abs(yw) / s2);
  PerturbationTerms t;
  t.log_norm[0] = base + lnorm(u);
  t.log_norm[1] = ll + base + lk + lnorm(us);
  t.log_norm[2] = ll + base + lw + lnorm(gu);
  t.log_norm[3] = 2.0 * ll + base + lk + lw + lnorm(gus);
  for (int q = 0; q < 4; ++q) t.norm[q] = std::exp(t.log_norm[q]);
  t.ratio_1_4 = std::exp(t.log_norm[0] - t.log_norm[3]);
  return t;
}

double perturbation_crossover(const WaveFunction& psi, const SpectralOperator& S, const SpectralOperator& G,
                              const UnitaryMap& U, const AncillaModel& anc) {
  if (!(anc.lambda > 0.0)) throw ConfigError("crossover needs a nonzero coupling");
  auto f = [&](double y) {
    const auto t = perturbation_decomposition(psi, y, y, S, G, U, anc);
    return t.log_norm[0] - t.log_norm[3];
  };
  const double y0 = anc.sigma * anc.sigma / anc.lambda;
  double lo = y0, hi = y0;
  while (f(lo) < 0.0) lo *= 0.5;
  while (f(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::size_t post_selection_index(const Spectrum& G, double g_a) {
  const RVec& e = G.eigenvalues();
  std::size_t best = 0;
  for (std::size_t j = 1; j < e.size(); ++j)
    if (std::abs(e[j] - g_a) < std::abs(e[best] - g_a)) best = j;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < e.size(); ++j)
    if (j != best) gap = std::min(gap, std::abs(e[j] - e[best]));
  if (gap == 0.0) throw ConfigError("post-selection eigenvalue is degenerate");
  if (std::abs(e[best] - g_a) > 0.5 * gap) throw ConfigError("post-selection value is not near any eigenvalue of G");
  return best;
}

cplx aav_reference(const WaveFunction& psi, const Protocol& p, std::size_t a) {
  const CVec u = p.U(psi.psi);
  const cplx den = p.G_spec.coefficient(a, u);
  if (std::abs(den) == 0.0) throw PostSelectionImpossible(p.G_spec.eigenvalues()[a]);
  return p.G_spec.coefficient(a, p.S.apply(u)) / den;
}

double operational_weak_value_exact(const WaveFunction& psi, const Protocol& p, std::size_t a) {
  const EntangledState ent = premeasure(psi, p.S_spec, p.ancilla);
  check_range(ent);
  const Eigen::MatrixXcd C = transition_matrix(ent, p);
  const RVec row = joint_row(ent, C, static_cast<Eigen::Index>(a));
  RVec yr(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) yr[k] = p.ancilla.y(k) * row[k];
  const double den = integrate(p.ancilla, row);
  if (!(den > 0.0)) throw PostSelectionImpossible(p.G_spec.eigenvalues()[a]);
  return integrate(p.ancilla, yr) / den / p.ancilla.lambda;
}

MonteCarloResult operational_weak_value_mc(const WaveFunction& psi, const Protocol& p, std::size_t a, std::size_t N,
                                           std::uint64_t seed, std::ostream* log) {
  if (N == 0) throw ConfigError("experiment count must be >= 1");
  const EntangledState ent = premeasure(psi, p.S_spec, p.ancilla);
  const Eigen::MatrixXcd C = transition_matrix(ent, p);
  const auto nG = C.rows();
  const std::size_t K = ent.coeffs.size();
  RVec ys(N);
  std::vector<std::int64_t> outcome(N, -1);
  std::vector<double> weights(N);
  const bool want_j = log != nullptr;
  if (log) log->precision(17);

  parallel_for(N, [&](std::size_t e) {
    rng::SplitMix64 eng(rng::derive(seed, rng::kMeasurement, e));
    const Readout r = readout_sample(ent, eng);
    ys[e] = r.y;
    weights[e] = r.weight;
    // Born rule for G on the evolved collapsed state sum_i b_i U|s_i>.
    // Rows are visited starting at `a`, so the post-selection decision
    // needs one row only.
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(eng);
    auto row_prob = [&](Eigen::Index j) {
      cplx amp = 0.0;
      for (std::size_t i = 0; i < K; ++i) amp += C(j, static_cast<Eigen::Index>(i)) * r.collapsed[i];
      return std::norm(amp);
    };
    const auto ai = static_cast<Eigen::Index>(a);
    u -= row_prob(ai);
    if (u < 0.0) {
      outcome[e] = ai;
      return;
    }
    if (!want_j) return;
    Eigen::Index last = ai;
    for (Eigen::Index j = 0; j < nG; ++j) {
      if (j == ai) continue;
      last = j;
      u -= row_prob(j);
      if (u < 0.0) break;
    }
    outcome[e] = last;
  });

  MonteCarloResult res;
  res.n = N;
  double s = 0.0, s2 = 0.0;
  const auto ai = static_cast<std::int64_t>(a);
  for (std::size_t e = 0; e < N; ++e) {
    const bool post = outcome[e] == ai;
    if (post) {
      ++res.n_post;
      s += ys[e];
      s2 += ys[e] * ys[e];
    }
    if (log) {
      *log << "{\"i\":" << e << ",\"y_k\":" << ys[e] << ",\"y_g\":"
           << p.ancilla.lambda * p.G_spec.eigenvalues()[static_cast<std::size_t>(outcome[e])]
           << ",\"post_selected\":" << (post ? "true" : "false") << ",\"weight\":" << weights[e] << "}\n";
    }
  }
  res.post_fraction = static_cast<double>(res.n_post) / static_cast<double>(N);
  if (res.n_post < 10) throw InsufficientStatistics(res.post_fraction, N);
  const double n = static_cast<double>(res.n_post);
  const double mean = s / n;
  const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
  res.value = mean / p.ancilla.lambda;
  res.std_error = std::sqrt(var / n) / p.ancilla.lambda;
  return res;
}

}  // namespace weaklab::measure
