// Acceptance checks. One line per criterion: PASS or FAIL, the measured values,
// the tolerance they were judged against and the wall-clock time.

#include "libra/builtin_systems.hpp"
#include "libra/linalg.hpp"
#include "libra/linsys.hpp"
#include "libra/orbits.hpp"
#include "libra/reduced.hpp"
#include "libra/symmetry.hpp"
#include "libra/sympmat.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace libra;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

Vec pt(std::initializer_list<double> v) {
  Vec x(v.size());
  int i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

PeriodicOrbit builtin_orbit(const std::string& name, const std::map<std::string, double>& par = {}) {
  auto [x0, T] = recommended_seed(name, par);
  return find_periodic_orbit(make_builtin(name, par), x0, T);
}

PeriodicOrbit double_well(double omega, double energy, double eps = 0.0) {
  return builtin_orbit("double_well", {{"omega", omega}, {"energy", energy}, {"eps", eps}});
}

double max_speed_time(const PeriodicOrbit& o) {
  OrbitProjection proj(o);
  double best = -1, tb = 0;
  for (int k = 0; k < 2000; ++k) {
    double t = o.period * k / 2000;
    double v = proj.Qdot(t).norm();
    if (v > best) best = v, tb = t;
  }
  return tb;
}

double min_eigenvalue_gap(const CVec& ev) {
  double g = INFINITY;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    for (Eigen::Index j = i + 1; j < ev.size(); ++j) g = std::min(g, std::abs(ev(i) - ev(j)));
  return g;
}

std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2e", v);
  return b;
}

// 1: tangent space of the antisymplectic involutions
Outcome criterion1() {
  std::mt19937_64 rng(101);
  int checked = 0, good = 0;
  for (int d = 1; d <= 3; ++d) {
    std::vector<Mat> Rs{R0(d)};
    for (int k = 0; k < 5; ++k) Rs.push_back(conjugate_involution(random_symplectic(d, rng, 0.5), R0(d)));
    for (const Mat& R : Rs) {
      auto basis = tangent_basis_A2d(R);
      Mat stacked(4 * d * d, basis.size());
      for (std::size_t i = 0; i < basis.size(); ++i) stacked.col(i) = basis[i].reshaped();
      Eigen::FullPivLU<Mat> lu(stacked);
      lu.setThreshold(1e-10);
      ++checked;
      good += static_cast<int>(basis.size()) == d * (d + 1) && lu.rank() == d * (d + 1);
    }
  }
  return {good == checked, std::to_string(good) + "/" + std::to_string(checked) +
                               " points with d(d+1) independent directions"};
}

// 2: R-reversible matrices with simple spectrum
Outcome criterion2() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int good = 0;
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    int d = 1 + k % 3;
    Mat R = conjugate_involution(random_symplectic(d, rng, 0.5), R0(d));
    std::vector<double> x;
    for (int i = 0; i < d; ++i) x.push_back(1.05 + 3.0 * U(rng));
    std::sort(x.begin(), x.end());
    bool distinct = true;
    for (int i = 1; i < d; ++i) distinct &= x[i] > x[i - 1];
    if (!distinct) continue;
    Mat M = make_r_reversible(R, x);
    double res = reversibility_residual(R, M);
    worst = std::max(worst, res);
    good += res <= 1e-8 && min_eigenvalue_gap(eigenvalues(M)) > 1e-3;
  }
  return {good >= 99, std::to_string(good) + "/100 draws with residual <= 1e-8 and gap > 1e-3, worst residual " +
                          sci(worst)};
}

// 3: symmetry identities for the magnetic system
Outcome criterion3() {
  System mag = make_builtin("magnetic");
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double inv = 0, en = 0, rec = 0;
  for (int k = 0; k < 1000; ++k) {
    Vec x = pt({U(rng), U(rng), 1.5 * U(rng), 1.5 * U(rng)});
    auto r = apply_symmetry(mag, x);
    auto back = apply_symmetry(mag, r.image);
    inv = std::max(inv, (back.image - x).norm());
    en = std::max(en, std::abs(mag.energy(r.image) - mag.energy(x)));
    rec = std::max(rec, std::abs(r.scale * back.scale - 1.0));
  }
  double jac = 0;
  for (int k = 0; k < 50; ++k) {
    Vec q = pt({U(rng), U(rng)});
    Vec x = mag.join(q, fiber_minimum(mag, q).p_star);
    jac = std::max(jac, max_abs(symmetry_jacobian(mag, x) - symmetry_jacobian_on_gamma(mag, q)));
  }
  bool ok = inv <= 1e-7 && en <= 1e-9 && rec <= 1e-7 && jac <= 1e-4;
  return {ok, "involution " + sci(inv) + " (1e-7), energy " + sci(en) + " (1e-9), scale product " + sci(rec) +
                  " (1e-7), Gamma Jacobian " + sci(jac) + " (1e-4)"};
}

// 4: round-trip certification
Outcome criterion4() {
  auto dw = double_well(1.5, 0.5);
  auto c = classify_orbit(dw);
  bool ok = c.kind == OrbitKind::RoundTrip && c.degenerate_times.size() == 2;
  double gap = INFINITY, dres = INFINITY;
  if (ok) {
    auto sig = time_symmetry_sigma(dw, c.degenerate_times[0], c.degenerate_times[1]);
    gap = std::abs(wrap_time(sig.nu1 - sig.nu0, dw.period) - dw.period / 2);
    dres = sig.derivative_residual;
  }
  auto mag = builtin_orbit("magnetic");
  auto cm = classify_orbit(mag);
  ok = ok && gap <= 1e-6 && dres <= 1e-4 && cm.kind == OrbitKind::Neat;
  return {ok, "double well " + to_string(c.kind) + ", |nu1 - nu0 - T/2| " + sci(gap) + " (1e-6), |sigma' + 1| " +
                  sci(dres) + " (1e-4); magnetic circle " + to_string(cm.kind)};
}

// 5: reversibility identity across double-well parameters
Outcome criterion5() {
  struct P {
    double omega, energy, eps;
  };
  double id = 0, anti = 0;
  int reversible = 0;
  for (P p : {P{1.5, 0.5, 0.0}, P{1.2, 0.3, 0.0}, P{2.0, 0.7, 0.0}, P{1.3, 0.4, 0.2}, P{1.7, 0.6, -0.1}}) {
    auto v = check_reversible_orbit(double_well(p.omega, p.energy, p.eps));
    id = std::max(id, v.identity_residual);
    anti = std::max({anti, v.antisymplectic_residual[0], v.antisymplectic_residual[1]});
    reversible += v.reversible && !v.inconclusive;
  }
  return {id <= 1e-5 && anti <= 1e-5 && reversible == 5,
          "5 librations, identity " + sci(id) + ", antisymplectic " + sci(anti) + " (1e-5), " +
              std::to_string(reversible) + "/5 reversible"};
}

std::vector<PeriodicOrbit> test_orbits() {
  std::vector<PeriodicOrbit> o{double_well(1.5, 0.5), double_well(1.3, 0.4, 0.2), builtin_orbit("magnetic"),
                               builtin_orbit("asymmetric")};
  auto V = std::make_shared<QuadraticPotential>(pt({1.0, std::sqrt(2.0)}));
  o.push_back(find_periodic_orbit(System(std::make_shared<MechanicalHamiltonian>(2, V, 0.5)),
                                  pt({1.0, 0.0, 0.0, 0.0}), 2 * M_PI));
  return o;
}

// 6: spectra of return maps from different anchors
Outcome criterion6() {
  double worst = 0;
  int n = 0;
  for (const auto& o : test_orbits()) {
    double ta = max_speed_time(o);
    auto A = reduced_return_map(o, ta);
    for (double shift : {0.13, 0.61}) {
      auto B = reduced_return_map(o, ta + shift * o.period);
      worst = std::max(worst, eigenvalue_multiset_distance(eigenvalues(A.matrix), eigenvalues(B.matrix)));
    }
    ++n;
  }
  return {worst <= 1e-6, std::to_string(n) + " orbits, 2 anchor shifts each, spectral distance " + sci(worst) +
                             " (1e-6)"};
}

// 7: B block of the reduced equation
Outcome criterion7() {
  double worst = 0, min_eig = INFINITY;
  for (const auto& o : {double_well(1.5, 0.5), double_well(1.2, 0.3), builtin_orbit("asymmetric")}) {
    SectionFrame f = build_section(o, max_speed_time(o));
    auto tm = transition_map(f, o, -0.2, 0.2);
    for (std::size_t k = 0; k < tm.blocks.size(); ++k) worst = std::max(worst, max_abs(tm.blocks[k].B - tm.hpp_star[k]));
    min_eig = std::min(min_eig, tm.min_B_eigenvalue);
  }
  return {worst <= 1e-6 && min_eig > 0,
          "3 paths, |B - Hp*p*| " + sci(worst) + " (1e-6), min eigenvalue of B " + sci(min_eig)};
}

// 8: both directions of the three-condition characterization
Outcome criterion8() {
  const double T = 3.0;
  double agree = 0, m_defect = 0, violator_min = INFINITY;
  int conditions = 0;
  std::vector<double> times{0.3, 0.9, 1.5, 2.1, 2.7};
  for (int i = 0; i < 20; ++i) {
    int d = 1 + i % 2;
    std::mt19937_64 rng(800 + i);
    Curve L = random_hamiltonian_curve(d, T, rng);
    Curve a = random_positive_scalar(T, rng);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Mat G(d, d);
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s) G(r, s) = U(rng);
    Mat s0 = -(0.2 * Mat::Identity(d, d) + 0.1 * G * G.transpose() / d);
    auto pair = build_conjugate_pair(L, a, 1.2 + 0.1 * (i % 7), s0);
    conditions += check_three_conditions(pair).all();
    agree = std::max(agree, projection_agreement(pair, random_bump_ensemble(d, T, 50, 900 + i)));
    auto A = m_sequence(pair.L, pair.a, 4, times), B = m_sequence(pair.Lt, pair.at, 4, times);
    for (std::size_t n = 0; n < A.size(); ++n)
      for (std::size_t k = 0; k < times.size(); ++k)
        m_defect = std::max(m_defect, max_abs(pair.a.scalar(times[k]) * upper_right(A[n][k]) -
                                              pair.at.scalar(times[k]) * upper_right(B[n][k])));
    if (i < 4) {
      auto ens = random_bump_ensemble(d, T, 5, 950 + i);
      for (Violation w : {Violation::ScaleRatio, Violation::MomentumBlock, Violation::PositionBlock})
        violator_min = std::min(violator_min, projection_agreement(violate(pair, w, 0.5), ens));
    }
  }
  bool ok = agree <= 1e-6 && m_defect <= 1e-5 && violator_min > 1e-3 && conditions == 20;
  return {ok, "20 pairs x 50 bumps, agreement " + sci(agree) + " (1e-6), " + std::to_string(conditions) +
                  "/20 meet the conditions, M_n defect n <= 4 " + sci(m_defect) + " (1e-5), weakest violator " +
                  sci(violator_min) + " (> 1e-3)"};
}

// 9: potential derivative by the forced linear equation and by finite differences
Outcome criterion9() {
  auto o = double_well(1.5, 0.5);
  SectionFrame f = build_section(o, max_speed_time(o));
  double worst = 0;
  bool warned = false;
  struct B {
    double offset, width, amp;
  };
  for (B b : {B{0.10, 0.06, 0.7}, B{0.05, 0.04, -1.2}, B{0.14, 0.05, 0.9}}) {
    double c = f.qa(0) + b.offset * f.e0()(0);
    auto v = std::make_shared<AxisForcingPotential>(2, 0, 1, c, b.width, b.amp);
    auto r = potential_derivative_in_section(f, o, v, 0.2, 9);
    worst = std::max(worst, r.discrepancy);
    warned |= !r.warning.empty();
  }
  return {worst <= 1e-4, "3 bumps, max discrepancy " + sci(worst) + " (1e-4)" +
                             (warned ? ", finite-difference warning raised" : "")};
}

// 10: a transverse minimal chord persists under small potential bumps
Outcome criterion10() {
  auto V = std::make_shared<QuadraticPotential>(pt({1.0, std::sqrt(2.0)}));
  System sys(std::make_shared<MechanicalHamiltonian>(2, V, 0.5));
  Chord c = refine_chord(sys, pt({1.0, 0.02}), 3.0);
  auto [transverse, sig] = chord_transversality(sys, c);
  ParametricSolver solver = [](const System& s, const Vec& seed) {
    Chord ch = refine_chord(s, seed.head(2), seed(2));
    Vec out(3);
    out << ch.start.q, ch.duration;
    return out;
  };
  Vec x0(3);
  x0 << c.start.q, c.duration;
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double C = 0;
  int ok_count = 0;
  for (int k = 0; k < 10; ++k) {
    auto bump = std::make_shared<BumpPotential>(pt({U(rng), U(rng)}), 0.6 + 0.3 * std::abs(U(rng)), 1.0);
    auto rep = check_parameter_continuity(sys, bump, x0, solver, {1e-3, 1e-4});
    ok_count += rep.ok;
    C = std::max(C, rep.fitted_C);
  }
  bool ok = transverse && c.minimal && ok_count == 10;
  return {ok, "chord sigma_min " + sci(sig) + (c.minimal ? ", minimal" : ", not minimal") + ", " +
                  std::to_string(ok_count) + "/10 bumps re-solved with displacement <= C delta, fitted C " + sci(C)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all{
      {1, "tangent space of antisymplectic involutions", 1, criterion1},
      {2, "R-reversible construction with simple spectrum", 5, criterion2},
      {3, "symmetry identities on the magnetic system", 30, criterion3},
      {4, "round-trip and neat certification", 60, criterion4},
      {5, "reversibility identity on double-well librations", 120, criterion5},
      {6, "return-map spectra independent of the anchor", 60, criterion6},
      {7, "B block equals the momentum Hessian", 30, criterion7},
      {8, "three conditions, both directions", 300, criterion8},
      {9, "potential derivative cross-validation", 60, criterion9},
      {10, "chord transversality persistence", 60, criterion10},
  };
  int failed = 0;
  for (const auto& c : all) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = out.ok && secs < c.limit_seconds;
    failed += !ok;
    std::printf("%s  criterion %2d  %-50s  %s  [%.2f s, limit %.0f s]\n", ok ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), secs, c.limit_seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
