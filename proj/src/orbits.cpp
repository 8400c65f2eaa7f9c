#include "libra/orbits.hpp"
#include "libra/linalg.hpp"
#include "libra/roots.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace libra {

namespace {

void check_minimality(PeriodicOrbit& o, const Tolerances& tol) {
  const double scale = std::max(1.0, o.base_point.norm());
  for (int k = 2; k <= tol.k_div; ++k) {
    Vec xk = o.segment.state(o.period / k);
    double d = o.sys.difference(o.base_point, xk).norm();
    if (d <= tol.minimality_tol * scale) {
      o.minimal = false;
      o.note = "closes at T/" + std::to_string(k) + " within " + std::to_string(d) +
               "; period may not be minimal";
      return;
    }
  }
}

}  // namespace

PeriodicOrbit make_periodic_orbit(const System& sys, const Vec& x, double T, const Tolerances& tol) {
  if (!(T > 0)) throw InputError("orbit period must be positive");
  OrbitSegment seg = variational_flow(sys, x, T, tol);
  PeriodicOrbit o{sys, x, T, seg, sys.difference(x, seg.final_state()).norm(), true, ""};
  check_minimality(o, tol);
  return o;
}

PeriodicOrbit find_periodic_orbit(const System& sys, const Vec& seed, double T_guess,
                                  const Tolerances& tol, double energy_target) {
  const int m = 2 * sys.n();
  if (seed.size() != m) throw DimensionError("seed has wrong dimension");
  if (!(T_guess > 0)) throw InputError("T_guess must be positive");
  const Vec f0 = sys.vector_field(seed);
  if (f0.norm() < tol.velocity_floor)
    throw PeriodCollapseError("seed is at a fixed point (|X_H| = " + std::to_string(f0.norm()) + ")");
  const double scale = std::max(1.0, seed.norm());
  Vec x = seed;
  double T = T_guess;
  for (int it = 0; it < 40; ++it) {
    OrbitSegment seg = variational_flow(sys, x, T, tol);
    Vec xT = seg.final_state();
    Vec F(m + 2);
    F.head(m) = sys.difference(x, xT);
    F(m) = f0.dot(sys.difference(seed, x));
    F(m + 1) = sys.energy(x) - energy_target;
    Mat Jm = Mat::Zero(m + 2, m + 1);
    Jm.topLeftCorner(m, m) = seg.final_fundamental() - Mat::Identity(m, m);
    Jm.topRightCorner(m, 1) = sys.vector_field(xT);
    Jm.block(m, 0, 1, m) = f0.transpose();
    Jm.block(m + 1, 0, 1, m) = sys.gradient(x).transpose();
    Eigen::JacobiSVD<Mat> svd(Jm, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    Vec step = svd.solve(-F);
    if (!step.allFinite()) throw NewtonError("periodic orbit Newton produced a non-finite step");
    double alpha = 1.0;
    while (T + alpha * step(m) <= 0.1 * T) alpha *= 0.5;
    x += alpha * step.head(m);
    T += alpha * step(m);
    if (T < 1e-3 * T_guess) throw PeriodCollapseError("period collapsed to " + std::to_string(T));
    if (sys.vector_field(x).norm() < tol.velocity_floor)
      throw PeriodCollapseError("Newton converged towards a fixed point");
    if (F.norm() <= tol.newton_tol * scale || alpha * step.norm() <= 1e-14 * scale) break;
  }
  PeriodicOrbit o = make_periodic_orbit(sys, x, T, tol);
  if (!(o.closure_residual <= tol.closure_tol * scale) ||
      std::abs(sys.energy(x) - energy_target) > tol.closure_tol * scale)
    throw NewtonError("periodic orbit Newton did not converge (closure " +
                      std::to_string(o.closure_residual) + ")");
  return o;
}

Vec OrbitProjection::state(double t) const { return o_.segment.state(wrap_time(t, o_.period)); }

Vec OrbitProjection::Q(double t) const { return state(t).head(o_.sys.n()); }

Vec OrbitProjection::Qdot(double t) const {
  Vec x = state(t);
  return o_.sys.H().grad_p(o_.sys.q(x), o_.sys.p(x));
}

Vec OrbitProjection::Qddot(double t) const {
  Vec x = state(t);
  Vec q = o_.sys.q(x), p = o_.sys.p(x);
  Vec f = o_.sys.vector_field(x);
  const int n = o_.sys.n();
  return o_.sys.H().hess_pq(q, p) * f.head(n) + o_.sys.H().hess_pp(q, p) * f.tail(n);
}

// ---------------------------------------------------------------------------
// Chords

namespace {

double level(const System& sys, const Vec& q, Vec& pstar, const Tolerances& tol) {
  pstar = fiber_minimum(sys, q, tol, pstar).p_star;
  return sys.H().value(q, pstar) + sys.u().value(q);
}

Vec level_gradient(const System& sys, const Vec& q, const Vec& pstar) {
  return sys.H().grad_q(q, pstar) + sys.u().grad(q);
}

// Moves q onto {H(q, p*(q)) + u(q) = 0} along the level gradient.
Vec project_gamma0(const System& sys, Vec q, Vec& pstar, const Tolerances& tol) {
  for (int it = 0; it < 50; ++it) {
    double e = level(sys, q, pstar, tol);
    Vec g = level_gradient(sys, q, pstar);
    if (std::abs(e) <= tol.newton_tol * std::max(1.0, g.norm())) return q;
    if (g.norm() == 0.0) break;
    q -= e * g / g.squaredNorm();
  }
  throw NewtonError("projection onto the zero level of the critical graph failed");
}

struct ChordLinearization {
  Vec F;  // dH/dp at the end point
  Mat J;  // derivative in (t, xi)
  Vec x_end;
};

ChordLinearization linearize_chord(const System& sys, const GammaPoint& g, double t,
                                   const Tolerances& tol, Mat* basis) {
  const int n = sys.n();
  Vec x = g.x();
  Vec ge = level_gradient(sys, g.q, g.p_star);
  if (ge.norm() < tol.velocity_floor)
    throw GeometryError("zero level is singular at the chord start (|grad| = " +
                        std::to_string(ge.norm()) + ")");
  Mat T = null_space(ge.transpose(), 1e-12);
  if (T.cols() != n - 1) throw GeometryError("tangent basis of the zero level has wrong dimension");
  Mat dxi(2 * n, n - 1);
  dxi.topRows(n) = T;
  dxi.bottomRows(n) = dgamma_section(sys, g.q, tol) * T;
  OrbitSegment seg = variational_flow(sys, x, t, tol);
  ChordLinearization L;
  L.x_end = seg.final_state();
  Vec qe = sys.q(L.x_end), pe = sys.p(L.x_end);
  L.F = sys.H().grad_p(qe, pe);
  Mat K(n, 2 * n);
  K << sys.H().hess_pq(qe, pe), sys.H().hess_pp(qe, pe);
  L.J.resize(n, n);
  L.J.col(0) = K * sys.vector_field(L.x_end);
  if (n > 1) L.J.rightCols(n - 1) = K * seg.final_fundamental() * dxi;
  if (basis) *basis = T;
  return L;
}

struct SpeedMinimum {
  double t, g;
};

// Interior local minima of |dH/dp|^2 along a dense trajectory, polished on dg/dt.
std::vector<SpeedMinimum> speed_minima(const System& sys, const OrbitSegment& seg, int samples) {
  const double t0 = seg.t_begin(), t1 = seg.t_end();
  const int M = std::max(samples, 3 * static_cast<int>(seg.node_times().size()));
  auto g = [&](double t) {
    Vec x = seg.state(t);
    return sys.H().grad_p(sys.q(x), sys.p(x)).squaredNorm();
  };
  auto dg = [&](double t) {
    Vec x = seg.state(t);
    Vec q = sys.q(x), p = sys.p(x);
    Vec f = sys.vector_field(x);
    const int n = sys.n();
    Vec v = sys.H().grad_p(q, p);
    Vec a = sys.H().hess_pq(q, p) * f.head(n) + sys.H().hess_pp(q, p) * f.tail(n);
    return 2.0 * v.dot(a);
  };
  std::vector<double> ts(M + 1), gs(M + 1);
  for (int k = 0; k <= M; ++k) {
    ts[k] = t0 + (t1 - t0) * k / M;
    gs[k] = g(ts[k]);
  }
  std::vector<SpeedMinimum> out;
  for (int k = 2; k < M - 1; ++k) {
    if (!(gs[k] <= gs[k - 1] && gs[k] < gs[k + 1])) continue;
    double t = ts[k];
    if (dg(ts[k - 1]) < 0 && dg(ts[k + 1]) > 0) t = bracket_root(dg, ts[k - 1], ts[k + 1], 1e-15);
    out.push_back({t, g(t)});
  }
  return out;
}

}  // namespace

std::vector<GammaPoint> sample_gamma0(const System& sys, const Gamma0Grid& grid,
                                      const Tolerances& tol) {
  const int n = sys.n();
  const int N = grid.per_dim;
  if (grid.lo.size() != n || grid.hi.size() != n) throw DimensionError("grid box has wrong dimension");
  if (N < 2) throw InputError("grid needs at least two points per dimension");
  long total = 1;
  std::vector<long> stride(n);
  for (int k = 0; k < n; ++k) {
    stride[k] = total;
    total *= N;
  }
  auto node = [&](long idx) {
    Vec q(n);
    for (int k = 0; k < n; ++k) {
      long i = (idx / stride[k]) % N;
      q(k) = grid.lo(k) + (grid.hi(k) - grid.lo(k)) * i / (N - 1);
    }
    return q;
  };
  std::vector<double> e(total);
  std::vector<Vec> ps(total);
  Vec pseed = Vec::Zero(n);
  for (long idx = 0; idx < total; ++idx) {
    e[idx] = level(sys, node(idx), pseed, tol);
    ps[idx] = pseed;
  }
  std::vector<GammaPoint> out;
  for (long idx = 0; idx < total; ++idx)
    for (int k = 0; k < n; ++k) {
      if ((idx / stride[k]) % N == N - 1) continue;
      long nb = idx + stride[k];
      if ((e[idx] < 0) == (e[nb] < 0)) continue;
      Vec a = node(idx), b = node(nb);
      Vec p = ps[idx];
      auto f = [&](double s) { return level(sys, Vec(a + s * (b - a)), p, tol); };
      double s = bracket_root(f, 0.0, 1.0, 1e-15);
      GammaPoint gp = fiber_minimum(sys, Vec(a + s * (b - a)), tol, ps[idx]);
      out.push_back(gp);
    }
  return out;
}

Chord refine_chord(const System& sys, const Vec& q_guess, double t_guess, const Tolerances& tol) {
  if (!(t_guess > 0)) throw InputError("chord time guess must be positive");
  Vec pstar = Vec::Zero(sys.n());
  Vec q = project_gamma0(sys, q_guess, pstar, tol);
  double t = t_guess;
  GammaPoint g;
  ChordLinearization L;
  Mat T;
  bool converged = false;
  for (int it = 0; it < 40; ++it) {
    g = fiber_minimum(sys, q, tol, pstar);
    pstar = g.p_star;
    if (sys.vector_field(g.x()).norm() < tol.velocity_floor)
      throw PeriodCollapseError("chord start is a fixed point");
    L = linearize_chord(sys, g, t, tol, &T);
    const double fn = L.F.norm();
    if (!std::isfinite(fn)) throw NewtonError("chord Newton left the domain");
    if (fn <= 10.0 * tol.newton_tol * std::max(1.0, sys.vector_field(L.x_end).norm())) {
      converged = true;
      break;
    }
    Eigen::JacobiSVD<Mat> svd(L.J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-10);
    Vec step = svd.solve(-L.F);
    double alpha = 1.0;
    if (std::abs(step(0)) > 0.25 * t) alpha = 0.25 * t / std::abs(step(0));
    t += alpha * step(0);
    if (sys.n() > 1) q = project_gamma0(sys, Vec(q + alpha * T * step.tail(sys.n() - 1)), pstar, tol);
    if (alpha * step.norm() <= 1e-15 * std::max(1.0, t)) {
      g = fiber_minimum(sys, q, tol, pstar);
      L = linearize_chord(sys, g, t, tol, &T);
      converged = true;
      break;
    }
  }
  if (!converged || !(L.F.norm() <= tol.chord_tol))
    throw NewtonError("chord Newton did not converge (|dH/dp| at end = " +
                      std::to_string(L.F.norm()) + ")");
  Chord c;
  c.start = g;
  c.duration = t;
  Vec qe = sys.q(L.x_end);
  c.end = fiber_minimum(sys, qe, tol, sys.p(L.x_end));
  c.end_residual = L.F.norm();
  c.start_residual = std::abs(sys.energy(g.x()));
  c.minimal = gamma_returns(sys, g.x(), t, tol).empty();
  Eigen::JacobiSVD<Mat> svd(L.J);
  c.transversality_sigma_min = svd.singularValues().minCoeff();
  Tolerances tight = tol;
  tight.integrator_rtol = tol.integrator_rtol / 10.0;
  tight.integrator_atol = tol.integrator_atol / 10.0;
  try {
    Vec xe = flow_map(sys, g.x(), t, tight);
    double r = sys.H().grad_p(sys.q(xe), sys.p(xe)).norm();
    c.verified = r <= tol.chord_tol && c.start_residual <= tol.chord_tol;
    if (!c.verified) c.note = "re-integration residual " + std::to_string(r);
  } catch (const Error& e) {
    c.note = std::string("re-integration failed: ") + e.what();
  }
  return c;
}

std::pair<bool, double> chord_transversality(const System& sys, const Chord& chord,
                                             const Tolerances& tol) {
  ChordLinearization L = linearize_chord(sys, chord.start, chord.duration, tol, nullptr);
  Eigen::JacobiSVD<Mat> svd(L.J);
  double s = svd.singularValues().minCoeff();
  return {s >= tol.transv_tol, s};
}

std::vector<double> gamma_returns(const System& sys, const Vec& x, double duration,
                                  const Tolerances& tol) {
  OrbitSegment seg = flow(sys, x, duration, tol);
  std::vector<double> out;
  for (const auto& m : speed_minima(sys, seg, 2000))
    if (m.g <= tol.gamma_event_tol && m.t > 1e-3 * duration && m.t < (1.0 - 1e-3) * duration)
      out.push_back(m.t);
  return out;
}

std::vector<Chord> find_chords(const System& sys, double t_max, const Gamma0Grid& grid,
                               const Tolerances& tol, int jobs) {
  std::vector<GammaPoint> seeds = sample_gamma0(sys, grid, tol);
  std::vector<std::vector<Chord>> found(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      Vec x = seeds[i].x();
      if (sys.vector_field(x).norm() < tol.velocity_floor) continue;
      try {
        OrbitSegment seg = flow(sys, x, t_max, tol);
        auto minima = speed_minima(sys, seg, 2000);
        double gmax = 0.0;
        for (const auto& y : seg.node_states())
          gmax = std::max(gmax, sys.H().grad_p(sys.q(y), sys.p(y)).squaredNorm());
        for (const auto& m : minima) {
          if (m.g > 0.05 * gmax) continue;
          try {
            Chord c = refine_chord(sys, seeds[i].q, m.t, tol);
            if (c.duration <= t_max * (1.0 + 1e-9)) found[i].push_back(c);
          } catch (const Error&) {
          }
        }
      } catch (const Error&) {
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<Chord> out;
  for (const auto& list : found)
    for (const auto& c : list) {
      bool dup = false;
      for (const auto& d : out)
        dup |= std::abs(d.duration - c.duration) < 1e-6 && (d.start.q - c.start.q).norm() < 1e-6;
      if (!dup) out.push_back(c);
    }
  std::sort(out.begin(), out.end(), [](const Chord& a, const Chord& b) {
    if (std::abs(a.duration - b.duration) > 1e-9) return a.duration < b.duration;
    return std::lexicographical_compare(a.start.q.data(), a.start.q.data() + a.start.q.size(),
                                        b.start.q.data(), b.start.q.data() + b.start.q.size());
  });
  return out;
}

// ---------------------------------------------------------------------------
// Classification

std::string to_string(OrbitKind k) {
  switch (k) {
    case OrbitKind::Neat: return "neat";
    case OrbitKind::RoundTrip: return "round_trip";
    case OrbitKind::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

double TimeSymmetry::operator()(double t) const {
  double u = wrap_time(t - nu0, period);
  return wrap_time((*sol_)(nu0 + u)(0), period);
}

double TimeSymmetry::derivative(double t) const { return rate_(wrap_time(t, period)); }

TimeSymmetry time_symmetry_sigma(const PeriodicOrbit& orbit, double nu0, double nu1,
                                 const Tolerances& tol) {
  auto orb = std::make_shared<PeriodicOrbit>(orbit);
  auto proj = std::make_shared<OrbitProjection>(*orb);
  TimeSymmetry s;
  s.nu0 = nu0;
  s.nu1 = nu1;
  s.period = orbit.period;
  s.rate_ = [orb, proj, tol](double t) {
    return -1.0 / apply_symmetry(orb->sys, proj->state(t), tol).scale;
  };
  OdeOptions o;
  o.rtol = 1e-11;
  o.atol = 1e-12;
  auto rate = s.rate_;
  OdeRhs rhs = [rate](double t, const Vec&, Vec& dy) { dy(0) = rate(t); };
  Vec y0(1);
  y0 << nu0;
  s.sol_ = std::make_shared<DenseSolution>(integrate(rhs, nu0, y0, nu0 + orbit.period, o));

  const double T = orbit.period;
  for (int k = 0; k < 200; ++k) {
    double t = T * k / 200.0;
    s.max_projection_residual =
        std::max(s.max_projection_residual, (proj->Q(s(t)) - proj->Q(t)).norm());
  }
  s.fixed_point_residual = std::abs(circle_diff(s(nu1), nu1, T));
  const double h = 1e-4 * T;
  for (double nu : {nu0, nu1}) {
    double fd = circle_diff(s(nu + h), s(nu - h), T) / (2.0 * h);
    s.derivative_residual = std::max(s.derivative_residual, std::abs(fd + 1.0));
  }
  const int M = 2000;
  double prev = circle_diff(s(nu0 + 0.5 * T / M), nu0 + 0.5 * T / M, T);
  for (int k = 1; k <= M; ++k) {
    double t = nu0 + (k + 0.5) * T / M;
    double d = circle_diff(s(t), t, T);
    if ((d < 0) != (prev < 0) && std::abs(d) < 0.25 * T && std::abs(prev) < 0.25 * T)
      ++s.fixed_point_count;
    prev = d;
  }
  double vmax = 0.0;
  for (int k = 0; k < 200; ++k) vmax = std::max(vmax, proj->Qdot(T * k / 200.0).norm());
  double vturn = std::max(proj->Qdot(nu0).norm(), proj->Qdot(nu1).norm());

  std::string fail;
  if (s.max_projection_residual > 1e-6)
    fail += " Q(sigma(t)) - Q(t) = " + std::to_string(s.max_projection_residual) + ";";
  if (s.fixed_point_residual > 1e-6)
    fail += " sigma(nu1) - nu1 = " + std::to_string(s.fixed_point_residual) + ";";
  if (s.derivative_residual > 1e-4)
    fail += " sigma'(nu_i) + 1 = " + std::to_string(s.derivative_residual) + ";";
  if (s.fixed_point_count != 2)
    fail += " sigma has " + std::to_string(s.fixed_point_count) + " fixed points;";
  if (vturn > 1e-6 * std::max(1.0, vmax))
    fail += " turning speed " + std::to_string(vturn) + ";";
  if (!fail.empty()) throw ClassificationError("round-trip certificate failed:" + fail);
  return s;
}

OrbitClassification classify_orbit(const PeriodicOrbit& orbit, const Tolerances& tol,
                                   const CurveSamplingOptions& opt) {
  OrbitProjection proj(orbit);
  CurveAnalysis a = analyze_curve(proj, opt);
  OrbitClassification c;
  c.degenerate_times = a.degenerate_times;
  c.revisited_fraction = a.revisited_fraction;
  c.diagnostics = a.diagnostics;
  for (const auto& x : a.crossings) {
    c.self_intersection_times.push_back(x.s);
    c.self_intersection_times.push_back(x.sigma);
  }
  if (a.neat_certified) {
    c.kind = OrbitKind::Neat;
    c.neat_begin = a.neat_begin;
    c.neat_end = a.neat_end;
    return c;
  }
  if (a.degenerate_times.size() != 2) {
    c.diagnostics.push_back("no neat interval and " + std::to_string(a.degenerate_times.size()) +
                            " degenerate times; a round trip needs exactly two");
    return c;
  }
  try {
    TimeSymmetry s = time_symmetry_sigma(orbit, a.degenerate_times[0], a.degenerate_times[1], tol);
    c.kind = OrbitKind::RoundTrip;
    for (int k = 0; k < 200; ++k) {
      double t = orbit.period * k / 200.0;
      c.sigma_samples.push_back({t, s(t)});
    }
  } catch (const Error& e) {
    c.diagnostics.push_back(e.what());
  }
  return c;
}

MultipleIntersections count_multiple_intersections(const PeriodicOrbit& orbit,
                                                   const CurveSamplingOptions& opt) {
  OrbitProjection proj(orbit);
  return count_multiple_intersections(static_cast<const ProjectedCurve&>(proj), opt);
}

}  // namespace libra
