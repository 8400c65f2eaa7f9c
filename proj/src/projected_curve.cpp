#include "libra/projected_curve.hpp"
#include "libra/roots.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace libra {

double wrap_time(double t, double T) {
  double r = std::fmod(t, T);
  if (r < 0) r += T;
  if (r >= T) r -= T;
  return r;
}

double circle_diff(double a, double b, double T) {
  double d = std::fmod(a - b, T);
  if (d < -0.5 * T) d += T;
  if (d >= 0.5 * T) d -= T;
  return d;
}

namespace {

struct Branch {
  int nearest_seg;
  double param;  // position along the nearest segment in [0, 1]
  double dist;
  bool own;
};

struct Scan {
  int N = 0;
  double T = 0, dt = 0, eps = 0, vmax = 0;
  std::vector<double> t;
  std::vector<Vec> P;
  std::vector<double> speed;
  std::vector<std::vector<Branch>> branches;
};

std::pair<double, double> point_segment(const Vec& x, const Vec& a, const Vec& b) {
  Vec ab = b - a;
  double L2 = ab.squaredNorm();
  double u = L2 > 0 ? std::clamp((x - a).dot(ab) / L2, 0.0, 1.0) : 0.0;
  return {(a + u * ab - x).norm(), u};
}

struct CellHash {
  std::size_t operator()(const std::vector<long long>& k) const {
    std::size_t h = 1469598103934665603ull;
    for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
    return h;
  }
};

std::vector<long long> cell_of(const Vec& x, double eps) {
  std::vector<long long> k(x.size());
  for (int i = 0; i < x.size(); ++i) k[i] = static_cast<long long>(std::floor(x(i) / eps));
  return k;
}

Scan branch_scan(const ProjectedCurve& c, const CurveSamplingOptions& opt) {
  Scan s;
  s.N = std::max(opt.samples, 16);
  s.T = c.period();
  s.dt = s.T / s.N;
  const int N = s.N;
  for (int i = 0; i < N; ++i) {
    s.t.push_back(i * s.dt);
    s.P.push_back(c.Q(s.t.back()));
    s.speed.push_back(c.Qdot(s.t.back()).norm());
    s.vmax = std::max(s.vmax, s.speed.back());
  }
  double seg = 0.0;
  for (int i = 0; i < N; ++i) seg = std::max(seg, (s.P[(i + 1) % N] - s.P[i]).norm());
  s.eps = opt.cluster_factor * std::max(seg, 1e-300);

  std::unordered_map<std::vector<long long>, std::vector<int>, CellHash> grid;
  const int dim = c.dim();
  for (int j = 0; j < N; ++j) {
    const Vec& a = s.P[j];
    const Vec& b = s.P[(j + 1) % N];
    Vec lo = a.cwiseMin(b).array() - s.eps, hi = a.cwiseMax(b).array() + s.eps;
    auto klo = cell_of(lo, s.eps), khi = cell_of(hi, s.eps);
    std::vector<long long> k = klo;
    while (true) {
      grid[k].push_back(j);
      int d = 0;
      while (d < dim) {
        if (++k[d] <= khi[d]) break;
        k[d] = klo[d];
        ++d;
      }
      if (d == dim) break;
    }
  }

  s.branches.resize(N);
  for (int i = 0; i < N; ++i) {
    auto it = grid.find(cell_of(s.P[i], s.eps));
    std::vector<std::pair<int, std::pair<double, double>>> hits;
    if (it != grid.end())
      for (int j : it->second) {
        auto du = point_segment(s.P[i], s.P[j], s.P[(j + 1) % N]);
        if (du.first < s.eps) hits.push_back({j, du});
      }
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end(),
                           [](const auto& x, const auto& y) { return x.first == y.first; }),
               hits.end());
    // split the sorted segment indices into runs of consecutive indices
    std::vector<std::vector<int>> runs;
    for (std::size_t k = 0; k < hits.size(); ++k) {
      if (k == 0 || hits[k].first != hits[k - 1].first + 1) runs.emplace_back();
      runs.back().push_back(static_cast<int>(k));
    }
    if (runs.size() > 1 && hits.front().first == 0 && hits.back().first == N - 1) {
      runs.front().insert(runs.front().end(), runs.back().begin(), runs.back().end());
      runs.pop_back();
    }
    for (const auto& run : runs) {
      Branch b{-1, 0.0, std::numeric_limits<double>::infinity(), false};
      for (int k : run) {
        int j = hits[k].first;
        if (j == i || j == (i - 1 + N) % N) b.own = true;
        if (hits[k].second.first < b.dist) {
          b.dist = hits[k].second.first;
          b.nearest_seg = j;
          b.param = hits[k].second.second;
        }
      }
      s.branches[i].push_back(b);
    }
  }
  return s;
}

double branch_time(const Scan& s, const Branch& b) { return (b.nearest_seg + b.param) * s.dt; }

}  // namespace

std::pair<double, double> match_time(const ProjectedCurve& curve, double t, double guess) {
  Vec target = curve.Q(t);
  double sig = guess;
  double res = (curve.Q(sig) - target).norm();
  for (int it = 0; it < 50; ++it) {
    Vec r = curve.Q(sig) - target;
    Vec v = curve.Qdot(sig);
    double vv = v.squaredNorm();
    if (vv == 0.0) break;
    double step = -v.dot(r) / vv;
    sig += step;
    res = (curve.Q(sig) - target).norm();
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(sig))) break;
  }
  return {sig, res};
}

CurveAnalysis analyze_curve(const ProjectedCurve& curve, const CurveSamplingOptions& opt) {
  Scan s = branch_scan(curve, opt);
  const int N = s.N;
  CurveAnalysis a;
  a.eps = s.eps;
  a.max_speed = s.vmax;
  a.sample_times = s.t;
  for (const auto& b : s.branches) a.branch_count.push_back(static_cast<int>(b.size()));

  // degenerate times: polish sampled speed minima as roots of Qdot . Qddot
  auto dspeed = [&](double t) { return curve.Qdot(t).dot(curve.Qddot(t)); };
  for (int i = 0; i < N; ++i) {
    double prev = s.speed[(i - 1 + N) % N], next = s.speed[(i + 1) % N];
    if (!(s.speed[i] <= prev && s.speed[i] < next)) continue;
    if (s.speed[i] > 0.2 * s.vmax) continue;
    double lo = s.t[i] - s.dt, hi = s.t[i] + s.dt, nu = s.t[i];
    if (dspeed(lo) < 0 && dspeed(hi) > 0) nu = bracket_root(dspeed, lo, hi, 1e-15);
    double v = curve.Qdot(nu).norm();
    nu = wrap_time(nu, s.T);
    if (v <= opt.degenerate_tol * s.vmax) {
      bool dup = false;
      for (double d : a.degenerate_times) dup |= std::abs(circle_diff(d, nu, s.T)) < s.dt;
      if (!dup) a.degenerate_times.push_back(nu);
    } else if (v <= opt.near_degenerate * s.vmax) {
      a.ambiguous_minima.push_back(nu);
      a.diagnostics.push_back("speed minimum " + std::to_string(v / s.vmax) +
                              " of max speed at t = " + std::to_string(nu) +
                              " is below the resolution limit");
    }
  }
  std::sort(a.degenerate_times.begin(), a.degenerate_times.end());

  // samples within reach of a degenerate time are excluded from neat/revisit bookkeeping
  std::vector<bool> near_deg(N, false);
  for (double nu : a.degenerate_times) {
    double reach = 0.0;
    for (int i = 0; i < N; ++i)
      if (std::abs(circle_diff(s.t[i], nu, s.T)) < 0.5 * s.T &&
          (s.P[i] - curve.Q(nu)).norm() < 3.0 * s.eps)
        reach = std::max(reach, std::abs(circle_diff(s.t[i], nu, s.T)));
    for (int i = 0; i < N; ++i)
      if (std::abs(circle_diff(s.t[i], nu, s.T)) <= reach + s.dt) near_deg[i] = true;
  }

  int usable = 0, revisited = 0;
  for (int i = 0; i < N; ++i) {
    if (near_deg[i]) continue;
    ++usable;
    if (a.branch_count[i] >= 2) ++revisited;
  }
  a.revisited_fraction = usable ? static_cast<double>(revisited) / usable : 1.0;

  // longest cyclic run of clear samples
  int best_len = 0, best_start = -1;
  {
    std::vector<bool> clear(N);
    for (int i = 0; i < N; ++i) clear[i] = !near_deg[i] && a.branch_count[i] == 1;
    int start = -1;
    for (int k = 0; k < 2 * N; ++k) {
      int i = k % N;
      if (clear[i]) {
        if (start < 0) start = k;
        int len = std::min(k - start + 1, N);
        if (len > best_len) {
          best_len = len;
          best_start = start % N;
        }
      } else {
        start = -1;
      }
    }
  }
  if (best_len >= opt.min_neat_run) {
    a.neat_certified = true;
    a.neat_begin = s.t[best_start];
    a.neat_end = s.t[best_start] + (best_len - 1) * s.dt;
  }

  // isolated crossings: one Newton attempt per contiguous region of revisited samples
  std::vector<bool> done(N, false);
  for (int i0 = 0; i0 < N; ++i0) {
    if (done[i0] || a.branch_count[i0] < 2 || near_deg[i0]) continue;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    const Branch* partner = nullptr;
    for (int i = i0; i < N && a.branch_count[i] >= 2 && !near_deg[i]; ++i) {
      done[i] = true;
      for (const auto& b : s.branches[i])
        if (!b.own && b.dist < best_d) {
          best_d = b.dist;
          best = i;
          partner = &b;
        }
    }
    if (best < 0 || partner == nullptr) continue;
    double u = s.t[best], v = branch_time(s, *partner);
    Vec F;
    bool singular = false;
    for (int it = 0; it < 40; ++it) {
      F = curve.Q(u) - curve.Q(v);
      Mat J(curve.dim(), 2);
      J.col(0) = curve.Qdot(u);
      J.col(1) = -curve.Qdot(v);
      Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sv = svd.singularValues();
      if (sv(1) < 1e-6 * sv(0)) {
        singular = true;
        break;
      }
      Vec step = svd.solve(-F);
      u += step(0);
      v += step(1);
      if (step.norm() < 1e-15 * s.T) break;
    }
    F = curve.Q(u) - curve.Q(v);
    if (singular || F.norm() > 1e-10 * std::max(1.0, curve.Q(u).norm())) continue;
    u = wrap_time(u, s.T);
    v = wrap_time(v, s.T);
    if (std::abs(circle_diff(u, v, s.T)) < 2.0 * s.dt) continue;
    Vec du = curve.Qdot(u), dv = curve.Qdot(v);
    double c = std::abs(du.dot(dv)) / (du.norm() * dv.norm());
    double angle = std::acos(std::min(1.0, c));
    if (angle < 1e-4) continue;
    SelfIntersection x{std::min(u, v), std::max(u, v), curve.Q(u), angle, F.norm()};
    bool dup = false;
    for (const auto& y : a.crossings)
      dup |= std::abs(y.s - x.s) < 1e-6 && std::abs(y.sigma - x.sigma) < 1e-6;
    if (!dup) a.crossings.push_back(x);
  }
  std::sort(a.crossings.begin(), a.crossings.end(),
            [](const auto& x, const auto& y) { return x.s < y.s; });
  return a;
}

MultipleIntersections count_multiple_intersections(const ProjectedCurve& curve,
                                                   const CurveSamplingOptions& opt) {
  Scan s = branch_scan(curve, opt);
  CurveAnalysis a = analyze_curve(curve, opt);
  MultipleIntersections out;
  out.double_points = static_cast<int>(a.crossings.size());
  std::vector<Vec> candidates;
  std::vector<std::vector<double>> guesses;
  for (int i = 0; i < s.N; ++i) {
    if (s.branches[i].size() < 3) continue;
    bool seen = false;
    for (const auto& c : candidates) seen |= (c - s.P[i]).norm() < 4.0 * s.eps;
    if (seen) continue;
    candidates.push_back(s.P[i]);
    std::vector<double> g;
    for (const auto& b : s.branches[i]) g.push_back(b.own ? s.t[i] : branch_time(s, b));
    guesses.push_back(g);
  }
  int unconfirmed = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    std::vector<double> tt = guesses[c];
    const int m = static_cast<int>(tt.size());
    const int dim = curve.dim();
    double res = 0.0;
    for (int it = 0; it < 50; ++it) {
      Vec F((m - 1) * dim);
      Mat J = Mat::Zero((m - 1) * dim, m);
      for (int k = 1; k < m; ++k) {
        F.segment((k - 1) * dim, dim) = curve.Q(tt[0]) - curve.Q(tt[k]);
        J.block((k - 1) * dim, 0, dim, 1) = curve.Qdot(tt[0]);
        J.block((k - 1) * dim, k, dim, 1) = -curve.Qdot(tt[k]);
      }
      res = F.norm();
      Vec step = J.colPivHouseholderQr().solve(-F);
      for (int k = 0; k < m; ++k) tt[k] += step(k);
      if (step.norm() < 1e-15 * s.T) break;
    }
    double final_res = 0.0;
    for (int k = 1; k < m; ++k) final_res = std::max(final_res, (curve.Q(tt[0]) - curve.Q(tt[k])).norm());
    bool distinct = true;
    for (int k = 0; k < m; ++k)
      for (int l = k + 1; l < m; ++l)
        distinct &= std::abs(circle_diff(tt[k], tt[l], s.T)) > 2.0 * s.dt;
    (void)res;
    if (final_res <= 1e-8 && distinct) {
      bool dup = false;
      for (const auto& p : out.points) dup |= (p - curve.Q(tt[0])).norm() < 1e-6;
      if (!dup) out.points.push_back(curve.Q(tt[0]));
    } else {
      ++unconfirmed;
    }
  }
  out.count = static_cast<int>(out.points.size());
  if (unconfirmed > 0) {
    out.inconclusive = true;
    out.message = std::to_string(unconfirmed) +
                  " candidate(s) near three branches could not be confirmed; count is a lower bound";
  }
  return out;
}

}  // namespace libra
