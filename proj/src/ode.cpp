#include "libra/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace libra {

namespace {

// Dormand-Prince 8(5,3) tableau with a 6th-order continuous extension.
constexpr double c2 = 0.05260015195876773187856;
constexpr double c3 = 0.07890022793815159781784;
constexpr double c4 = 0.11835034190722739672676;
constexpr double c5 = 0.28164965809277260327324;
constexpr double c6 = 0.33333333333333333333333;
constexpr double c7 = 0.25000000000000000000000;
constexpr double c8 = 0.30769230769230769230769;
constexpr double c9 = 0.65128205128205128205128;
constexpr double c10 = 0.60000000000000000000000;
constexpr double c11 = 0.85714285714285714285714;
constexpr double b1 = 0.05429373411656876223805;
constexpr double b6 = 4.45031289275240888144114;
constexpr double b7 = 1.89151789931450038304282;
constexpr double b8 = -5.80120396001058478146721;
constexpr double b9 = 0.31116436695781989440892;
constexpr double b10 = -0.15216094966251607855618;
constexpr double b11 = 0.20136540080403034837478;
constexpr double b12 = 0.04471061572777259051769;
constexpr double bhh1 = 0.24409448818897637795276;
constexpr double bhh2 = 0.73384668828161185734136;
constexpr double bhh3 = 0.02205882352941176470588;
constexpr double er1 = 0.01312004499419488073250;
constexpr double er6 = -1.22515644637620444072057;
constexpr double er7 = -0.49575894965725019152141;
constexpr double er8 = 1.66437718245498653696153;
constexpr double er9 = -0.35032884874997368168865;
constexpr double er10 = 0.33417911871301747902973;
constexpr double er11 = 0.08192320648511571246571;
constexpr double er12 = -0.02235530786388629525884;
constexpr double a21 = 0.05260015195876773187856;
constexpr double a31 = 0.01972505698453789945446;
constexpr double a32 = 0.05917517095361369836338;
constexpr double a41 = 0.02958758547680684918169;
constexpr double a43 = 0.08876275643042054754507;
constexpr double a51 = 0.24136513415926668550237;
constexpr double a53 = -0.88454947932828608534486;
constexpr double a54 = 0.92483400326179200311574;
constexpr double a61 = 0.03703703703703703703704;
constexpr double a64 = 0.17082860872947387127960;
constexpr double a65 = 0.12546768756682242501669;
constexpr double a71 = 0.03710937500000000000000;
constexpr double a74 = 0.17025221101954403931498;
constexpr double a75 = 0.06021653898045596068502;
constexpr double a76 = -0.01757812500000000000000;
constexpr double a81 = 0.03709200011850479271088;
constexpr double a84 = 0.17038392571223999381021;
constexpr double a85 = 0.10726203044637328465181;
constexpr double a86 = -0.01531943774862440175279;
constexpr double a87 = 0.00827378916381402288758;
constexpr double a91 = 0.62411095871607571711443;
constexpr double a94 = -3.36089262944694129406857;
constexpr double a95 = -0.86821934684172600681819;
constexpr double a96 = 27.5920996994467083049416;
constexpr double a97 = 20.1540675504778934086187;
constexpr double a98 = -43.4898841810699588477366;
constexpr double a101 = 0.47766253643826436589043;
constexpr double a104 = -2.48811461997166764192642;
constexpr double a105 = -0.59029082683684299637145;
constexpr double a106 = 21.2300514481811942347289;
constexpr double a107 = 15.2792336328824235832597;
constexpr double a108 = -33.2882109689848629194453;
constexpr double a109 = -0.02033120170850862613582;
constexpr double a111 = -0.93714243008598732571704;
constexpr double a114 = 5.18637242884406370830024;
constexpr double a115 = 1.09143734899672957818500;
constexpr double a116 = -8.14978701074692612513997;
constexpr double a117 = -18.5200656599969598641566;
constexpr double a118 = 22.7394870993505042818970;
constexpr double a119 = 2.49360555267965238987089;
constexpr double a1110 = -3.04676447189821950038237;
constexpr double a121 = 2.27331014751653820792360;
constexpr double a124 = -10.5344954667372501984067;
constexpr double a125 = -2.00087205822486249909676;
constexpr double a126 = -17.9589318631187989172766;
constexpr double a127 = 27.9488845294199600508500;
constexpr double a128 = -2.85899827713502369474066;
constexpr double a129 = -8.87285693353062954433549;
constexpr double a1210 = 12.3605671757943030647266;
constexpr double a1211 = 0.64339274601576353035597;
constexpr double d41 = -5.40685903845352664250302;
constexpr double d46 = 367.268892700041893590281;
constexpr double d47 = 154.609958204083905482676;
constexpr double d48 = -505.920283865412564024766;
constexpr double d49 = 15.5975154819608130688200;
constexpr double d410 = -26.1936204184402805956691;
constexpr double d411 = -0.74003512364122230844721;
constexpr double d412 = 1.11776539319431476294221;
constexpr double d413 = -0.33333333333333333333333;
constexpr double d51 = 6.51987095363079615048119;
constexpr double d56 = -1066.34956011730205278592;
constexpr double d57 = -351.864047514639508625601;
constexpr double d58 = 1363.51955696662884408368;
constexpr double d59 = -112.727669432657582669864;
constexpr double d510 = 159.796191868560289612921;
constexpr double d511 = -2.13865100308788816220259;
constexpr double d512 = -3.75569172113289760348584;
constexpr double d513 = 7.00000000000000000000000;
constexpr double d61 = 10.4698004763293477204238;
constexpr double d66 = -1380.01473607038123167155;
constexpr double d67 = -531.219827862514074379012;
constexpr double d68 = 1866.98964341870892451324;
constexpr double d69 = -53.3302605020547902574560;
constexpr double d610 = 82.4147560258671369782481;
constexpr double d611 = 7.38443654502992069572676;
constexpr double d612 = 0.41729908012587751149843;
constexpr double d613 = -3.11111111111111111111111;
constexpr double d71 = -16.6338582677165354330709;
constexpr double d76 = 4516.16568914956011730205;
constexpr double d77 = 1393.85185384057776465219;
constexpr double d78 = -5687.52042419481539670071;
constexpr double d79 = 473.965563750151263163661;
constexpr double d710 = -661.810776942355889724311;
constexpr double d711 = -18.0180473354013232598119;
constexpr double d712 = 0;
constexpr double d713 = 0;

double error_norm(const Vec& y0, const Vec& y1, const Vec& e5, const Vec& e3,
                  double h, const OdeOptions& opt) {
  double err = 0.0, err2 = 0.0;
  const long n = y0.size();
  for (long i = 0; i < n; ++i) {
    double sk = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double a = e3[i] / sk, b = e5[i] / sk;
    err2 += a * a;
    err += b * b;
  }
  double deno = err + 0.01 * err2;
  if (deno <= 0.0) deno = 1.0;
  return std::abs(h) * err / std::sqrt(deno * static_cast<double>(n));
}

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace

DenseSolution::DenseSolution(double t0, Vec y0) {
  t_.push_back(t0);
  y_.push_back(std::move(y0));
}

void DenseSolution::append(double h, const Vec& y_new, Mat rcont) {
  h_.push_back(h);
  t_.push_back(t_.back() + h);
  y_.push_back(y_new);
  rcont_.push_back(std::move(rcont));
}

std::size_t DenseSolution::locate(double t) const {
  const bool fwd = t_.back() >= t_.front();
  // binary search on the monotone node list
  std::size_t lo = 0, hi = h_.size();
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    bool right = fwd ? (t >= t_[mid]) : (t <= t_[mid]);
    if (right)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

Vec DenseSolution::operator()(double t) const {
  if (h_.empty()) return y_.front();
  const double lo = std::min(t_.front(), t_.back());
  const double hi = std::max(t_.front(), t_.back());
  const double slack = 1e-12 * std::max(1.0, hi - lo);
  if (t < lo - slack || t > hi + slack)
    throw InputError("dense output queried outside [" + std::to_string(lo) +
                     ", " + std::to_string(hi) + "] at t = " + std::to_string(t));
  std::size_t k = locate(t);
  const Mat& r = rcont_[k];
  double s = (t - t_[k]) / h_[k];
  double s1 = 1.0 - s;
  return r.col(0) +
         s * (r.col(1) +
              s1 * (r.col(2) +
                    s * (r.col(3) +
                         s1 * (r.col(4) +
                               s * (r.col(5) + s1 * (r.col(6) + s * r.col(7)))))));
}

DenseSolution integrate(const OdeRhs& rhs, double t0, const Vec& y0, double t1,
                        const OdeOptions& opt, const std::vector<double>& stops) {
  if (!all_finite(y0)) throw BlowUpError("non-finite initial state", t0);
  DenseSolution sol(t0, y0);
  if (t1 == t0) return sol;

  const long n = y0.size();
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double h_max = opt.h_max > 0 ? opt.h_max : span;
  const double h_min = opt.min_step_ratio * span;

  std::vector<double> targets;
  for (double s : stops)
    if ((s - t0) * dir > 0 && (t1 - s) * dir > 0) targets.push_back(s);
  std::sort(targets.begin(), targets.end(),
            [dir](double a, double b) { return a * dir < b * dir; });
  targets.push_back(t1);
  std::size_t next_target = 0;

  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), k8(n), k9(n), k10(n),
      k11(n), k12(n), k13(n), yt(n);
  double t = t0;
  Vec y = y0;
  rhs(t, y, k1);
  if (!all_finite(k1)) throw BlowUpError("non-finite vector field", t);

  double h = std::abs(opt.h_init);
  if (h == 0.0) {
    // Hairer's starting-step heuristic for order 8
    Vec sk = (opt.atol + opt.rtol * y.array().abs()).matrix();
    double dnf = (k1.array() / sk.array()).matrix().squaredNorm() / n;
    double dny = (y.array() / sk.array()).matrix().squaredNorm() / n;
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, h_max);
    yt = y + dir * h * k1;
    rhs(t + dir * h, yt, k2);
    double der2 = (((k2 - k1).array() / sk.array()).matrix().norm()) / std::sqrt(double(n)) / h;
    double der12 = std::max(der2, std::sqrt(dnf));
    double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 8);
    h = std::min({100 * h, h1, h_max});
  }

  const double safe = 0.9, fac1 = 0.333, fac2 = 6.0;
  long steps = 0;
  bool reject_prev = false;
  while (true) {
    double target = targets[next_target];
    double remaining = (target - t) * dir;
    bool hits = false;
    if (h >= remaining * (1.0 - 1e-13)) {
      h = remaining;
      hits = true;
    }
    if (++steps > opt.max_steps)
      throw BlowUpError("maximum number of steps exceeded", t);
    if (h < h_min && !hits)
      throw BlowUpError("step size collapsed at t = " + std::to_string(t), t);

    const double hs = dir * h;
    yt = y + hs * a21 * k1;
    rhs(t + c2 * hs, yt, k2);
    yt = y + hs * (a31 * k1 + a32 * k2);
    rhs(t + c3 * hs, yt, k3);
    yt = y + hs * (a41 * k1 + a43 * k3);
    rhs(t + c4 * hs, yt, k4);
    yt = y + hs * (a51 * k1 + a53 * k3 + a54 * k4);
    rhs(t + c5 * hs, yt, k5);
    yt = y + hs * (a61 * k1 + a64 * k4 + a65 * k5);
    rhs(t + c6 * hs, yt, k6);
    yt = y + hs * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t + c7 * hs, yt, k7);
    yt = y + hs * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7);
    rhs(t + c8 * hs, yt, k8);
    yt = y + hs * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8);
    rhs(t + c9 * hs, yt, k9);
    yt = y + hs * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 +
                   a108 * k8 + a109 * k9);
    rhs(t + c10 * hs, yt, k10);
    yt = y + hs * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 +
                   a118 * k8 + a119 * k9 + a1110 * k10);
    rhs(t + c11 * hs, yt, k11);
    yt = y + hs * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 +
                   a128 * k8 + a129 * k9 + a1210 * k10 + a1211 * k11);
    rhs(t + hs, yt, k12);
    Vec incr = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 +
               b11 * k11 + b12 * k12;
    Vec y_new = y + hs * incr;

    bool finite = all_finite(y_new);
    double err = 1e10;
    if (finite) {
      Vec e3 = incr - bhh1 * k1 - bhh2 * k9 - bhh3 * k12;
      Vec e5 = er1 * k1 + er6 * k6 + er7 * k7 + er8 * k8 + er9 * k9 +
               er10 * k10 + er11 * k11 + er12 * k12;
      err = error_norm(y, y_new, e5, e3, hs, opt);
      if (!std::isfinite(err)) err = 1e10;
    }
    double fac = std::pow(err, 1.0 / 8);
    fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));

    if (err <= 1.0) {
      rhs(t + hs, y_new, k13);
      if (!all_finite(k13))
        throw BlowUpError("non-finite vector field at t = " + std::to_string(t + hs), t);
      Mat rc(n, 8);
      Vec ydiff = y_new - y;
      Vec bspl = hs * k1 - ydiff;
      rc.col(0) = y;
      rc.col(1) = ydiff;
      rc.col(2) = bspl;
      rc.col(3) = ydiff - hs * k13 - bspl;
      rc.col(4) = hs * (d41 * k1 + d46 * k6 + d47 * k7 + d48 * k8 + d49 * k9 +
                        d410 * k10 + d411 * k11 + d412 * k12 + d413 * k13);
      rc.col(5) = hs * (d51 * k1 + d56 * k6 + d57 * k7 + d58 * k8 + d59 * k9 +
                        d510 * k10 + d511 * k11 + d512 * k12 + d513 * k13);
      rc.col(6) = hs * (d61 * k1 + d66 * k6 + d67 * k7 + d68 * k8 + d69 * k9 +
                        d610 * k10 + d611 * k11 + d612 * k12 + d613 * k13);
      rc.col(7) = hs * (d71 * k1 + d76 * k6 + d77 * k7 + d78 * k8 + d79 * k9 +
                        d710 * k10 + d711 * k11 + d712 * k12 + d713 * k13);
      double t_new = hits ? target : t + hs;
      sol.append(t_new - t, y_new, std::move(rc));
      t = t_new;
      y = y_new;
      k1 = k13;
      if (hits) {
        if (++next_target == targets.size()) break;
      }
      double h_new = h / fac;
      if (reject_prev) h_new = std::min(h_new, h);
      h = std::min(h_new, h_max);
      reject_prev = false;
    } else {
      h /= std::min(1.0 / fac1, fac / safe);
      reject_prev = true;
    }
  }
  return sol;
}

}  // namespace libra
