#pragma once

// Closed-form references used by the tests, independent of the MNA solver.

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>

namespace oracle {

using cd = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double series_r(double zeta, double l, double c) { return 2.0 * zeta * std::sqrt(l / c); }
inline double natural_hz(double l, double c) { return 1.0 / (kTwoPi * std::sqrt(l * c)); }

// Series R-L-C loop presented at node x through a unity transimpedance
// stage: Z(x) = 1 / (s^2 LC + s RC + 1).
inline std::string series_rlc(double zeta, double l = 1e-3, double c = 1e-6) {
  return "series rlc zeta " + num(zeta) +
         "\n"
         "Vsense x m 0\n"
         "E1 m 0 d 0 1\n"
         "F1 0 c Vsense 1\n"
         "Rt c 0 1\n"
         "E2 e 0 c 0 1\n"
         "R1 e a " + num(series_r(zeta, l, c)) + "\nL1 a d " + num(l) + "\nC1 d 0 " + num(c) + "\n.end\n";
}

inline cd series_rlc_z(double f, double zeta, double l = 1e-3, double c = 1e-6) {
  const cd s(0.0, kTwoPi * f);
  return 1.0 / (s * s * l * c + s * series_r(zeta, l, c) * c + 1.0);
}

// Passive form: C from top to ground in parallel with R + L to ground.
inline std::string passive_rlc(double r, double l, double c) {
  return "passive rlc\nC1 top 0 " + num(c) + "\nR1 top mid " + num(r) + "\nL1 mid 0 " + num(l) + "\n.end\n";
}

inline cd passive_rlc_z(double f, double r, double l, double c) {
  const cd s(0.0, kTwoPi * f);
  const cd zrl = r + s * l;
  return zrl / (1.0 + s * c * zrl);
}

inline std::string single_pole(double r = 1e3, double c = 1e-6) {
  return "single real pole\nR1 n 0 " + num(r) + "\nC1 n 0 " + num(c) + "\n.end\n";
}

// Buffered RC-RC chain behind the same transimpedance stage:
// Z(x) = 1 / (1 + s tau)^2.
inline std::string double_pole(double r = 1e3, double c = 1e-6) {
  return "double real pole\n"
         "Vsense x m 0\n"
         "E1 m 0 a2 0 1\n"
         "F1 0 c Vsense 1\n"
         "Rt c 0 1\n"
         "E2 e 0 c 0 1\n"
         "R1 e a1 " + num(r) + "\nC1 a1 0 " + num(c) + "\nE3 b1 0 a1 0 1\nR2 b1 a2 " + num(r) + "\nC2 a2 0 " +
         num(c) + "\n.end\n";
}

// Series R-L-C trap shunting a resistive load: complex zero pair.
inline std::string trap(double zeta_z, double load = 1e4, double l = 1e-3, double c = 1e-6) {
  return "trap\nRload x 0 " + num(load) + "\nRt x a " + num(series_r(zeta_z, l, c)) + "\nLt a b " + num(l) +
         "\nCt b 0 " + num(c) + "\n.end\n";
}

inline cd trap_z(double f, double zeta_z, double load = 1e4, double l = 1e-3, double c = 1e-6) {
  const cd s(0.0, kTwoPi * f);
  const cd zs = series_r(zeta_z, l, c) + s * l + 1.0 / (s * c);
  return load * zs / (load + zs);
}

// Parallel tank (L, C, Rp) at node t with a resistive tap t-Rs-u-Ru-0.
struct Tank {
  double fn, zeta, c, rs;
  double l() const { return 1.0 / (std::pow(kTwoPi * fn, 2) * c); }
  double z0() const { return std::sqrt(l() / c); }
  double ru() const { return 5.0 * z0() - rs; }
  double rp() const { return 1.0 / (2.0 * zeta / z0() - 1.0 / (rs + ru())); }
};

inline std::string tank_block(const Tank& t, const std::string& tag) {
  const std::string tn = "t" + tag, un = "u" + tag;
  return "L" + tag + " " + tn + " 0 " + num(t.l()) + "\nC" + tag + " " + tn + " 0 " + num(t.c) + "\nRp" + tag +
         " " + tn + " 0 " + num(t.rp()) + "\nRs" + tag + " " + tn + " " + un + " " + num(t.rs) + "\nRu" + tag +
         " " + un + " 0 " + num(t.ru()) + "\n";
}

inline const Tank kTankA{5e3, 0.2, 1e-6, 10.0};
inline const Tank kTankB{500e3, 0.4, 1e-9, 100.0};

inline std::string two_tanks() {
  return "two isolated resonators\n" + tank_block(kTankA, "a") + tank_block(kTankB, "b") + ".end\n";
}

// d^2 ln|T| / d(ln w)^2 for |T| = 1/|1 - u^2 + 2 j zeta u|, u = w/wn.
inline double second_order_p(double u, double zeta) {
  const double y = u * u;
  const double d = (1 - y) * (1 - y) + 4 * zeta * zeta * y;
  const double dp = 2 * y - 2 + 4 * zeta * zeta;
  return -2 * y * ((dp + 2 * y) / d - y * dp * dp / (d * d));
}

inline double second_order_mag(double u, double zeta) { return 1.0 / std::abs(cd(1 - u * u, 2 * zeta * u)); }

// Real-pole shapes, u = (w/wp)^2.
inline double single_pole_p(double u) { return -2 * u / ((1 + u) * (1 + u)); }
inline double double_pole_p(double u) { return -4 * u / ((1 + u) * (1 + u)); }

// Second derivative of ln|f| in ln(w) by a fine central difference.
template <class F>
double numeric_p(F mag_of_w, double w, double h = 1e-4) {
  const double lp = std::log(mag_of_w(w * std::exp(h)));
  const double l0 = std::log(mag_of_w(w));
  const double lm = std::log(mag_of_w(w * std::exp(-h)));
  return (lp - 2 * l0 + lm) / (h * h);
}

// Location of the minimum of a function of ln(w) by golden-section search.
template <class F>
double argmin_log(F f, double w_lo, double w_hi, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double a = std::log(w_lo), b = std::log(w_hi);
  for (int i = 0; i < iters; ++i) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(std::exp(c)) < f(std::exp(d))) b = d;
    else a = c;
  }
  return std::exp((a + b) / 2);
}

}  // namespace oracle
