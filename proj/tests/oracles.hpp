#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the grid operators.

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;

// Composite 5-point Gauss-Legendre on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 2000) {
  static const std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                       0.9061798459386640};
  static const std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                       0.2369268850561891, 0.2369268850561891};
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double m = a + (p + 0.5) * h;
    for (int k = 0; k < 5; ++k) s += w[k] * f(m + 0.5 * h * x[k]);
  }
  return 0.5 * h * s;
}

// int over r0 <= |x| <= r1 in R^4 of a radial function: 2 pi^2 int g(r) r^3 dr.
inline double radial(const std::function<double(double)>& g, double r0, double r1, int panels = 4000) {
  return 2.0 * pi * pi * integrate([&](double r) { return g(r) * r * r * r; }, r0, r1, panels);
}

// Least-squares slope of log(err) against log(h).
template <std::size_t N>
double order(const std::array<double, N>& h, const std::array<double, N>& err) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < N; ++i) {
    mx += std::log(h[i]);
    my += std::log(err[i]);
  }
  mx /= N;
  my /= N;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < N; ++i) {
    sxy += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
    sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace oracle
