#pragma once

#include <array>
#include <cmath>

namespace cgf {

// First-order forward-mode number with up to four partials.
struct Jet {
  double v = 0.0;
  std::array<double, 4> d{};

  Jet() = default;
  Jet(double x) : v(x) {}
  Jet(double x, int i) : v(x) { d[i] = 1.0; }

  Jet& operator+=(const Jet& o) { v += o.v; for (int i = 0; i < 4; ++i) d[i] += o.d[i]; return *this; }
  Jet& operator-=(const Jet& o) { v -= o.v; for (int i = 0; i < 4; ++i) d[i] -= o.d[i]; return *this; }
  Jet& operator*=(const Jet& o) {
    for (int i = 0; i < 4; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    const double inv = 1.0 / o.v;
    for (int i = 0; i < 4; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
    v *= inv;
    return *this;
  }
};

inline Jet chain(const Jet& a, double val, double deriv) {
  Jet r(val);
  for (int i = 0; i < 4; ++i) r.d[i] = deriv * a.d[i];
  return r;
}

inline Jet operator-(const Jet& a) { return chain(a, -a.v, -1.0); }
inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator+(Jet a, double b) { a.v += b; return a; }
inline Jet operator+(double b, Jet a) { a.v += b; return a; }
inline Jet operator-(Jet a, double b) { a.v -= b; return a; }
inline Jet operator-(double b, const Jet& a) { return chain(a, b - a.v, -1.0); }
inline Jet operator*(Jet a, double b) { a.v *= b; for (auto& x : a.d) x *= b; return a; }
inline Jet operator*(double b, Jet a) { return a * b; }
inline Jet operator/(Jet a, double b) { return a * (1.0 / b); }
inline Jet operator/(double b, const Jet& a) { return chain(a, b / a.v, -b / (a.v * a.v)); }

inline Jet sin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v)); }
inline Jet cos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v)); }
inline Jet sqrt(const Jet& a) { const double s = std::sqrt(a.v); return chain(a, s, 0.5 / s); }
inline Jet pow(const Jet& a, double p) { return chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0)); }

inline double value(double x) { return x; }
inline double value(const Jet& x) { return x.v; }

}  // namespace cgf
