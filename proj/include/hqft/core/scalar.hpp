#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hqft {

/// Exact rational; gmpxx keeps results canonical (reduced, positive denominator).
using Scalar = mpq_class;

inline Scalar parse_scalar(const std::string& text) {
  Scalar q;
  if (q.set_str(text, 10) != 0) throw std::invalid_argument("bad rational: " + text);
  q.canonicalize();
  return q;
}

inline std::string to_string(const Scalar& q) { return q.get_str(); }

inline bool is_zero(const Scalar& q) { return sgn(q) == 0; }

/// Gaussian rational re + i*im.
struct Gaussian {
  Scalar re;
  Scalar im;

  Gaussian() = default;
  Gaussian(const Scalar& r) : re(r) {}  // NOLINT(google-explicit-constructor)
  Gaussian(const Scalar& r, const Scalar& i) : re(r), im(i) {}
  Gaussian(long r) : re(r) {}  // NOLINT(google-explicit-constructor)

  static Gaussian imag_unit() { return {Scalar(0), Scalar(1)}; }

  Gaussian conj() const { return {re, -im}; }

  Gaussian& operator+=(const Gaussian& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Gaussian& operator-=(const Gaussian& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Gaussian& operator*=(const Gaussian& o) {
    Scalar r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = r;
    return *this;
  }
  Gaussian& operator/=(const Gaussian& o) {
    Scalar n = o.re * o.re + o.im * o.im;
    if (sgn(n) == 0) throw std::domain_error("division by zero");
    Scalar r = (re * o.re + im * o.im) / n;
    im = (im * o.re - re * o.im) / n;
    re = r;
    return *this;
  }
  friend Gaussian operator+(Gaussian a, const Gaussian& b) { return a += b; }
  friend Gaussian operator-(Gaussian a, const Gaussian& b) { return a -= b; }
  friend Gaussian operator*(Gaussian a, const Gaussian& b) { return a *= b; }
  friend Gaussian operator/(Gaussian a, const Gaussian& b) { return a /= b; }
  friend Gaussian operator-(const Gaussian& a) { return {-a.re, -a.im}; }
  friend bool operator==(const Gaussian& a, const Gaussian& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const Gaussian& a, const Gaussian& b) { return !(a == b); }
};

inline bool is_zero(const Gaussian& z) { return sgn(z.re) == 0 && sgn(z.im) == 0; }

inline std::string to_string(const Gaussian& z) {
  if (sgn(z.im) == 0) return z.re.get_str();
  if (sgn(z.re) == 0) return z.im.get_str() + "i";
  std::string im = z.im.get_str();
  return "(" + z.re.get_str() + (sgn(z.im) > 0 ? "+" : "") + im + "i)";
}

inline std::ostream& operator<<(std::ostream& os, const Gaussian& z) { return os << to_string(z); }

/// (-1)^n for any integer n.
inline int koszul(long long n) { return (n % 2 == 0) ? 1 : -1; }

}  // namespace hqft
