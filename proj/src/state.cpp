#include "rdsim/state.hpp"

#include <cmath>

#include "rdsim/errors.hpp"

namespace rdsim {

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw ShapeError("inner product of vectors with different lengths");
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double norm(std::span<const Complex> a) {
  double s = 0.0;
  for (const auto& z : a) s += std::norm(z);
  return std::sqrt(s);
}

double normalize(std::span<Complex> a) {
  const double n = norm(a);
  if (n == 0.0) throw DomainError("cannot normalise the zero vector");
  const double inv = 1.0 / n;
  for (auto& z : a) z *= inv;
  return n;
}

double fidelity(std::span<const Complex> a, std::span<const Complex> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw DomainError("fidelity with a zero vector");
  return std::norm(inner(a, b)) / (na * na * nb * nb);
}

StateVector to_complex(std::span<const double> v) {
  return StateVector(v.begin(), v.end());
}

}  // namespace rdsim
