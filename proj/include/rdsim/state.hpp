#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rdsim {

using Complex = std::complex<double>;
using StateVector = std::vector<Complex>;

// <a|b>, conjugating the left argument.
Complex inner(std::span<const Complex> a, std::span<const Complex> b);
double norm(std::span<const Complex> a);
// Scales to unit norm and returns the previous norm.
double normalize(std::span<Complex> a);

// |<a|b>|^2 for unit vectors; both are normalised internally.
double fidelity(std::span<const Complex> a, std::span<const Complex> b);

StateVector to_complex(std::span<const double> v);

}  // namespace rdsim
