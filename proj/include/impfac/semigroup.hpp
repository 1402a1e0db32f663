#pragma once

#include <variant>

#include "impfac/core.hpp"

namespace impfac {

// Spectral-diagonal evolution family: S(t) scales coordinate n by
// exp(-decay_rates[n] * t). Self-adjoint; rates may be negative (growth).
struct SpectralSemigroup {
    Vec decay_rates;
};

// Dense-generator family: S(t) = exp(t * generator).
struct DenseSemigroup {
    Mat generator;
};

using Semigroup = std::variant<SpectralSemigroup, DenseSemigroup>;

std::size_t dimension(const Semigroup& S);

// Times in [-1e-12, 0) are clamped to 0 (quadrature node rounding);
// anything below throws NegativeTime.
Vec apply(const Semigroup& S, double t, const Vec& v);
Vec apply_adjoint(const Semigroup& S, double t, const Vec& v);
Mat operator_matrix(const Semigroup& S, double t);
Mat operator_matrix_adjoint(const Semigroup& S, double t);

bool is_spectral(const Semigroup& S);

// Scaling-and-squaring with the degree-13 Pade approximant.
Mat expm(const Mat& A);

}  // namespace impfac
