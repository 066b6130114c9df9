#pragma once

// double and long double overloads matching the jdan::ad::Var vocabulary, so templated model
// code can run on plain values or on the tape with the same source.

#include <cmath>
#include <span>

#include "jdan/activation.hpp"
#include "jdan/error.hpp"

namespace jdan {

inline double value_of(double x) noexcept { return x; }

inline double affine(std::span<const double> w, std::span<const double> x, double bias)
{
    if (w.size() != x.size()) {
        throw ContractError("affine: size mismatch");
    }
    double acc = bias;
    for (std::size_t j = 0; j < w.size(); ++j) {
        acc += w[j] * x[j];
    }
    return acc;
}

inline double dot(std::span<const double> w, std::span<const double> x) { return affine(w, x, 0.0); }

inline double product(std::span<const double> factors)
{
    double p = 1.0;
    for (double f : factors)
        p *= f;
    return p;
}

inline long double value_of(long double x) noexcept { return x; }

inline long double affine(std::span<const long double> w, std::span<const long double> x, long double bias)
{
    if (w.size() != x.size()) {
        throw ContractError("affine: size mismatch");
    }
    long double acc = bias;
    for (std::size_t j = 0; j < w.size(); ++j) {
        acc += w[j] * x[j];
    }
    return acc;
}

inline long double dot(std::span<const long double> w, std::span<const long double> x) { return affine(w, x, 0.0L); }

inline long double product(std::span<const long double> factors)
{
    long double p = 1.0L;
    for (long double f : factors)
        p *= f;
    return p;
}

//! Effective weight floor added after softplus.
inline constexpr double kWeightFloor = 1e-6;

//! Maps an unconstrained weight to a strictly positive one.
template <class T>
T positive_weight(const T& raw)
{
    using jdan::softplus;
    return softplus(raw) + T(kWeightFloor);
}

} // namespace jdan
