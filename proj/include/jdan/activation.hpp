#pragma once

#include <cmath>
#include <concepts>
#include <string>
#include <string_view>

namespace jdan {

enum class Activation { Sigmoid, Tanh, Linear, ReLU, Exponential };

//! lowercase wire name: "sigmoid", "tanh", "linear", "relu", "exp"
std::string_view to_string(Activation kind) noexcept;

//! Parses a wire name. Throws ConfigError on unknown names.
Activation parse_activation(std::string_view name);

//! z(x). Throws DomainError for non-finite x.
double act_eval(Activation kind, double x);

//! z'(x). ReLU uses 0 at x = 0.
double act_d1(Activation kind, double x);

//! z''(x). Exactly 0 for Linear and ReLU.
double act_d2(Activation kind, double x);

//! Numerically stable logistic function.
template <std::floating_point R>
R sigmoid(R x) noexcept
{
    if (x >= R(0)) {
        return R(1) / (R(1) + std::exp(-x));
    }
    const R e = std::exp(x);
    return e / (R(1) + e);
}

//! log(1 + e^x) without overflow.
template <std::floating_point R>
R softplus(R x) noexcept
{
    return x > R(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Unchecked versions used on hot paths; callers guarantee finite input.

template <std::floating_point R>
R activate(Activation kind, R x) noexcept
{
    switch (kind) {
    case Activation::Sigmoid:
        return sigmoid(x);
    case Activation::Tanh:
        return std::tanh(x);
    case Activation::Linear:
        return x;
    case Activation::ReLU:
        return x > R(0) ? x : R(0);
    case Activation::Exponential:
        return std::exp(x);
    }
    return x;
}

template <std::floating_point R>
R activate_d1(Activation kind, R x) noexcept
{
    switch (kind) {
    case Activation::Sigmoid: {
        const R s = sigmoid(x);
        return s * (R(1) - s);
    }
    case Activation::Tanh: {
        const R t = std::tanh(x);
        return R(1) - t * t;
    }
    case Activation::Linear:
        return R(1);
    case Activation::ReLU:
        return x > R(0) ? R(1) : R(0);
    case Activation::Exponential:
        return std::exp(x);
    }
    return R(1);
}

template <std::floating_point R>
R activate_d2(Activation kind, R x) noexcept
{
    switch (kind) {
    case Activation::Sigmoid: {
        const R s = sigmoid(x);
        return s * (R(1) - s) * (R(1) - R(2) * s);
    }
    case Activation::Tanh: {
        const R t = std::tanh(x);
        return R(-2) * t * (R(1) - t * t);
    }
    case Activation::Linear:
    case Activation::ReLU:
        return R(0);
    case Activation::Exponential:
        return std::exp(x);
    }
    return R(0);
}

} // namespace jdan
