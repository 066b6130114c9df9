#pragma once

// Single-input positive-weighted network and the normalized marginal CDF built
// from it. The network Psi is monotone nondecreasing in its input because every
// effective weight is softplus(raw) + 1e-6 > 0 and every activation has a
// nonnegative first derivative. The marginal CDF on [L, U] is
//
//     F(y) = (Psi(t(y)) - Psi(-1)) / (Psi(1) - Psi(-1)),  t(y) = -1 + 2 (y - L) / (U - L)
//
// so the network always sees its support as [-1, 1] regardless of target units.

#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "jdan/activation.hpp"
#include "jdan/error.hpp"
#include "jdan/scalar.hpp"

namespace jdan {

struct Bounds {
    double lower = 0.0;
    double upper = 1.0;

    double width() const noexcept { return upper - lower; }
};

//! Throws ContractError unless lower < upper and both are finite.
void validate(const Bounds& b);

//! softplus(raw) + 1e-6
double positivity_map(double raw);

//! Guard below which Psi(U) - Psi(L) is treated as a degenerate marginal.
inline constexpr double kDenominatorGuard = 1e-12;

struct MarginalNetParams {
    std::vector<std::size_t> layer_sizes;           // {1, hidden..., 1}
    std::vector<std::vector<double>> raw_weights;   // per layer, row-major out x in
    std::vector<std::vector<double>> biases;        // per layer, length out
    Activation activation = Activation::Sigmoid;    // hidden layers; output is linear

    //! All-zero raw weights and biases for the given shape.
    static MarginalNetParams zeros(std::vector<std::size_t> layer_sizes, Activation activation);

    std::size_t layer_count() const noexcept { return layer_sizes.empty() ? 0 : layer_sizes.size() - 1; }
    std::size_t parameter_count() const;

    //! Throws ContractError if array shapes disagree with layer_sizes.
    void validate() const;
};

//! Number of raw parameters (weights then biases) for a layer shape.
std::size_t raw_parameter_count(std::span<const std::size_t> layer_sizes);

//! Positive-weighted monotone network over scalar type T (double, long double or ad::Var).
template <class T>
class MonotoneNet {
public:
    MonotoneNet() = default;

    //! raw holds all weights layer-by-layer row-major, then all biases.
    MonotoneNet(std::span<const std::size_t> layer_sizes, Activation activation, std::span<const T> raw)
        : sizes_(layer_sizes.begin(), layer_sizes.end()), activation_(activation)
    {
        if (sizes_.size() < 2 || sizes_.front() != 1 || sizes_.back() != 1) {
            throw ContractError("MonotoneNet: layer sizes must start and end with 1");
        }
        if (raw.size() != raw_parameter_count(sizes_)) {
            throw ContractError("MonotoneNet: raw parameter count mismatch");
        }
        std::size_t k = 0;
        weights_.resize(layers());
        biases_.resize(layers());
        for (std::size_t l = 0; l < layers(); ++l) {
            const std::size_t n = sizes_[l] * sizes_[l + 1];
            weights_[l].reserve(n);
            for (std::size_t j = 0; j < n; ++j)
                weights_[l].push_back(positive_weight(raw[k++]));
        }
        for (std::size_t l = 0; l < layers(); ++l) {
            biases_[l].assign(raw.begin() + static_cast<std::ptrdiff_t>(k),
                              raw.begin() + static_cast<std::ptrdiff_t>(k + sizes_[l + 1]));
            k += sizes_[l + 1];
        }
    }

    std::size_t layers() const noexcept { return sizes_.size() - 1; }
    const std::vector<T>& effective_weights(std::size_t layer) const { return weights_[layer]; }

    //! Psi(x) and dPsi/dx via forward-mode chain rule through each layer.
    std::pair<T, T> value_and_slope(const T& x) const
    {
        std::vector<T> a{x};
        std::vector<T> da{T(1.0)};
        std::vector<T> next, dnext;
        for (std::size_t l = 0; l < layers(); ++l) {
            const std::size_t in = sizes_[l];
            const std::size_t out = sizes_[l + 1];
            const bool hidden = l + 1 < layers();
            next.assign(out, T(0.0));
            dnext.assign(out, T(0.0));
            for (std::size_t r = 0; r < out; ++r) {
                std::span<const T> row(weights_[l].data() + r * in, in);
                const T pre = affine(row, std::span<const T>(a), biases_[l][r]);
                const T dpre = dot(row, std::span<const T>(da));
                if (hidden) {
                    next[r] = activate(activation_, pre);
                    dnext[r] = activate_d1(activation_, pre) * dpre;
                } else {
                    next[r] = pre;
                    dnext[r] = dpre;
                }
                if (!std::isfinite(value_of(next[r])) || !std::isfinite(value_of(dnext[r]))) {
                    throw EvaluationError("monotone net overflow", static_cast<int>(l));
                }
            }
            std::swap(a, next);
            std::swap(da, dnext);
        }
        return {a[0], da[0]};
    }

    T value(const T& x) const
    {
        std::vector<T> a{x};
        std::vector<T> next;
        for (std::size_t l = 0; l < layers(); ++l) {
            const std::size_t in = sizes_[l];
            const std::size_t out = sizes_[l + 1];
            const bool hidden = l + 1 < layers();
            next.assign(out, T(0.0));
            for (std::size_t r = 0; r < out; ++r) {
                std::span<const T> row(weights_[l].data() + r * in, in);
                const T pre = affine(row, std::span<const T>(a), biases_[l][r]);
                next[r] = hidden ? activate(activation_, pre) : pre;
                if (!std::isfinite(value_of(next[r]))) {
                    throw EvaluationError("monotone net overflow", static_cast<int>(l));
                }
            }
            std::swap(a, next);
        }
        return a[0];
    }

private:
    std::vector<std::size_t> sizes_;
    Activation activation_ = Activation::Sigmoid;
    std::vector<std::vector<T>> weights_;
    std::vector<std::vector<T>> biases_;
};

template <class Y>
using coord_t = std::conditional_t<std::is_same_v<Y, long double>, long double, double>;

//! Normalized marginal CDF/PDF on a bounded support, with Psi(-1) and the
//! normalizing span cached at construction.
template <class T>
class BasicMarginalCdf {
public:
    BasicMarginalCdf() = default;

    BasicMarginalCdf(MonotoneNet<T> net, const Bounds& bounds) : net_(std::move(net)), bounds_(bounds)
    {
        validate(bounds_);
        lo_ = net_.value(T(-1.0));
        span_ = net_.value(T(1.0)) - lo_;
        if (!(value_of(span_) >= kDenominatorGuard)) {
            throw DegenerateMarginalError("marginal network is flat over its support: Psi(U) - Psi(L) = " +
                                          std::to_string(value_of(span_)));
        }
    }

    const MonotoneNet<T>& net() const noexcept { return net_; }
    const Bounds& bounds() const noexcept { return bounds_; }

    //! Maps y in [L, U] onto the network input range [-1, 1]. Long double
    //! coordinates stay in long double; everything else is computed in double.
    template <class Y>
    coord_t<Y> standardize(Y y) const noexcept
    {
        using C = coord_t<Y>;
        return C(-1) + C(2) * (C(y) - C(bounds_.lower)) / C(bounds_.width());
    }

    template <class Y>
    T cdf(Y y) const
    {
        if (y <= bounds_.lower)
            return T(0.0);
        if (y >= bounds_.upper)
            return T(1.0);
        return clamp_unit((net_.value(T(standardize(y))) - lo_) / span_);
    }

    template <class Y>
    T pdf(Y y) const
    {
        if (y < bounds_.lower || y > bounds_.upper)
            return T(0.0);
        const auto [v, slope] = net_.value_and_slope(T(standardize(y)));
        (void)v;
        return slope * T(2.0 / bounds_.width()) / span_;
    }

    //! {cdf(y), pdf(y)} sharing one network pass.
    template <class Y>
    std::pair<T, T> cdf_and_pdf(Y y) const
    {
        if (y < bounds_.lower || y > bounds_.upper)
            return {T(y < bounds_.lower ? 0.0 : 1.0), T(0.0)};
        const auto [v, slope] = net_.value_and_slope(T(standardize(y)));
        const T density = slope * T(2.0 / bounds_.width()) / span_;
        if (y == bounds_.lower)
            return {T(0.0), density};
        if (y == bounds_.upper)
            return {T(1.0), density};
        return {clamp_unit((v - lo_) / span_), density};
    }

private:
    static T clamp_unit(const T& u)
    {
        if (value_of(u) < 0.0)
            return T(0.0);
        if (value_of(u) > 1.0)
            return T(1.0);
        return u;
    }

    MonotoneNet<T> net_;
    Bounds bounds_;
    T lo_{};
    T span_{};
};

using MarginalCdf = BasicMarginalCdf<double>;

//! Flattens params into the raw layout consumed by MonotoneNet.
std::vector<double> flatten(const MarginalNetParams& params);

//! Inverse of flatten for a known shape.
MarginalNetParams unflatten_marginal(std::span<const std::size_t> layer_sizes, Activation activation,
                                     std::span<const double> raw);

//! Evaluation wrapper owning raw params plus their effective network.
class MarginalNet {
public:
    explicit MarginalNet(MarginalNetParams params);

    const MarginalNetParams& params() const noexcept { return params_; }
    const MonotoneNet<double>& net() const noexcept { return net_; }

private:
    MarginalNetParams params_;
    MonotoneNet<double> net_;
};

//! Psi(y) on the raw (unstandardized) input. Throws DomainError for non-finite y.
double forward(const MarginalNet& net, double y);

//! dPsi/dy, always >= 0.
double d_forward(const MarginalNet& net, double y);

double normalized_cdf(const MarginalNet& net, double y, const Bounds& b);
double normalized_pdf(const MarginalNet& net, double y, const Bounds& b);

//! Quantile of the normalized marginal, |F(y*) - p| <= 1e-10.
//! Safeguarded Newton steps with bisection fallback, at most 200 iterations.
double inverse_cdf(const MarginalCdf& cdf, double p);
double inverse_cdf(const MarginalNet& net, double p, const Bounds& b);

} // namespace jdan
