#pragma once

// Joint CDF from D normalized marginals and pairwise correlations C_di in (-1, 1):
//
//     F(y) = prod_d u_d * (1/P) sum_{d<i} [C_di (1 - u_d)(1 - u_i) + 1],   u_d = F_d(y_d),
//
// with P = D(D-1)/2. Its mixed partial over all D coordinates factorizes as
//
//     f(y) = c(u) * prod_d f_d(y_d),   c(u) = 1 + (1/P) sum_{d<i} C_di (1 - 2 u_d)(1 - 2 u_i),
//
// and c(u) lies in (0, 2) because the averaged pair terms are bounded by max|C| < 1.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jdan/marginal_net.hpp"
#include "jdan/matrix.hpp"

namespace jdan {

//! Default cap on the joint dimension.
inline constexpr std::size_t kMaxDimension = 12;

inline std::size_t pair_count(std::size_t dim) noexcept { return dim * (dim - 1) / 2; }

//! Position of pair (d, i), d < i, in row-major upper-triangular order (0-based).
std::size_t pair_index(std::size_t dim, std::size_t d, std::size_t i);

struct CorrelationParams {
    std::size_t dim = 2;
    std::vector<double> raw; // (1,2), (1,3), ..., (2,3), ...

    static CorrelationParams zeros(std::size_t dim) { return {dim, std::vector<double>(pair_count(dim), 0.0)}; }

    //! tanh(raw), strictly inside (-1, 1).
    std::vector<double> effective() const;
};

//! Shape of one marginal: layer sizes {1, hidden..., 1} and hidden activation.
struct MarginalShape {
    std::vector<std::size_t> layer_sizes;
    Activation activation = Activation::Sigmoid;

    std::size_t raw_count() const { return raw_parameter_count(layer_sizes); }
};

//! Everything needed to turn a flat raw vector into a joint model.
struct ModelLayout {
    std::vector<MarginalShape> marginals;
    std::vector<Bounds> bounds;

    std::size_t dim() const noexcept { return marginals.size(); }
    std::size_t raw_count() const;

    //! Throws ContractError on inconsistent sizes, D < 2, or D > kMaxDimension.
    void validate() const;
};

//! FGM-style copula CDF with effective correlations c.
template <class T>
T copula_cdf_t(std::span<const T> corr, std::span<const T> u)
{
    const std::size_t dim = u.size();
    T bracket(0.0);
    std::size_t k = 0;
    for (std::size_t d = 0; d < dim; ++d)
        for (std::size_t i = d + 1; i < dim; ++i, ++k)
            bracket = bracket + corr[k] * (T(1.0) - u[d]) * (T(1.0) - u[i]) + T(1.0);
    // bracket / P first: with all but one u at 1 it is exactly 1, so the
    // margins reproduce the marginal CDFs bit for bit
    return product(u) * (bracket / T(static_cast<double>(pair_count(dim))));
}

//! Mixed partial of copula_cdf_t over all of u.
template <class T>
T copula_density_t(std::span<const T> corr, std::span<const T> u)
{
    const std::size_t dim = u.size();
    T sum(0.0);
    std::size_t k = 0;
    for (std::size_t d = 0; d < dim; ++d)
        for (std::size_t i = d + 1; i < dim; ++i, ++k)
            sum = sum + corr[k] * (T(1.0) - T(2.0) * u[d]) * (T(1.0) - T(2.0) * u[i]);
    return T(1.0) + sum / T(static_cast<double>(pair_count(dim)));
}

//! Joint model over scalar type T, built from a flat raw vector.
//! Raw layout: for each marginal its weights (layer by layer, row-major) then
//! its biases; after all marginals, the correlation raws.
template <class T>
class BasicJointModel {
public:
    BasicJointModel() = default;

    BasicJointModel(const ModelLayout& layout, std::span<const T> raw)
    {
        layout.validate();
        if (raw.size() != layout.raw_count()) {
            throw ContractError("joint model: expected " + std::to_string(layout.raw_count()) +
                                " raw values, got " + std::to_string(raw.size()));
        }
        std::size_t k = 0;
        marginals_.reserve(layout.dim());
        for (std::size_t d = 0; d < layout.dim(); ++d) {
            const auto& shape = layout.marginals[d];
            const std::size_t n = shape.raw_count();
            MonotoneNet<T> net(shape.layer_sizes, shape.activation, raw.subspan(k, n));
            marginals_.emplace_back(std::move(net), layout.bounds[d]);
            k += n;
        }
        using std::tanh;
        for (; k < raw.size(); ++k)
            corr_.push_back(tanh(raw[k]));
    }

    std::size_t dim() const noexcept { return marginals_.size(); }
    const BasicMarginalCdf<T>& marginal(std::size_t d) const { return marginals_[d]; }
    std::span<const T> correlations() const noexcept { return corr_; }

    T joint_cdf(std::span<const double> y) const { return joint_cdf_at(y); }
    T joint_cdf(std::span<const long double> y) const { return joint_cdf_at(y); }
    T joint_pdf(std::span<const double> y) const { return joint_pdf_at(y); }
    T joint_pdf(std::span<const long double> y) const { return joint_pdf_at(y); }

private:
    template <class Y>
    T joint_cdf_at(std::span<const Y> y) const
    {
        check(y.size());
        std::vector<T> u;
        u.reserve(dim());
        for (std::size_t d = 0; d < dim(); ++d)
            u.push_back(marginals_[d].cdf(y[d]));
        return copula_cdf_t(std::span<const T>(corr_), std::span<const T>(u));
    }

    template <class Y>
    T joint_pdf_at(std::span<const Y> y) const
    {
        check(y.size());
        std::vector<T> u, f;
        u.reserve(dim());
        f.reserve(dim());
        for (std::size_t d = 0; d < dim(); ++d) {
            auto [ud, fd] = marginals_[d].cdf_and_pdf(y[d]);
            u.push_back(ud);
            f.push_back(fd);
        }
        return copula_density_t(std::span<const T>(corr_), std::span<const T>(u)) * product(std::span<const T>(f));
    }

    void check(std::size_t size) const
    {
        if (size != dim()) {
            throw ContractError("expected a point of dimension " + std::to_string(dim()) + ", got " +
                                std::to_string(size));
        }
    }

    std::vector<BasicMarginalCdf<T>> marginals_;
    std::vector<T> corr_;
};

//! A joint model with double parameters. Keeps the raw vector it was built
//! from, so flattening is exact.
class JdanModel {
public:
    JdanModel(ModelLayout layout, std::vector<double> raw);
    JdanModel(const std::vector<MarginalNetParams>& marginals, const CorrelationParams& corr,
              std::vector<Bounds> bounds);

    std::size_t dim() const noexcept { return layout_.dim(); }
    const ModelLayout& layout() const noexcept { return layout_; }
    const std::vector<double>& raw() const noexcept { return raw_; }
    const BasicJointModel<double>& evaluator() const noexcept { return eval_; }

    const Bounds& bounds(std::size_t d) const { return layout_.bounds[d]; }
    const MarginalCdf& marginal(std::size_t d) const { return eval_.marginal(d); }
    MarginalNetParams marginal_params(std::size_t d) const;
    CorrelationParams correlation_params() const;
    std::span<const double> correlations() const noexcept { return eval_.correlations(); }

private:
    ModelLayout layout_;
    std::vector<double> raw_;
    BasicJointModel<double> eval_;
};

//! Coordinates outside their bounds are clamped by the marginal CDFs.
double joint_cdf(const JdanModel& model, std::span<const double> y);

double copula_cdf(const CorrelationParams& corr, std::span<const double> u);
double copula_density(const CorrelationParams& corr, std::span<const double> u);

double joint_pdf(const JdanModel& model, std::span<const double> y);

//! 2^D central-difference estimate of the mixed partial of joint_cdf with a
//! per-dimension step. Throws ContractError if y is within h of a bound.
double mixed_partial_fd(const JdanModel& model, std::span<const double> y, std::span<const double> h);
double mixed_partial_fd(const JdanModel& model, std::span<const double> y, double h);

//! n draws, rows are samples. Rejection sampling of u against c(u) with
//! envelope 2, then per-coordinate inverse marginal CDFs.
Matrix sample(const JdanModel& model, std::size_t n, std::uint64_t seed);

} // namespace jdan
