#pragma once

// Conditioning network: a plain MLP from forecast features x to the flat raw
// parameter vector of a joint model. With zero features it degenerates to a
// single input-free layer whose bias *is* the raw vector, which is how the
// unconditional density-estimation mode is expressed.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "jdan/copula.hpp"

namespace jdan {

struct ArchitectureDescriptor {
    std::vector<MarginalShape> marginals;    // D entries
    std::vector<Bounds> bounds;              // D entries, or empty until fitted
    std::size_t feature_dim = 0;             // F
    std::vector<std::size_t> hypernet_hidden{64, 64};
    Activation hypernet_activation = Activation::Sigmoid;

    //! D marginals sharing one hidden shape.
    static ArchitectureDescriptor make(std::size_t dim, std::vector<std::size_t> marginal_hidden = {10, 10},
                                       Activation marginal_activation = Activation::Sigmoid,
                                       std::size_t feature_dim = 0,
                                       std::vector<std::size_t> hypernet_hidden = {64, 64});

    std::size_t dim() const noexcept { return marginals.size(); }
    ModelLayout layout() const { return {marginals, bounds}; }

    //! Length of the flat raw vector: marginal weights and biases plus D(D-1)/2.
    std::size_t output_dim() const;

    //! Throws ContractError on zero sizes, D < 2, or mismatched bounds.
    void validate() const;
};

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights; // row-major out x in
    std::vector<double> bias;
    Activation activation = Activation::Linear;
};

class ConditioningNet {
public:
    ConditioningNet() = default;
    explicit ConditioningNet(std::vector<DenseLayer> layers);

    //! Hidden layers ~ N(0, 1/in) with zero bias; final linear layer scaled by
    //! 0.1 with its bias set to a freshly initialized raw vector.
    static ConditioningNet initialize(const ArchitectureDescriptor& arch, std::mt19937_64& rng);

    std::size_t input_dim() const noexcept { return layers_.front().in; }
    std::size_t output_dim() const noexcept { return layers_.back().out; }
    std::size_t parameter_count() const;
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

    std::vector<double> forward(std::span<const double> x) const;

    //! Flat trainable parameters: per layer, weights then bias.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    //! Adds d(loss)/d(params) into grad given d(loss)/d(output) at input x.
    void backward(std::span<const double> x, std::span<const double> grad_output, std::span<double> grad) const;

private:
    std::vector<DenseLayer> layers_;
};

std::vector<double> nfn_forward(const ConditioningNet& net, std::span<const double> x);

//! Starting raw vector: monotone nets spread over [-1, 1], correlations 0.
std::vector<double> init_raw_vector(const ModelLayout& layout, std::mt19937_64& rng);

JdanModel materialize(std::span<const double> raw, const ArchitectureDescriptor& arch);

//! Exact inverse of materialize.
std::vector<double> flatten(const JdanModel& model);

} // namespace jdan
