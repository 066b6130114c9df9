#pragma once

// Multi-input positive-weighted network
//
//     Y_k = z_k(W_k+ Y_{k-1} + b_k),  Y_0 = y,  output Y_{K+1} scalar.
//
// It is monotone in every input, but its mixed second partials can be negative
// for sigmoid or tanh activations, so it cannot serve as a joint CDF. This
// module evaluates the network, its input gradient, the closed-form mixed
// partial for the one-hidden-layer case, and searches for negative witnesses.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "jdan/activation.hpp"

namespace jdan {

struct MisoNetParams {
    std::vector<std::size_t> layer_sizes;          // {D, hidden..., 1}
    std::vector<std::vector<double>> raw_weights;  // per layer, row-major out x in
    std::vector<std::vector<double>> biases;
    std::vector<Activation> activations;           // one per layer, output included

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t layer_count() const { return layer_sizes.size() - 1; }

    //! Raw weights and biases drawn i.i.d. N(0, 1); the same activation on every layer.
    static MisoNetParams random(std::vector<std::size_t> layer_sizes, Activation activation, std::mt19937_64& rng);

    void validate() const;
};

double miso_forward(const MisoNetParams& params, std::span<const double> y);

//! dPsi/dy as the product of per-layer Jacobians.
std::vector<double> miso_grad(const MisoNetParams& params, std::span<const double> y);

//! Closed-form d2 Gamma / dy_p dy_q for a network with exactly one hidden layer.
double miso_mixed_partial(const MisoNetParams& params, std::span<const double> y, std::size_t p, std::size_t q);

//! Four-point central difference of miso_forward; works for any depth.
double miso_mixed_partial_fd(const MisoNetParams& params, std::span<const double> y, std::size_t p, std::size_t q,
                             double h = 1e-4);

struct NegativeWitness {
    MisoNetParams params;
    std::vector<double> y;
    std::size_t p = 0;
    std::size_t q = 1;
    double value = 0.0;
    std::size_t trial = 0; // 1-based
};

struct WitnessSearch {
    Activation activation = Activation::Sigmoid;
    std::size_t dim = 2;
    std::size_t hidden = 8;
    std::uint64_t seed = 0;
    std::size_t max_trials = 10000;
};

struct WitnessReport {
    WitnessSearch search;
    std::size_t trials_run = 0;
    std::size_t skipped_nonfinite = 0;
    std::optional<NegativeWitness> witness;
};

//! Random search for a mixed partial below -1e-8. Params ~ N(0, 1) raw,
//! y ~ U[-3, 3]^D, a random pair p != q per trial.
WitnessReport find_negative_witness(const WitnessSearch& search);

} // namespace jdan
