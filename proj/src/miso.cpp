#include "jdan/miso.hpp"

#include <cmath>
#include <string>

#include "jdan/error.hpp"
#include "jdan/scalar.hpp"

namespace jdan {

MisoNetParams MisoNetParams::random(std::vector<std::size_t> layer_sizes, Activation activation,
                                    std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    MisoNetParams p;
    p.layer_sizes = std::move(layer_sizes);
    for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
        std::vector<double> w(p.layer_sizes[l] * p.layer_sizes[l + 1]);
        std::vector<double> b(p.layer_sizes[l + 1]);
        for (auto& v : w)
            v = normal(rng);
        for (auto& v : b)
            v = normal(rng);
        p.raw_weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
        p.activations.push_back(activation);
    }
    p.validate();
    return p;
}

void MisoNetParams::validate() const
{
    if (layer_sizes.size() < 2 || layer_sizes.back() != 1) {
        throw ContractError("MISO net: layer sizes must end with 1");
    }
    const std::size_t layers = layer_count();
    if (raw_weights.size() != layers || biases.size() != layers || activations.size() != layers) {
        throw ContractError("MISO net: wrong number of layers");
    }
    for (std::size_t l = 0; l < layers; ++l) {
        if (layer_sizes[l] == 0 || raw_weights[l].size() != layer_sizes[l] * layer_sizes[l + 1] ||
            biases[l].size() != layer_sizes[l + 1]) {
            throw ContractError("MISO net: layer " + std::to_string(l) + " has the wrong shape");
        }
    }
}

namespace {

struct Pass {
    std::vector<std::vector<double>> pre;  // pre-activations per layer
    std::vector<std::vector<double>> post; // post[0] = y
    std::vector<std::vector<double>> weights;
};

Pass run(const MisoNetParams& params, std::span<const double> y)
{
    params.validate();
    if (y.size() != params.input_dim()) {
        throw ContractError("MISO net: expected input of dimension " + std::to_string(params.input_dim()) +
                            ", got " + std::to_string(y.size()));
    }
    Pass pass;
    pass.post.emplace_back(y.begin(), y.end());
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        const std::size_t in = params.layer_sizes[l];
        const std::size_t out = params.layer_sizes[l + 1];
        std::vector<double> w(params.raw_weights[l].size());
        for (std::size_t j = 0; j < w.size(); ++j)
            w[j] = positive_weight(params.raw_weights[l][j]);
        std::vector<double> pre(out), post(out);
        for (std::size_t r = 0; r < out; ++r) {
            pre[r] = affine(std::span<const double>(w).subspan(r * in, in), pass.post.back(), params.biases[l][r]);
            post[r] = activate(params.activations[l], pre[r]);
        }
        pass.weights.push_back(std::move(w));
        pass.pre.push_back(std::move(pre));
        pass.post.push_back(std::move(post));
    }
    return pass;
}

} // namespace

double miso_forward(const MisoNetParams& params, std::span<const double> y) { return run(params, y).post.back()[0]; }

std::vector<double> miso_grad(const MisoNetParams& params, std::span<const double> y)
{
    const Pass pass = run(params, y);
    // Accumulate J = J_1, then J <- J_k * J for k = 2..K+1, with
    // J_k[r][j] = z'_k(pre_r) * w_k[r][j].
    const std::size_t dim = y.size();
    std::vector<double> acc(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
        acc[i * dim + i] = 1.0;
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        const std::size_t in = params.layer_sizes[l];
        const std::size_t out = params.layer_sizes[l + 1];
        std::vector<double> next(out * dim, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
            const double zp = activate_d1(params.activations[l], pass.pre[l][r]);
            for (std::size_t j = 0; j < in; ++j) {
                const double jk = zp * pass.weights[l][r * in + j];
                for (std::size_t c = 0; c < dim; ++c)
                    next[r * dim + c] += jk * acc[j * dim + c];
            }
        }
        acc = std::move(next);
    }
    return acc; // 1 x D
}

double miso_mixed_partial(const MisoNetParams& params, std::span<const double> y, std::size_t p, std::size_t q)
{
    if (params.layer_count() != 2) {
        throw ContractError("miso_mixed_partial: closed form needs exactly one hidden layer");
    }
    if (p >= params.input_dim() || q >= params.input_dim()) {
        throw ContractError("miso_mixed_partial: index out of range");
    }
    if (p == q) {
        throw ContractError("miso_mixed_partial: p and q must differ");
    }
    const Pass pass = run(params, y);
    const std::size_t dim = params.input_dim();
    const std::size_t hidden = params.layer_sizes[1];
    const auto& w1 = pass.weights[0];
    const auto& w2 = pass.weights[1];
    const Activation z1 = params.activations[0];
    const Activation z2 = params.activations[1];
    const double out_pre = pass.pre[1][0];

    double curvature = 0.0; // sum_l z1''_l w1_lp w1_lq w2_l
    double slope_p = 0.0;   // sum_l z1'_l w1_lp w2_l
    double slope_q = 0.0;
    for (std::size_t l = 0; l < hidden; ++l) {
        const double h = pass.pre[0][l];
        curvature += activate_d2(z1, h) * w1[l * dim + p] * w1[l * dim + q] * w2[l];
        slope_p += activate_d1(z1, h) * w1[l * dim + p] * w2[l];
        slope_q += activate_d1(z1, h) * w1[l * dim + q] * w2[l];
    }
    return curvature * activate_d1(z2, out_pre) + slope_p * slope_q * activate_d2(z2, out_pre);
}

double miso_mixed_partial_fd(const MisoNetParams& params, std::span<const double> y, std::size_t p, std::size_t q,
                             double h)
{
    if (p >= params.input_dim() || q >= params.input_dim() || p == q) {
        throw ContractError("miso_mixed_partial_fd: need distinct indices in range");
    }
    std::vector<double> probe(y.begin(), y.end());
    auto at = [&](double sp, double sq) {
        probe.assign(y.begin(), y.end());
        probe[p] += sp * h;
        probe[q] += sq * h;
        return miso_forward(params, probe);
    };
    return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
}

WitnessReport find_negative_witness(const WitnessSearch& search)
{
    if (search.dim < 2) {
        throw ContractError("witness search needs at least two inputs");
    }
    constexpr double threshold = -1e-8;
    WitnessReport report;
    report.search = search;
    std::mt19937_64 rng(search.seed);
    std::uniform_real_distribution<double> point(-3.0, 3.0);
    std::uniform_int_distribution<std::size_t> index(0, search.dim - 1);
    std::vector<double> y(search.dim);

    for (std::size_t trial = 0; trial < search.max_trials; ++trial) {
        auto params = MisoNetParams::random({search.dim, search.hidden, 1}, search.activation, rng);
        for (auto& v : y)
            v = point(rng);
        const std::size_t p = index(rng);
        std::size_t q = index(rng);
        while (q == p)
            q = index(rng);
        report.trials_run = trial + 1;

        const double value = miso_mixed_partial(params, y, p, q);
        if (!std::isfinite(value)) {
            ++report.skipped_nonfinite;
            continue;
        }
        if (value < threshold) {
            report.witness = NegativeWitness{std::move(params), y, p, q, value, trial + 1};
            break;
        }
    }
    return report;
}

} // namespace jdan
