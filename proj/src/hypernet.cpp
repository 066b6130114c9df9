#include "jdan/hypernet.hpp"

#include <cmath>
#include <string>

namespace jdan {

ArchitectureDescriptor ArchitectureDescriptor::make(std::size_t dim, std::vector<std::size_t> marginal_hidden,
                                                    Activation marginal_activation, std::size_t feature_dim,
                                                    std::vector<std::size_t> hypernet_hidden)
{
    ArchitectureDescriptor arch;
    std::vector<std::size_t> sizes{1};
    sizes.insert(sizes.end(), marginal_hidden.begin(), marginal_hidden.end());
    sizes.push_back(1);
    arch.marginals.assign(dim, MarginalShape{sizes, marginal_activation});
    arch.feature_dim = feature_dim;
    arch.hypernet_hidden = std::move(hypernet_hidden);
    return arch;
}

std::size_t ArchitectureDescriptor::output_dim() const
{
    std::size_t n = pair_count(dim());
    for (const auto& m : marginals)
        n += m.raw_count();
    return n;
}

void ArchitectureDescriptor::validate() const
{
    if (dim() < 2) {
        throw ContractError("architecture needs at least 2 target dimensions");
    }
    if (dim() > kMaxDimension) {
        throw ContractError("architecture dimension exceeds the cap of " + std::to_string(kMaxDimension));
    }
    for (const auto& m : marginals) {
        if (m.layer_sizes.size() < 2 || m.layer_sizes.front() != 1 || m.layer_sizes.back() != 1) {
            throw ContractError("marginal layer sizes must start and end with 1");
        }
        for (std::size_t s : m.layer_sizes)
            if (s == 0)
                throw ContractError("marginal layer sizes must be positive");
    }
    for (std::size_t s : hypernet_hidden)
        if (s == 0)
            throw ContractError("hypernet layer sizes must be positive");
    if (!bounds.empty()) {
        if (bounds.size() != dim())
            throw ContractError("architecture has " + std::to_string(bounds.size()) + " bounds for " +
                                std::to_string(dim()) + " dimensions");
        for (const auto& b : bounds)
            jdan::validate(b);
    }
}

ConditioningNet::ConditioningNet(std::vector<DenseLayer> layers) : layers_(std::move(layers))
{
    if (layers_.empty()) {
        throw ContractError("conditioning net needs at least one layer");
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
            throw ContractError("conditioning net: layer " + std::to_string(l) + " has the wrong shape");
        }
        if (l > 0 && layers_[l - 1].out != layer.in) {
            throw ContractError("conditioning net: layer " + std::to_string(l) + " input width mismatch");
        }
    }
}

ConditioningNet ConditioningNet::initialize(const ArchitectureDescriptor& arch, std::mt19937_64& rng)
{
    arch.validate();
    const std::size_t out_dim = arch.output_dim();
    // Bounds only matter for evaluation; the raw layout is shape-only.
    ModelLayout shape_only{arch.marginals, {}};
    std::vector<double> base = init_raw_vector(shape_only, rng);

    std::vector<DenseLayer> layers;
    if (arch.feature_dim == 0) {
        layers.push_back({0, out_dim, {}, std::move(base), Activation::Linear});
        return ConditioningNet(std::move(layers));
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t in = arch.feature_dim;
    for (std::size_t width : arch.hypernet_hidden) {
        DenseLayer layer{in, width, std::vector<double>(in * width), std::vector<double>(width, 0.0),
                         arch.hypernet_activation};
        const double sd = 1.0 / std::sqrt(static_cast<double>(in));
        for (auto& w : layer.weights)
            w = sd * normal(rng);
        layers.push_back(std::move(layer));
        in = width;
    }
    DenseLayer head{in, out_dim, std::vector<double>(in * out_dim), std::move(base), Activation::Linear};
    const double sd = 0.1 / std::sqrt(static_cast<double>(in));
    for (auto& w : head.weights)
        w = sd * normal(rng);
    layers.push_back(std::move(head));
    return ConditioningNet(std::move(layers));
}

std::size_t ConditioningNet::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& l : layers_)
        n += l.weights.size() + l.bias.size();
    return n;
}

std::vector<double> ConditioningNet::forward(std::span<const double> x) const
{
    if (x.size() != input_dim()) {
        throw ContractError("conditioning net: expected " + std::to_string(input_dim()) + " features, got " +
                            std::to_string(x.size()));
    }
    std::vector<double> a(x.begin(), x.end());
    for (const auto& layer : layers_) {
        std::vector<double> next(layer.out);
        for (std::size_t r = 0; r < layer.out; ++r) {
            const double pre = affine(std::span<const double>(layer.weights).subspan(r * layer.in, layer.in), a,
                                      layer.bias[r]);
            next[r] = activate(layer.activation, pre);
        }
        a = std::move(next);
    }
    return a;
}

std::vector<double> ConditioningNet::parameters() const
{
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& l : layers_) {
        flat.insert(flat.end(), l.weights.begin(), l.weights.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void ConditioningNet::set_parameters(std::span<const double> flat)
{
    if (flat.size() != parameter_count()) {
        throw ContractError("conditioning net: parameter vector has the wrong length");
    }
    std::size_t k = 0;
    for (auto& l : layers_) {
        for (auto& w : l.weights)
            w = flat[k++];
        for (auto& b : l.bias)
            b = flat[k++];
    }
}

void ConditioningNet::backward(std::span<const double> x, std::span<const double> grad_output,
                               std::span<double> grad) const
{
    if (grad_output.size() != output_dim() || grad.size() != parameter_count()) {
        throw ContractError("conditioning net backward: size mismatch");
    }
    // Forward pass keeping pre-activations and inputs of every layer.
    std::vector<std::vector<double>> inputs{std::vector<double>(x.begin(), x.end())};
    std::vector<std::vector<double>> pres;
    for (const auto& layer : layers_) {
        std::vector<double> pre(layer.out), post(layer.out);
        for (std::size_t r = 0; r < layer.out; ++r) {
            pre[r] = affine(std::span<const double>(layer.weights).subspan(r * layer.in, layer.in), inputs.back(),
                            layer.bias[r]);
            post[r] = activate(layer.activation, pre[r]);
        }
        pres.push_back(std::move(pre));
        inputs.push_back(std::move(post));
    }

    std::vector<std::size_t> offsets(layers_.size());
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        offsets[l] = off;
        off += layers_[l].weights.size() + layers_[l].bias.size();
    }

    std::vector<double> upstream(grad_output.begin(), grad_output.end());
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& layer = layers_[l];
        const auto& in = inputs[l];
        std::vector<double> delta(layer.out);
        for (std::size_t r = 0; r < layer.out; ++r)
            delta[r] = upstream[r] * activate_d1(layer.activation, pres[l][r]);

        double* gw = grad.data() + offsets[l];
        double* gb = gw + layer.weights.size();
        std::vector<double> down(layer.in, 0.0);
        for (std::size_t r = 0; r < layer.out; ++r) {
            if (delta[r] == 0.0)
                continue;
            const double* wrow = layer.weights.data() + r * layer.in;
            for (std::size_t j = 0; j < layer.in; ++j) {
                gw[r * layer.in + j] += delta[r] * in[j];
                down[j] += delta[r] * wrow[j];
            }
            gb[r] += delta[r];
        }
        upstream = std::move(down);
    }
}

std::vector<double> nfn_forward(const ConditioningNet& net, std::span<const double> x)
{
    for (double v : x) {
        if (!std::isfinite(v))
            throw DomainError("nfn_forward: non-finite feature");
    }
    return net.forward(x);
}

std::vector<double> init_raw_vector(const ModelLayout& layout, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> raw;
    raw.reserve(layout.raw_count());
    for (const auto& shape : layout.marginals) {
        const auto& sizes = shape.layer_sizes;
        const std::size_t layers = sizes.size() - 1;
        std::vector<std::vector<double>> weights(layers), biases(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            const std::size_t in = sizes[l];
            const std::size_t out = sizes[l + 1];
            const bool first = l == 0;
            const bool last = l + 1 == layers;
            weights[l].resize(in * out);
            biases[l].resize(out);
            for (auto& w : weights[l])
                w = first ? 1.0 + 0.5 * normal(rng) : (last ? 0.5 * normal(rng) : -1.0 + 0.5 * normal(rng));
            for (std::size_t r = 0; r < out; ++r) {
                if (last) {
                    biases[l][r] = 0.0;
                } else if (first) {
                    // spread the hidden units' centers across [-1, 1]
                    biases[l][r] = -positive_weight(weights[l][r]) * unif(rng);
                } else {
                    double mean_in = shape.activation == Activation::Sigmoid ? 0.5 : 0.0;
                    double centre = 0.0;
                    for (std::size_t j = 0; j < in; ++j)
                        centre += positive_weight(weights[l][r * in + j]) * mean_in;
                    biases[l][r] = -centre + 0.1 * normal(rng);
                }
            }
        }
        for (const auto& w : weights)
            raw.insert(raw.end(), w.begin(), w.end());
        for (const auto& b : biases)
            raw.insert(raw.end(), b.begin(), b.end());
    }
    raw.resize(raw.size() + pair_count(layout.dim()), 0.0);
    return raw;
}

JdanModel materialize(std::span<const double> raw, const ArchitectureDescriptor& arch)
{
    if (raw.size() != arch.output_dim()) {
        throw ContractError("materialize: expected " + std::to_string(arch.output_dim()) + " raw values, got " +
                            std::to_string(raw.size()));
    }
    return JdanModel(arch.layout(), std::vector<double>(raw.begin(), raw.end()));
}

std::vector<double> flatten(const JdanModel& model) { return model.raw(); }

} // namespace jdan
