#include "jdan/autodiff.hpp"

#include "jdan/error.hpp"

namespace jdan::ad {

std::vector<double> Tape::adjoints(Index output) const
{
    if (output >= size()) {
        throw ContractError("Tape::adjoints: output index out of range");
    }
    std::vector<double> adj(static_cast<std::size_t>(output) + 1, 0.0);
    adj[output] = 1.0;
    for (std::size_t i = output + 1; i-- > 0;) {
        const double a = adj[i];
        if (a == 0.0)
            continue;
        for (Index e = offsets_[i]; e < offsets_[i + 1]; ++e) {
            adj[parents_[e]] += a * partials_[e];
        }
    }
    return adj;
}

namespace {

Tape* find_tape(std::span<const Var> a, std::span<const Var> b, const Var& c)
{
    for (const auto& v : a)
        if (!v.is_constant())
            return v.tape();
    for (const auto& v : b)
        if (!v.is_constant())
            return v.tape();
    return c.tape();
}

} // namespace

Var affine(std::span<const Var> w, std::span<const Var> x, const Var& bias)
{
    if (w.size() != x.size()) {
        throw ContractError("affine: size mismatch");
    }
    double value = bias.value();
    for (std::size_t j = 0; j < w.size(); ++j) {
        value += w[j].value() * x[j].value();
    }
    Tape* tape = find_tape(w, x, bias);
    if (tape == nullptr) {
        return Var(value);
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (!w[j].is_constant())
            tape->edge(w[j].id(), x[j].value());
        if (!x[j].is_constant())
            tape->edge(x[j].id(), w[j].value());
    }
    if (!bias.is_constant())
        tape->edge(bias.id(), 1.0);
    return {*tape, value, tape->close()};
}

Var product(std::span<const Var> factors)
{
    double value = 1.0;
    for (const auto& f : factors)
        value *= f.value();
    Tape* tape = find_tape(factors, {}, Var());
    if (tape == nullptr) {
        return Var(value);
    }
    for (std::size_t j = 0; j < factors.size(); ++j) {
        if (factors[j].is_constant())
            continue;
        double rest = 1.0;
        for (std::size_t k = 0; k < factors.size(); ++k)
            if (k != j)
                rest *= factors[k].value();
        tape->edge(factors[j].id(), rest);
    }
    return {*tape, value, tape->close()};
}

} // namespace jdan::ad
