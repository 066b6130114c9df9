#include "jdan/activation.hpp"

#include "jdan/error.hpp"

namespace jdan {

namespace {

void require_finite(double x, const char* fn)
{
    if (!std::isfinite(x)) {
        throw DomainError(std::string(fn) + ": non-finite input");
    }
}

} // namespace

std::string_view to_string(Activation kind) noexcept
{
    switch (kind) {
    case Activation::Sigmoid:
        return "sigmoid";
    case Activation::Tanh:
        return "tanh";
    case Activation::Linear:
        return "linear";
    case Activation::ReLU:
        return "relu";
    case Activation::Exponential:
        return "exp";
    }
    return "linear";
}

Activation parse_activation(std::string_view name)
{
    if (name == "sigmoid")
        return Activation::Sigmoid;
    if (name == "tanh")
        return Activation::Tanh;
    if (name == "linear")
        return Activation::Linear;
    if (name == "relu")
        return Activation::ReLU;
    if (name == "exp")
        return Activation::Exponential;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

double act_eval(Activation kind, double x)
{
    require_finite(x, "act_eval");
    return activate(kind, x);
}

double act_d1(Activation kind, double x)
{
    require_finite(x, "act_d1");
    return activate_d1(kind, x);
}

double act_d2(Activation kind, double x)
{
    require_finite(x, "act_d2");
    return activate_d2(kind, x);
}

} // namespace jdan
