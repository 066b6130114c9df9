#include "jdan/forecaster.hpp"

#include <string>

namespace jdan {

Forecaster::Forecaster(JdanModel fixed) : fixed_(std::move(fixed))
{
    arch_.marginals = fixed_->layout().marginals;
    arch_.bounds = fixed_->layout().bounds;
    arch_.feature_dim = 0;
    arch_.hypernet_hidden.clear();
}

Forecaster::Forecaster(ArchitectureDescriptor arch, ConditioningNet net, std::vector<AffineMap> feature_scaling)
    : arch_(std::move(arch)), net_(std::move(net)), scaling_(std::move(feature_scaling))
{
    arch_.validate();
    if (arch_.bounds.empty()) {
        throw ContractError("forecaster needs bounds");
    }
    if (net_->input_dim() != arch_.feature_dim || net_->output_dim() != arch_.output_dim()) {
        throw ContractError("conditioning net does not match the architecture");
    }
    if (scaling_.empty())
        scaling_.assign(arch_.feature_dim, AffineMap{});
    if (scaling_.size() != arch_.feature_dim) {
        throw ContractError("feature scaling has " + std::to_string(scaling_.size()) + " maps for " +
                            std::to_string(arch_.feature_dim) + " features");
    }
    if (arch_.feature_dim == 0)
        fixed_ = materialize(net_->forward({}), arch_);
}

JdanModel Forecaster::model_for(std::span<const double> x) const
{
    if (x.size() != arch_.feature_dim) {
        throw ContractError("expected " + std::to_string(arch_.feature_dim) + " features, got " +
                            std::to_string(x.size()));
    }
    if (fixed_)
        return *fixed_;
    std::vector<double> scaled(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        scaled[i] = scaling_[i].apply(x[i]);
    return materialize(nfn_forward(*net_, scaled), arch_);
}

} // namespace jdan
