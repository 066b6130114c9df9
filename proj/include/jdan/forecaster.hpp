#pragma once

#include <optional>
#include <span>
#include <vector>

#include "jdan/data.hpp"
#include "jdan/hypernet.hpp"

namespace jdan {

//! Maps raw feature vectors to joint models: either a conditioning net with
//! its feature scaling, or one fixed model shared by every input.
class Forecaster {
public:
    explicit Forecaster(JdanModel fixed);
    Forecaster(ArchitectureDescriptor arch, ConditioningNet net, std::vector<AffineMap> feature_scaling);

    bool conditional() const noexcept { return net_.has_value(); }
    std::size_t dim() const noexcept { return arch_.dim(); }
    std::size_t feature_dim() const noexcept { return arch_.feature_dim; }
    const ArchitectureDescriptor& arch() const noexcept { return arch_; }
    const std::vector<Bounds>& bounds() const noexcept { return arch_.bounds; }
    const ConditioningNet* net() const noexcept { return net_ ? &*net_ : nullptr; }
    const std::vector<AffineMap>& feature_scaling() const noexcept { return scaling_; }

    //! Model for raw (unscaled) features x.
    JdanModel model_for(std::span<const double> x) const;

private:
    ArchitectureDescriptor arch_;
    std::optional<ConditioningNet> net_;
    std::vector<AffineMap> scaling_;
    std::optional<JdanModel> fixed_;
};

} // namespace jdan
