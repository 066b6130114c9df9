#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jdan/data.hpp"
#include "jdan/error.hpp"
#include "jdan/hypernet.hpp"

namespace jdan {

//! Guard inside the log so a zero density at the support edge stays finite.
inline constexpr double kLogGuard = 1e-12;

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 500;
    std::size_t patience = 20;
    std::uint64_t seed = 0;
    double grad_clip = 10.0;
    double validation_fraction = 0.2;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_nll = 0.0;
    double val_nll = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::size_t stopped_epoch = 0;
    std::size_t best_epoch = 0;
    double best_validation_nll = 0.0;
    double wall_time_seconds = 0.0;
    std::size_t excluded_rows = 0;  // outside the fitted bounds
    std::size_t skipped_batches = 0; // non-finite loss or gradient
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> validation_rows;
    std::vector<std::string> warnings;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;
};

struct TrainResult {
    ConditioningNet net;
    ArchitectureDescriptor arch; // bounds filled in
    std::vector<AffineMap> feature_scaling; // fitted on the training split
    TrainReport report;
    AdamState optimizer;
};

//! Raised when every batch of an epoch fails; carries the last good parameters.
class TrainingFailure : public NumericalError {
public:
    TrainingFailure(const std::string& what, ConditioningNet last_good)
        : NumericalError(what), last_good_(std::move(last_good))
    {}

    const ConditioningNet& last_good() const noexcept { return last_good_; }

private:
    ConditioningNet last_good_;
};

//! -log(joint_pdf(y) + 1e-12) and its gradient with respect to the raw vector,
//! via the reverse-mode tape.
struct RawTerm {
    double loss = 0.0;
    std::vector<double> gradient;
};
RawTerm raw_nll_term(const ModelLayout& layout, std::span<const double> raw, std::span<const double> y);

//! Mean over rows of -log(joint_pdf(materialize(net(x)), y) + 1e-12).
double nll_loss(const ConditioningNet& net, const ArchitectureDescriptor& arch, const Dataset& data,
                std::span<const std::size_t> rows);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient; // over net.parameters()
};

//! Loss and exact gradient. Per-row work may run in parallel; the reduction
//! is always in row order, so the result does not depend on the thread count.
LossGradient loss_and_grad(const ConditioningNet& net, const ArchitectureDescriptor& arch, const Dataset& data,
                           std::span<const std::size_t> rows);

std::vector<double> grad(const ConditioningNet& net, const ArchitectureDescriptor& arch, const Dataset& data,
                         std::span<const std::size_t> rows);

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_coordinate = 0;
    std::size_t checked = 0; // coordinates with |g| > 1e-8
};

//! Central differences of nll_loss against grad. max_coordinates == 0 checks
//! every parameter; otherwise a seeded random subset of that size.
GradCheckResult grad_check(const ConditioningNet& net, const ArchitectureDescriptor& arch, const Dataset& data,
                           std::span<const std::size_t> rows, double h, std::size_t max_coordinates = 0,
                           std::uint64_t seed = 0);

//! Adam with L2 gradient clipping and early stopping on validation NLL.
//! If arch.bounds is empty they are fitted on the training split (margin 0.05).
//! Features are standardized with maps fitted on the training split; the
//! returned net expects standardized features.
TrainResult train(const Dataset& data, ArchitectureDescriptor arch, const TrainConfig& cfg);

} // namespace jdan
