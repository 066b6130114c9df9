#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jdan/forecaster.hpp"

namespace jdan {

struct LogScore {
    double mean = 0.0;        // mean log joint density, nats
    std::size_t used = 0;
    std::size_t excluded = 0; // targets outside the bounds
};

struct MetricsReport {
    double log_score = 0.0;
    std::vector<double> crps;   // per dimension
    std::vector<double> pit_ks; // per dimension
    double energy_score = 0.0;
    std::size_t n_evaluated = 0;
    std::size_t n_excluded_log_score = 0;
};

//! Rows default to all rows of data. Features in data are raw (unscaled).
LogScore log_score(const Forecaster& f, const Dataset& data, std::span<const std::size_t> rows = {});

//! Mean of integral (F_d(t) - 1{t >= y_d})^2 dt over [L_d, U_d], split at y_d
//! and integrated with 256-interval composite Simpson on each side.
double crps_marginal(const Forecaster& f, const Dataset& data, std::size_t d, std::span<const std::size_t> rows = {});

//! Same integral for one CDF; y is clamped into the bounds.
double crps_single(const MarginalCdf& cdf, double y);

std::vector<double> pit_values(const Forecaster& f, const Dataset& data, std::size_t d,
                               std::span<const std::size_t> rows = {});

//! Kolmogorov-Smirnov distance of the values to Uniform(0, 1).
double ks_uniform(std::vector<double> values);

//! Requires at least 20 rows.
double pit_ks(const Forecaster& f, const Dataset& data, std::size_t d, std::span<const std::size_t> rows = {});

//! Mean over rows of (1/m) sum |s_j - y| - (1/(2 m^2)) sum_jk |s_j - s_k|, with
//! m samples per row drawn from the row's model (row i uses seed + i).
double energy_score(const Forecaster& f, const Dataset& data, std::size_t m_samples = 200, std::uint64_t seed = 0,
                    std::span<const std::size_t> rows = {});

MetricsReport evaluate(const Forecaster& f, const Dataset& data, std::size_t m_samples = 200, std::uint64_t seed = 0);

} // namespace jdan
