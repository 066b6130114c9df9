#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jdan/forecaster.hpp"

namespace jdan {

enum class VerifyLevel { Quick, Full };

struct CheckResult {
    std::string name;
    bool passed = true;
    std::size_t evaluated = 0;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool ok() const
    {
        for (const auto& c : checks)
            if (!c.passed)
                return false;
        return true;
    }
};

//! Integral of joint_pdf over the bounds box by tensor-product Simpson.
double integrate_simpson(const JdanModel& model, std::size_t intervals_per_dim);

//! Integral of joint_pdf over the bounds box by uniform Monte Carlo.
double integrate_monte_carlo(const JdanModel& model, std::size_t n, std::uint64_t seed);

//! Invariant battery on one model: density nonnegativity, analytic vs
//! finite-difference density (D <= 4), CDF grounding and upper corner,
//! marginal consistency, coordinatewise monotonicity, copula density range,
//! and (Full only) normalization.
VerifyReport verify_model(const JdanModel& model, VerifyLevel level, std::uint64_t seed = 0);

//! verify_model on the fixed model, or on models at standardized x = 0 and a
//! few N(0, 1) standardized feature vectors for a conditional forecaster.
VerifyReport verify_forecaster(const Forecaster& f, VerifyLevel level, std::uint64_t seed = 0);

} // namespace jdan
