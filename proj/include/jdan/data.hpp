#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jdan/marginal_net.hpp"
#include "jdan/matrix.hpp"

namespace jdan {

//! z = (x - shift) / scale
struct AffineMap {
    double shift = 0.0;
    double scale = 1.0;

    double apply(double x) const noexcept { return (x - shift) / scale; }
    double invert(double z) const noexcept { return z * scale + shift; }
};

struct Dataset {
    Matrix features;                         // n x F
    Matrix targets;                          // n x D
    std::vector<Bounds> bounds;              // D entries once fitted
    std::vector<AffineMap> feature_scaling;  // F entries; identity until fitted
    std::vector<std::string> feature_names;
    std::vector<std::string> target_names;
    std::size_t dropped_rows = 0;

    std::size_t size() const noexcept { return targets.rows; }
    std::size_t feature_dim() const noexcept { return features.cols; }
    std::size_t target_dim() const noexcept { return targets.cols; }

    //! Builds a dataset from in-memory arrays; throws ContractError on row mismatch.
    static Dataset from_arrays(Matrix features, Matrix targets);

    //! Rows at the given indices.
    Dataset subset(std::span<const std::size_t> rows) const;
};

struct CsvSpec {
    std::vector<std::string> feature_columns;
    std::vector<std::string> target_columns;
    //! For each lag k, the target columns at row t - k are appended as features.
    std::vector<std::size_t> lag_windows;
};

//! Reads a headed CSV. Rows with a missing value (empty, "NA", "nan") in any
//! used column, or without enough history for the lags, are dropped.
Dataset load_csv(const std::filesystem::path& path, const CsvSpec& spec);

//! Per-dimension [min - margin * range, max + margin * range] over the rows given
//! (all rows when empty).
std::vector<Bounds> fit_bounds(const Matrix& targets, double margin = 0.05, std::span<const std::size_t> rows = {});

//! Mean/standard-deviation maps per feature column over the rows given.
std::vector<AffineMap> fit_feature_scaling(const Matrix& features, std::span<const std::size_t> rows = {});

//! Replaces features with their scaled values and records the maps.
void apply_feature_scaling(Dataset& data, std::vector<AffineMap> maps);

//! Deterministic shuffled split: {train rows, validation rows}.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_rows(std::size_t n, double validation_fraction,
                                                                         std::uint64_t seed);

//! Whether every target coordinate of the row lies inside bounds.
bool within_bounds(std::span<const double> y, std::span<const Bounds> bounds);

} // namespace jdan
