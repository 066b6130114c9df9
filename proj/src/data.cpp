#include "jdan/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "jdan/error.hpp"

namespace jdan {

Dataset Dataset::from_arrays(Matrix features, Matrix targets)
{
    if (features.rows != targets.rows) {
        throw ContractError("dataset: features and targets have different row counts");
    }
    Dataset ds;
    ds.feature_scaling.assign(features.cols, AffineMap{});
    ds.features = std::move(features);
    ds.targets = std::move(targets);
    return ds;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const
{
    Dataset out = *this;
    out.features = Matrix(rows.size(), features.cols);
    out.targets = Matrix(rows.size(), targets.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(features.row(rows[i]).begin(), features.cols, out.features.row(i).begin());
        std::copy_n(targets.row(rows[i]).begin(), targets.cols, out.targets.row(i).begin());
    }
    return out;
}

namespace {

std::string trim(std::string s)
{
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

bool is_missing(const std::string& cell)
{
    return cell.empty() || cell == "NA" || cell == "na" || cell == "nan" || cell == "NaN" || cell == "null";
}

//! nullopt for a missing cell; throws ParseError for a non-numeric one.
std::optional<double> parse_cell(const std::string& cell, std::size_t line_no, const std::string& column)
{
    if (is_missing(cell))
        return std::nullopt;
    double v = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line_no) + ", column '" + column + "': cannot parse '" + cell +
                         "' as a number");
    }
    return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name)
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw MissingColumnError("column '" + name + "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvSpec& spec)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open data file " + path.string());
    }
    if (spec.target_columns.empty()) {
        throw ConfigError("at least one target column is required");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw EmptyDataError("data file " + path.string() + " is empty");
    }
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = split_line(line);

    std::vector<std::size_t> fcols, tcols;
    for (const auto& c : spec.feature_columns)
        fcols.push_back(column_index(header, c));
    for (const auto& c : spec.target_columns)
        tcols.push_back(column_index(header, c));

    using Row = std::vector<std::optional<double>>;
    std::vector<Row> feat_rows, targ_rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " cells, got " + std::to_string(cells.size()));
        }
        Row f, t;
        for (std::size_t c : fcols)
            f.push_back(parse_cell(cells[c], line_no, header[c]));
        for (std::size_t c : tcols)
            t.push_back(parse_cell(cells[c], line_no, header[c]));
        feat_rows.push_back(std::move(f));
        targ_rows.push_back(std::move(t));
    }

    const std::size_t max_lag =
        spec.lag_windows.empty() ? 0 : *std::max_element(spec.lag_windows.begin(), spec.lag_windows.end());
    for (std::size_t lag : spec.lag_windows) {
        if (lag == 0)
            throw ConfigError("lag windows must be positive");
    }
    const std::size_t dim = tcols.size();
    const std::size_t fdim = fcols.size() + spec.lag_windows.size() * dim;

    std::vector<double> fvals, tvals;
    std::size_t kept = 0;
    std::size_t dropped = 0;
    for (std::size_t r = 0; r < targ_rows.size(); ++r) {
        if (r < max_lag) {
            ++dropped;
            continue;
        }
        std::vector<std::optional<double>> f = feat_rows[r];
        for (std::size_t lag : spec.lag_windows)
            f.insert(f.end(), targ_rows[r - lag].begin(), targ_rows[r - lag].end());
        const auto missing = [](const std::optional<double>& v) { return !v.has_value(); };
        if (std::any_of(f.begin(), f.end(), missing) ||
            std::any_of(targ_rows[r].begin(), targ_rows[r].end(), missing)) {
            ++dropped;
            continue;
        }
        for (const auto& v : f)
            fvals.push_back(*v);
        for (const auto& v : targ_rows[r])
            tvals.push_back(*v);
        ++kept;
    }
    if (kept == 0) {
        throw EmptyDataError("no usable rows in " + path.string() + " (" + std::to_string(dropped) + " dropped)");
    }

    Matrix features(kept, fdim);
    features.data = std::move(fvals);
    Matrix targets(kept, dim);
    targets.data = std::move(tvals);
    auto ds = Dataset::from_arrays(std::move(features), std::move(targets));
    ds.feature_names = spec.feature_columns;
    for (std::size_t lag : spec.lag_windows)
        for (const auto& t : spec.target_columns)
            ds.feature_names.push_back(t + "_lag" + std::to_string(lag));
    ds.target_names = spec.target_columns;
    ds.dropped_rows = dropped;
    return ds;
}

namespace {

std::vector<std::size_t> all_rows_if_empty(std::span<const std::size_t> rows, std::size_t n)
{
    if (!rows.empty())
        return {rows.begin(), rows.end()};
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
}

} // namespace

std::vector<Bounds> fit_bounds(const Matrix& targets, double margin, std::span<const std::size_t> rows)
{
    if (!(margin >= 0.0)) {
        throw ContractError("fit_bounds: margin must be nonnegative");
    }
    const auto use = all_rows_if_empty(rows, targets.rows);
    std::vector<Bounds> bounds;
    for (std::size_t d = 0; d < targets.cols; ++d) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t r : use) {
            lo = std::min(lo, targets(r, d));
            hi = std::max(hi, targets(r, d));
        }
        if (use.empty() || !(hi > lo)) {
            throw DegenerateDimensionError("target dimension " + std::to_string(d) +
                                           " needs at least two distinct values to fit bounds");
        }
        const double range = hi - lo;
        bounds.push_back({lo - margin * range, hi + margin * range});
    }
    return bounds;
}

std::vector<AffineMap> fit_feature_scaling(const Matrix& features, std::span<const std::size_t> rows)
{
    const auto use = all_rows_if_empty(rows, features.rows);
    std::vector<AffineMap> maps;
    for (std::size_t c = 0; c < features.cols; ++c) {
        double mean = 0.0;
        for (std::size_t r : use)
            mean += features(r, c);
        mean /= static_cast<double>(std::max<std::size_t>(use.size(), 1));
        double var = 0.0;
        for (std::size_t r : use)
            var += (features(r, c) - mean) * (features(r, c) - mean);
        var /= static_cast<double>(std::max<std::size_t>(use.size(), 1));
        const double sd = std::sqrt(var);
        maps.push_back({mean, sd > 0.0 ? sd : 1.0});
    }
    return maps;
}

void apply_feature_scaling(Dataset& data, std::vector<AffineMap> maps)
{
    if (maps.size() != data.features.cols) {
        throw ContractError("feature scaling: one map per feature column required");
    }
    for (std::size_t r = 0; r < data.features.rows; ++r)
        for (std::size_t c = 0; c < data.features.cols; ++c)
            data.features(r, c) = maps[c].apply(data.features(r, c));
    data.feature_scaling = std::move(maps);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_rows(std::size_t n, double validation_fraction,
                                                                         std::uint64_t seed)
{
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ContractError("validation fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    // Fisher-Yates with our own index draws so the order does not depend on
    // the standard library's shuffle implementation.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    auto n_val = static_cast<std::size_t>(std::round(validation_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, n > 1 ? 1 : 0, n > 1 ? n - 1 : 0);
    std::vector<std::size_t> val(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
    return {train, val};
}

bool within_bounds(std::span<const double> y, std::span<const Bounds> bounds)
{
    for (std::size_t d = 0; d < y.size(); ++d)
        if (!(y[d] >= bounds[d].lower && y[d] <= bounds[d].upper))
            return false;
    return true;
}

} // namespace jdan
