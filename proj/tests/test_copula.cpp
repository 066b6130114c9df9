#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "jdan/copula.hpp"
#include "jdan/verify.hpp"
#include "test_support.hpp"

using namespace jdan;

namespace {

CorrelationParams random_corr(std::size_t dim, std::mt19937_64& rng, double scale = 1.5)
{
    std::normal_distribution<double> n(0.0, scale);
    auto c = CorrelationParams::zeros(dim);
    for (auto& r : c.raw)
        r = n(rng);
    return c;
}

std::vector<double> random_unit(std::size_t dim, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(dim);
    for (auto& x : v)
        x = u(rng);
    return v;
}

//! Copula CDF evaluated in extended precision, written out from its definition.
long double copula_cdf_ld(const std::vector<double>& c, const std::vector<long double>& u)
{
    const std::size_t dim = u.size();
    long double prod = 1.0L, bracket = 0.0L;
    for (auto v : u)
        prod *= v;
    std::size_t k = 0;
    for (std::size_t d = 0; d < dim; ++d)
        for (std::size_t i = d + 1; i < dim; ++i, ++k)
            bracket += c[k] * (1.0L - u[d]) * (1.0L - u[i]) + 1.0L;
    return prod * bracket / static_cast<long double>(dim * (dim - 1) / 2);
}

double bivariate(double c, double a, double b)
{
    return a * b * (c * (1.0 - a) * (1.0 - b) + 1.0);
}

std::vector<double> ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
        r[idx[k]] = static_cast<double>(k);
    return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST_CASE("pair indexing is row-major upper triangular")
{
    CHECK(pair_count(4) == 6);
    CHECK(pair_index(4, 0, 1) == 0);
    CHECK(pair_index(4, 0, 3) == 2);
    CHECK(pair_index(4, 1, 2) == 3);
    CHECK(pair_index(4, 2, 3) == 5);
    CHECK_THROWS_AS(pair_index(4, 2, 2), ContractError);
}

TEST_CASE("correlations lie strictly inside (-1, 1)")
{
    CorrelationParams c{3, {0.0, 40.0, -40.0}};
    const auto e = c.effective();
    CHECK(e[0] == 0.0);
    CHECK(e[1] <= 1.0);
    CHECK(std::abs(std::tanh(2.0)) < 1.0);
}

TEST_CASE("copula density reference values")
{
    std::mt19937_64 rng(10);
    for (std::size_t dim = 2; dim <= 5; ++dim) {
        const auto u = random_unit(dim, rng);
        CHECK(copula_density(CorrelationParams::zeros(dim), u) == 1.0);
    }
    const double c = 0.37;
    CorrelationParams corr{2, {std::atanh(c)}};
    const std::vector<double> origin{0.0, 0.0};
    CHECK(copula_density(corr, origin) == doctest::Approx(1.0 + c).epsilon(1e-14));
}

TEST_CASE("copula density is the mixed partial of the copula cdf")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> inner(0.01, 0.99);
    for (std::size_t dim = 2; dim <= 4; ++dim) {
        // extended precision keeps the stencil's rounding below 1e-5 for D <= 3;
        // the cdf is quadratic in each coordinate, so D = 4 can use a wide step
        // without truncation error
        const long double h = dim == 4 ? 1e-2L : 1e-4L;
        for (int trial = 0; trial < 20; ++trial) {
            const auto corr = random_corr(dim, rng);
            const auto c = corr.effective();
            std::vector<double> u(dim);
            for (auto& x : u)
                x = inner(rng);
            long double acc = 0.0L;
            for (unsigned mask = 0; mask < (1u << dim); ++mask) {
                std::vector<long double> v(u.begin(), u.end());
                int minus = 0;
                for (std::size_t d = 0; d < dim; ++d) {
                    const bool neg = (mask >> d) & 1u;
                    v[d] += neg ? -h : h;
                    minus += neg;
                }
                acc += (minus % 2 ? -1.0L : 1.0L) * copula_cdf_ld(c, v);
            }
            acc /= std::pow(2.0L * h, static_cast<long double>(dim));
            REQUIRE(std::abs(static_cast<double>(acc) - copula_density(corr, u)) <= 1e-5);
        }
    }
}

TEST_CASE("copula density stays within [0, 2]")
{
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::size_t> dims(2, 8);
    for (int k = 0; k < 100000; ++k) {
        const std::size_t dim = dims(rng);
        const auto corr = random_corr(dim, rng, 5.0);
        const double c = copula_density(corr, random_unit(dim, rng));
        REQUIRE(c >= 0.0);
        REQUIRE(c <= 2.0);
    }
}

TEST_CASE("three-dimensional cdf decomposes into pair terms")
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 500; ++trial) {
        const auto corr = random_corr(3, rng);
        const auto c = corr.effective();
        const auto u = random_unit(3, rng);
        const double f12 = bivariate(c[0], u[0], u[1]);
        const double p13 = bivariate(c[1], u[0], u[2]);
        const double p23 = bivariate(c[2], u[1], u[2]);
        const double decomposed = (f12 * u[2] + u[1] * p13 + u[0] * p23) / 3.0;
        REQUIRE(std::abs(copula_cdf(corr, u) - decomposed) <= 1e-12);

        // the matching density statement: c3 is the mean of the pair densities
        const double pair_mean = ((1 + c[0] * (1 - 2 * u[0]) * (1 - 2 * u[1])) +
                                  (1 + c[1] * (1 - 2 * u[0]) * (1 - 2 * u[2])) +
                                  (1 + c[2] * (1 - 2 * u[1]) * (1 - 2 * u[2]))) /
                                 3.0;
        REQUIRE(std::abs(copula_density(corr, u) - pair_mean) <= 1e-12);
    }
}

TEST_CASE("joint cdf corners, independence and margins")
{
    std::mt19937_64 rng(14);
    for (std::size_t dim = 2; dim <= 5; ++dim) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto model = support::random_model(dim, rng);
            auto y = support::interior_point(model, rng, 0.0);
            for (std::size_t d = 0; d < dim; ++d) {
                auto z = y;
                z[d] = model.bounds(d).lower;
                REQUIRE(joint_cdf(model, z) == 0.0);
            }
            std::vector<double> top(dim);
            for (std::size_t d = 0; d < dim; ++d)
                top[d] = model.bounds(d).upper;
            REQUIRE(joint_cdf(model, top) == 1.0);
            for (std::size_t d = 0; d < dim; ++d) {
                auto z = top;
                z[d] = y[d];
                REQUIRE(joint_cdf(model, z) == model.marginal(d).cdf(y[d]));
            }
        }
    }

    const auto indep = support::uniform_model(2);
    const std::vector<double> y{0.3, 0.8};
    CHECK(joint_cdf(indep, y) == doctest::Approx(0.24).epsilon(1e-14));
    CHECK(joint_pdf(indep, y) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("joint pdf reference value and factorization")
{
    const auto model = support::uniform_model(2, {0.5});
    const std::vector<double> origin{0.0, 0.0};
    CHECK(joint_pdf(model, origin) == doctest::Approx(1.5).epsilon(1e-14));

    std::mt19937_64 rng(15);
    auto arch = ArchitectureDescriptor::make(3, {5});
    arch.bounds = {{0, 1}, {-2, 3}, {10, 11}};
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> raw(arch.output_dim());
    for (auto& r : raw)
        r = n(rng);
    std::fill(raw.end() - 3, raw.end(), 0.0);
    const auto m = materialize(raw, arch);
    const auto y = support::interior_point(m, rng, 0.1);
    double prod = 1.0;
    for (std::size_t d = 0; d < 3; ++d)
        prod *= m.marginal(d).pdf(y[d]);
    CHECK(joint_pdf(m, y) == doctest::Approx(prod).epsilon(1e-14));
}

TEST_CASE("joint pdf is nonnegative on random models")
{
    std::mt19937_64 rng(16);
    for (std::size_t dim = 2; dim <= 5; ++dim)
        for (int trial = 0; trial < 250; ++trial) {
            const auto model = support::random_model(dim, rng, 2.0);
            for (int k = 0; k < 4; ++k)
                REQUIRE(joint_pdf(model, support::interior_point(model, rng, 0.0)) >= 0.0);
        }
}

TEST_CASE("analytic density agrees with the finite-difference mixed partial")
{
    std::mt19937_64 rng(17);
    const auto indep = support::uniform_model(2);
    const std::vector<double> mid{0.4, 0.6};
    CHECK(mixed_partial_fd(indep, mid, 1e-3) == doctest::Approx(1.0).epsilon(1e-4));
    const auto indep4 = support::uniform_model(4);
    const std::vector<double> mid4{0.4, 0.6, 0.3, 0.55};
    CHECK(mixed_partial_fd(indep4, mid4, 1e-3) == doctest::Approx(1.0).epsilon(1e-3));

    for (std::size_t dim = 2; dim <= 4; ++dim)
        for (int trial = 0; trial < 30; ++trial) {
            const auto model = support::random_model(dim, rng);
            const auto y = support::interior_point(model, rng, 0.01);
            std::vector<double> h(dim);
            for (std::size_t d = 0; d < dim; ++d)
                h[d] = 1e-3 * model.bounds(d).width();
            const double pdf = joint_pdf(model, y);
            const double fd = mixed_partial_fd(model, y, h);
            double volume = 1.0;
            for (std::size_t d = 0; d < dim; ++d)
                volume *= model.bounds(d).width();
            CAPTURE(pdf);
            CAPTURE(fd);
            REQUIRE(std::abs(pdf - fd) <= 1e-3 * std::max(pdf, 1e-6 / volume));
        }

    std::vector<double> edge{0.0005, 0.5};
    CHECK_THROWS_AS(mixed_partial_fd(indep, edge, 1e-3), ContractError);
}

TEST_CASE("joint density integrates to one")
{
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 5; ++trial) {
        const auto m2 = support::random_model(2, rng);
        std::vector<Bounds> box{m2.bounds(0), m2.bounds(1)};
        const auto f2 = [&](const std::vector<double>& y) { return joint_pdf(m2, y); };
        CHECK(support::simpson_box(f2, box, 64) == doctest::Approx(1.0).epsilon(1e-3));
    }
    for (int trial = 0; trial < 2; ++trial) {
        const auto m3 = support::random_model(3, rng);
        std::vector<Bounds> box{m3.bounds(0), m3.bounds(1), m3.bounds(2)};
        const auto f3 = [&](const std::vector<double>& y) { return joint_pdf(m3, y); };
        CHECK(support::simpson_box(f3, box, 32) == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("cdf is coordinatewise nondecreasing")
{
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const std::size_t dim = 2 + k % 4;
        const auto model = support::random_model(dim, rng);
        auto y = support::interior_point(model, rng, 0.0);
        const std::size_t d = k % dim;
        auto z = y;
        z[d] = y[d] + unit(rng) * (model.bounds(d).upper - y[d]);
        const double a = joint_cdf(model, y), b = joint_cdf(model, z);
        REQUIRE(a >= 0.0);
        REQUIRE(b <= 1.0);
        REQUIRE(b >= a);
    }
}

TEST_CASE("uniform independent samples have uniform moments")
{
    const std::size_t n = 20000;
    const auto m = sample(support::uniform_model(3), n, 5);
    REQUIRE(m.rows == n);
    REQUIRE(m.cols == 3);
    for (std::size_t d = 0; d < 3; ++d) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            REQUIRE(m(r, d) >= 0.0);
            REQUIRE(m(r, d) <= 1.0);
            mean += m(r, d);
        }
        mean /= static_cast<double>(n);
        CHECK(std::abs(mean - 0.5) <= 3.0 / std::sqrt(12.0 * n));
    }
}

TEST_CASE("empirical cdf of samples matches the joint cdf")
{
    std::mt19937_64 rng(20);
    auto model = support::random_model(2, rng);
    // keep a visible dependence
    auto raw = model.raw();
    raw.back() = std::atanh(0.8);
    model = JdanModel(model.layout(), raw);

    const std::size_t n = 10000;
    const auto s = sample(model, n, 42);
    double worst = 0.0;
    for (int a = 1; a <= 20; ++a)
        for (int b = 1; b <= 20; ++b) {
            const std::vector<double> y{model.bounds(0).lower + model.bounds(0).width() * a / 20.0,
                                        model.bounds(1).lower + model.bounds(1).width() * b / 20.0};
            std::size_t count = 0;
            for (std::size_t r = 0; r < n; ++r)
                count += s(r, 0) <= y[0] && s(r, 1) <= y[1];
            worst = std::max(worst, std::abs(static_cast<double>(count) / n - joint_cdf(model, y)));
        }
    CHECK(worst <= 1.6 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("spearman rho of the bivariate copula is C / 3")
{
    const double c = 0.9;
    // 12 * integral of C(u, v) over the unit square - 3, by tensor Simpson
    const CorrelationParams corr{2, {std::atanh(c)}};
    const auto integrand = [&](const std::vector<double>& u) { return copula_cdf(corr, u); };
    const double rho_integral = 12.0 * support::simpson_box(integrand, {{0, 1}, {0, 1}}, 64) - 3.0;
    CHECK(rho_integral == doctest::Approx(c / 3.0).epsilon(1e-10));

    const std::size_t n = 20000;
    const auto s = sample(support::uniform_model(2, {c}), n, 7);
    std::vector<double> a(n), b(n);
    for (std::size_t r = 0; r < n; ++r) {
        a[r] = s(r, 0);
        b[r] = s(r, 1);
    }
    CHECK(std::abs(pearson(ranks(a), ranks(b)) - c / 3.0) <= 0.05);
}

TEST_CASE("sampling is deterministic per seed")
{
    std::mt19937_64 rng(21);
    const auto model = support::random_model(3, rng);
    const auto a = sample(model, 500, 9), b = sample(model, 500, 9), c = sample(model, 500, 10);
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
}

TEST_CASE("dimension mismatch and layout errors")
{
    const auto model = support::uniform_model(2);
    const std::vector<double> y3{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(joint_cdf(model, y3), ContractError);
    CHECK_THROWS_AS(joint_pdf(model, y3), ContractError);
    ModelLayout one{{MarginalShape{{1, 1, 1}, Activation::Linear}}, {{0, 1}}};
    CHECK_THROWS_AS(one.validate(), ContractError);
    auto raw = model.raw();
    raw.pop_back();
    CHECK_THROWS_AS(JdanModel(model.layout(), raw), ContractError);
}

TEST_CASE("full verification passes on a sharply peaked model")
{
    // One sigmoid unit with effective slope about 60 on [-1, 1]: the density
    // peak is narrow enough that a plain central stencil at h = 1e-3 (U - L)
    // misses by more than 1e-3 relative.
    auto steep = MarginalNetParams::zeros({1, 1, 1}, Activation::Sigmoid);
    steep.raw_weights = {{60.0}, {0.0}};
    steep.biases = {{-6.0}, {0.0}};
    const JdanModel model({steep, steep}, CorrelationParams{2, {std::atanh(0.7)}}, {{0.0, 1.0}, {0.0, 1.0}});

    const std::vector<double> y{0.56, 0.5};
    const double plain = mixed_partial_fd(model, y, 1e-3);
    CHECK(std::abs(plain - joint_pdf(model, y)) / joint_pdf(model, y) > 1e-3);

    const auto report = verify_model(model, VerifyLevel::Full, 0);
    for (const auto& c : report.checks) {
        INFO(c.name << ": " << c.detail);
        CHECK(c.passed);
    }
}
