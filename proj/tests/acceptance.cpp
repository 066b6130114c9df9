// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
//   jdan_acceptance [scratch_dir] [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "jdan/metrics.hpp"
#include "jdan/miso.hpp"
#include "jdan/model_io.hpp"
#include "jdan/training.hpp"
#include "test_support.hpp"

using namespace jdan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

fs::path g_scratch;

//! Random materialized model: every raw value N(0, scale^2), hidden
//! activation alternating sigmoid / tanh.
JdanModel any_model(std::size_t dim, std::mt19937_64& rng, double scale = 1.0)
{
    const auto act = (rng() & 1u) ? Activation::Tanh : Activation::Sigmoid;
    return support::random_model(dim, rng, scale, {10, 10}, act);
}

double volume(const JdanModel& m)
{
    double v = 1.0;
    for (std::size_t d = 0; d < m.dim(); ++d)
        v *= m.bounds(d).width();
    return v;
}

// 1 --------------------------------------------------------------------------
Outcome nonnegativity()
{
    std::mt19937_64 rng(101);
    std::size_t violations = 0, evaluated = 0;
    double smallest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 1000; ++k) {
        const std::size_t dim = 2 + k % 4;
        const auto model = any_model(dim, rng, 2.0);
        for (int j = 0; j < 100; ++j) {
            const double p = joint_pdf(model, support::interior_point(model, rng, 0.0));
            ++evaluated;
            smallest = std::min(smallest, p);
            if (!(p >= 0.0))
                ++violations;
        }
    }
    return {violations == 0, std::to_string(evaluated) + " evaluations, " + std::to_string(violations) +
                                 " negative, min " + fmt("%.3g", smallest)};
}

// 2 --------------------------------------------------------------------------
Outcome fd_equivalence()
{
    std::mt19937_64 rng(102);
    double worst = 0.0;
    std::size_t draws = 0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t dim = 2 + k % 3;
        const auto model = any_model(dim, rng);
        std::vector<double> h(dim);
        for (std::size_t d = 0; d < dim; ++d)
            h[d] = 1e-3 * model.bounds(d).width();
        // keep the stencil inside the box
        const auto y = support::interior_point(model, rng, 2e-3);
        const double pdf = joint_pdf(model, y);
        const double fd = mixed_partial_fd(model, y, h);
        worst = std::max(worst, std::abs(pdf - fd) / std::abs(pdf));
        ++draws;
    }
    return {worst <= 1e-3, std::to_string(draws) + " draws, max relative error " + fmt("%.3g", worst) +
                               " (tolerance 1e-3)"};
}

// 3 --------------------------------------------------------------------------
Outcome cdf_battery()
{
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t violations = 0, pairs = 0, checks = 0;
    double worst_corner = 0.0, worst_margin = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const std::size_t dim = 2 + k % 4;
        const auto model = any_model(dim, rng);
        const auto y = support::interior_point(model, rng, 0.0);

        const double a = joint_cdf(model, y);
        violations += !(a >= 0.0 && a <= 1.0);

        const std::size_t d = k % dim;
        auto z = y;
        z[d] = y[d] + unit(rng) * (model.bounds(d).upper - y[d]);
        violations += !(joint_cdf(model, z) >= a);
        ++pairs;

        if (k % 10 == 0) {
            std::vector<double> top(dim);
            for (std::size_t i = 0; i < dim; ++i)
                top[i] = model.bounds(i).upper;
            worst_corner = std::max(worst_corner, std::abs(joint_cdf(model, top) - 1.0));
            for (std::size_t i = 0; i < dim; ++i) {
                auto face = y;
                face[i] = model.bounds(i).lower;
                violations += joint_cdf(model, face) != 0.0;
                auto margin = top;
                margin[i] = y[i];
                worst_margin = std::max(worst_margin, std::abs(joint_cdf(model, margin) - model.marginal(i).cdf(y[i])));
                checks += 2;
            }
            ++checks;
        }
    }
    violations += worst_corner > 1e-12;
    violations += worst_margin > 1e-12;
    return {violations == 0, std::to_string(pairs) + " monotone pairs, " + std::to_string(checks) +
                                 " face/corner/margin checks, " + std::to_string(violations) +
                                 " violations, corner error " + fmt("%.2g", worst_corner) + ", margin error " +
                                 fmt("%.2g", worst_margin)};
}

// 4 --------------------------------------------------------------------------
Outcome normalization()
{
    std::mt19937_64 rng(104);
    bool ok = true;
    std::ostringstream detail;
    detail.precision(7);
    const auto box = [](const JdanModel& m) {
        std::vector<Bounds> b;
        for (std::size_t d = 0; d < m.dim(); ++d)
            b.push_back(m.bounds(d));
        return b;
    };
    double lo2 = 2, hi2 = 0, lo3 = 2, hi3 = 0, lo4 = 2, hi4 = 0;
    for (int k = 0; k < 10; ++k) {
        const auto m = any_model(2, rng);
        const double v = support::simpson_box([&](const std::vector<double>& y) { return joint_pdf(m, y); }, box(m), 128);
        lo2 = std::min(lo2, v);
        hi2 = std::max(hi2, v);
    }
    for (int k = 0; k < 4; ++k) {
        const auto m = any_model(3, rng);
        const double v = support::simpson_box([&](const std::vector<double>& y) { return joint_pdf(m, y); }, box(m), 48);
        lo3 = std::min(lo3, v);
        hi3 = std::max(hi3, v);
    }
    for (int k = 0; k < 2; ++k) {
        const auto m = any_model(4, rng);
        std::mt19937_64 mc(1000 + k);
        double acc = 0.0;
        std::vector<double> y(4);
        for (int s = 0; s < 1000000; ++s) {
            for (std::size_t d = 0; d < 4; ++d)
                y[d] = std::uniform_real_distribution<double>(m.bounds(d).lower, m.bounds(d).upper)(mc);
            acc += joint_pdf(m, y);
        }
        const double v = acc / 1e6 * volume(m);
        lo4 = std::min(lo4, v);
        hi4 = std::max(hi4, v);
    }
    ok = lo2 >= 0.999 && hi2 <= 1.001 && lo3 >= 0.999 && hi3 <= 1.001 && lo4 >= 0.995 && hi4 <= 1.005;
    detail << "D=2 Simpson [" << lo2 << ", " << hi2 << "], D=3 Simpson [" << lo3 << ", " << hi3
           << "] (band [0.999, 1.001]); D=4 MC 1e6 [" << lo4 << ", " << hi4 << "] (band [0.995, 1.005])";
    return {ok, detail.str()};
}

// 5 --------------------------------------------------------------------------
Outcome trichotomy()
{
    bool ok = true;
    std::ostringstream detail;
    for (auto act : {Activation::Sigmoid, Activation::Tanh}) {
        std::size_t worst = 0;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            WitnessSearch s;
            s.activation = act;
            s.seed = seed;
            const auto r = find_negative_witness(s);
            ok = ok && r.witness.has_value() && r.witness->value < -1e-8;
            worst = std::max(worst, r.witness ? r.witness->trial : s.max_trials + 1);
        }
        detail << to_string(act) << " witness by trial " << worst << "; ";
    }
    for (auto act : {Activation::Linear, Activation::ReLU, Activation::Exponential}) {
        std::size_t skipped = 0;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            WitnessSearch s;
            s.activation = act;
            s.seed = seed;
            const auto r = find_negative_witness(s);
            ok = ok && !r.witness.has_value() && r.trials_run == 10000;
            skipped += r.skipped_nonfinite;
        }
        detail << to_string(act) << " none in 5x10^4";
        if (skipped)
            detail << " (" << skipped << " non-finite skipped)";
        detail << "; ";
    }

    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::size_t nonpositive = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto p = MisoNetParams::random({2, 8, 1}, Activation::Sigmoid, rng);
        const std::vector<double> y{u(rng), u(rng)};
        for (double g : miso_grad(p, y))
            nonpositive += !(g > 0.0);
    }
    ok = ok && nonpositive == 0;
    detail << "grad nonpositive entries " << nonpositive << "/2000; ";

    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        auto p = MisoNetParams::random({2, 8, 1}, Activation::Sigmoid, rng);
        p.activations.back() = Activation::Linear;
        const std::vector<double> y{u(rng), u(rng)};
        const double v = miso_mixed_partial(p, y, 0, 1);
        const double fd = miso_mixed_partial_fd(p, y, 0, 1, 1e-4);
        worst = std::max(worst, std::abs(v - fd) / std::abs(v));
    }
    ok = ok && worst <= 1e-3;
    detail << "closed-form vs FD max relative error " << fmt("%.3g", worst);
    return {ok, detail.str()};
}

// 6 --------------------------------------------------------------------------
Outcome gradients()
{
    std::mt19937_64 rng(106);
    double worst = 0.0;
    std::size_t coords = 0;
    for (int k = 0; k < 50; ++k) {
        const std::size_t dim = 2 + k % 2;
        const std::size_t features = (k / 2) % 3 == 0 ? 0 : 1 + k % 3;
        const auto act = k % 4 < 2 ? Activation::Sigmoid : Activation::Tanh;
        auto arch = ArchitectureDescriptor::make(dim, {6, 5}, act, features, {8});
        std::uniform_real_distribution<double> lo(-2.0, 2.0);
        for (std::size_t d = 0; d < dim; ++d) {
            const double l = lo(rng);
            arch.bounds.push_back({l, l + 1.0 + std::abs(lo(rng))});
        }
        std::normal_distribution<double> n(0.0, 1.0);
        ConditioningNet net = ConditioningNet::initialize(arch, rng);
        auto params = net.parameters();
        for (auto& p : params)
            p += 0.3 * n(rng); // move away from the initialization
        net.set_parameters(params);

        const std::size_t rows = 6;
        Matrix x(rows, features), y(rows, dim);
        for (auto& v : x.data)
            v = n(rng);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t d = 0; d < dim; ++d)
                y(r, d) = std::uniform_real_distribution<double>(arch.bounds[d].lower, arch.bounds[d].upper)(rng);
        const auto data = Dataset::from_arrays(x, y);
        std::vector<std::size_t> idx(rows);
        std::iota(idx.begin(), idx.end(), 0);
        const auto r = grad_check(net, arch, data, idx, 1e-5, 200, k);
        worst = std::max(worst, r.max_relative_error);
        coords += r.checked;
    }
    return {worst <= 1e-4, "50 configurations, " + std::to_string(coords) + " coordinates, max relative error " +
                               fmt("%.3g", worst) + " (tolerance 1e-4)"};
}

// 7 --------------------------------------------------------------------------
struct Fit {
    double fitted_c = 0.0;
    double val_nll = 0.0;
    double reference_nll = 0.0;
    std::size_t epochs = 0;
};

Fit fit_unconditional(const JdanModel& generator, std::size_t n, std::uint64_t seed)
{
    const Matrix y = sample(generator, n, seed);
    const auto data = Dataset::from_arrays(Matrix(n, 0), y);
    auto arch = ArchitectureDescriptor::make(2);
    arch.bounds = {generator.bounds(0), generator.bounds(1)};
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 64;
    cfg.max_epochs = 200;
    cfg.patience = 20;
    cfg.seed = seed;
    const auto result = train(data, arch, cfg);

    Fit fit;
    fit.epochs = result.report.stopped_epoch;
    fit.val_nll = result.report.best_validation_nll;
    fit.fitted_c = materialize(nfn_forward(result.net, {}), result.arch).correlations()[0];
    for (std::size_t r : result.report.validation_rows)
        fit.reference_nll -= std::log(joint_pdf(generator, y.row(r)) + kLogGuard);
    fit.reference_nll /= static_cast<double>(result.report.validation_rows.size());
    return fit;
}

Outcome recovery()
{
    // generator: shaped marginals from the standard initializer plus C = 0.6
    auto arch = ArchitectureDescriptor::make(2);
    arch.bounds = {{-1.0, 2.0}, {0.0, 5.0}};
    std::mt19937_64 rng(107);
    auto raw = init_raw_vector(arch.layout(), rng);
    std::normal_distribution<double> n(0.0, 0.5);
    for (std::size_t k = 0; k + 1 < raw.size(); ++k)
        raw[k] += n(rng);
    raw.back() = std::atanh(0.6);
    const auto generator = materialize(raw, arch);
    const auto dep = fit_unconditional(generator, 5000, 11);

    const auto uniform = support::uniform_model(2);
    const auto ind = fit_unconditional(uniform, 5000, 12);

    const bool ok = dep.fitted_c >= 0.45 && dep.fitted_c <= 0.75 && std::abs(dep.val_nll - dep.reference_nll) <= 0.1 &&
                    std::abs(ind.fitted_c) <= 0.1 && std::abs(ind.val_nll) <= 0.05;
    std::ostringstream d;
    d.precision(4);
    d << "C=0.6: fitted " << dep.fitted_c << ", val NLL " << dep.val_nll << " vs generator " << dep.reference_nll
      << " (" << dep.epochs << " epochs); uniform: fitted C " << ind.fitted_c << ", val NLL " << ind.val_nll << " ("
      << ind.epochs << " epochs)";
    return {ok, d.str()};
}

// 8 --------------------------------------------------------------------------
Outcome spearman()
{
    const double c = 0.9;
    const CorrelationParams corr{2, {std::atanh(c)}};
    const double integral =
        12.0 * support::simpson_box([&](const std::vector<double>& u) { return copula_cdf(corr, u); }, {{0, 1}, {0, 1}}, 64) - 3.0;
    const bool identity = std::abs(integral - c / 3.0) <= 1e-9;

    std::mt19937_64 rng(108);
    auto model = support::random_model(2, rng);
    auto raw = model.raw();
    raw.back() = std::atanh(c);
    model = JdanModel(model.layout(), raw);
    const std::size_t n = 20000;
    const Matrix s = sample(model, n, 8);
    const auto ranks = [&](std::size_t col) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s(a, col) < s(b, col); });
        std::vector<double> r(n);
        for (std::size_t k = 0; k < n; ++k)
            r[idx[k]] = static_cast<double>(k);
        return r;
    };
    const auto ra = ranks(0), rb = ranks(1);
    const double mean = (n - 1) / 2.0;
    double sab = 0, saa = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sab += (ra[k] - mean) * (rb[k] - mean);
        saa += (ra[k] - mean) * (ra[k] - mean);
    }
    const double rho = sab / saa;
    return {identity && std::abs(rho - c / 3.0) <= 0.05,
            "integral identity " + fmt("%.12f", integral) + " vs C/3; sample rho " + fmt("%.4f", rho) +
                " vs " + fmt("%.4f", c / 3.0) + " (tolerance 0.05)"};
}

// 9 --------------------------------------------------------------------------
Outcome calibration()
{
    const std::size_t n = 2000;
    const double band = 1.63 / std::sqrt(static_cast<double>(n));
    std::size_t failing_seeds = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(900 + seed);
        const std::size_t dim = 2 + seed % 2;
        const auto model = any_model(dim, rng);
        const auto data = Dataset::from_arrays(Matrix(n, 0), sample(model, n, seed));
        const Forecaster f(model);
        bool fail = false;
        for (std::size_t d = 0; d < dim; ++d) {
            const double ks = pit_ks(f, data, d);
            worst = std::max(worst, ks);
            fail = fail || ks > band;
        }
        failing_seeds += fail;
    }
    return {failing_seeds <= 1, std::to_string(failing_seeds) + "/20 seeds above the band " + fmt("%.4f", band) +
                                    ", max KS " + fmt("%.4f", worst)};
}

// 10 -------------------------------------------------------------------------
std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism()
{
    const fs::path dir = g_scratch / "determinism";
    fs::create_directories(dir);
    {
        std::mt19937_64 rng(110);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::ofstream csv(dir / "data.csv");
        csv.precision(17);
        csv << "x,y1,y2\n";
        for (int r = 0; r < 1500; ++r) {
            const double x = u(rng);
            csv << x << ',' << std::min(1.0, 0.5 * x + 0.5 * u(rng)) << ',' << u(rng) << '\n';
        }
    }
    const nlohmann::json cfg = {
        {"data", {{"path", "data.csv"}, {"feature_columns", {"x"}}, {"target_columns", {"y1", "y2"}}, {"lag_windows", {1}}}},
        {"architecture", {{"marginal_hidden", {6}}, {"hypernet_hidden", {8}}}},
        {"train", {{"seed", 4}, {"max_epochs", 6}, {"learning_rate", 0.01}}}};
    std::ofstream(dir / "config.json") << cfg.dump(2);

    std::ostringstream out, err;
    const auto run = [&](std::vector<std::string> args) { return cli::run(args, out, err); };
    const std::string config = (dir / "config.json").string();
    int codes = 0;
    codes += run({"--config", config, "--quiet", "--out", (dir / "a").string(), "train"});
    codes += run({"--config", config, "--quiet", "--out", (dir / "b").string(), "train"});
    const bool report_same = slurp(dir / "a" / "report.csv") == slurp(dir / "b" / "report.csv");
    const bool model_same = slurp(dir / "a" / "model.json") == slurp(dir / "b" / "model.json");

    const std::string model = (dir / "a" / "model.json").string();
    codes += run({"--seed", "9", "--out", (dir / "s1.csv").string(), "sample", "--model", model, "--x", "0.3,0.4,0.2", "--n", "2000"});
    codes += run({"--seed", "9", "--out", (dir / "s2.csv").string(), "sample", "--model", model, "--x", "0.3,0.4,0.2", "--n", "2000"});
    const bool sample_same = slurp(dir / "s1.csv") == slurp(dir / "s2.csv") && !slurp(dir / "s1.csv").empty();
    const bool nonempty = !slurp(dir / "a" / "report.csv").empty();

    std::ostringstream d;
    d << "train reports " << (report_same ? "identical" : "DIFFER") << ", models "
      << (model_same ? "identical" : "DIFFER") << ", sample CSVs " << (sample_same ? "identical" : "DIFFER")
      << ", exit codes sum " << codes;
    if (codes != 0)
        d << " (" << err.str() << ")";
    return {codes == 0 && report_same && model_same && sample_same && nonempty, d.str()};
}

} // namespace

int main(int argc, char** argv)
{
    g_scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "jdan_acceptance";
    fs::create_directories(g_scratch);
    std::set<int> only;
    for (int k = 2; k < argc; ++k)
        only.insert(std::stoi(argv[k]));

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "density nonnegativity", nonnegativity},
        {2, "analytic density vs finite-difference mixed partial", fd_equivalence},
        {3, "joint CDF validity battery", cdf_battery},
        {4, "density normalization", normalization},
        {5, "multi-input network trichotomy", trichotomy},
        {6, "gradient check", gradients},
        {7, "self-consistency recovery", recovery},
        {8, "Spearman identity", spearman},
        {9, "PIT calibration on the true model", calibration},
        {10, "determinism of train and sample", determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id))
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << " ("
                  << fmt("%.1f", secs) << " s)" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
