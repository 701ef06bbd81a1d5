#include "runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "checks.hpp"
#include "output.hpp"
#include "mixedmop/cd.hpp"
#include "mixedmop/errors.hpp"
#include "mixedmop/tau.hpp"

#ifndef MIXEDMOP_VERSION
#define MIXEDMOP_VERSION "0.0.0"
#endif

namespace mixedmop::cli {

using nlohmann::json;

namespace {

struct Outcome {
    const CheckDef* def = nullptr;
    Real tolerance = 0;
    std::optional<Real> residual;
    std::string error;
    double seconds = 0;

    bool pass() const { return residual && !isnan(*residual) && *residual <= tolerance; }
};

bool in_command(const CheckDef& d, const std::string& cmd) { return cmd == "verify-all" || d.command == cmd; }

std::vector<const CheckDef*> select_checks(const RunOptions& opt, const ExperimentConfig& cfg) {
    std::vector<const CheckDef*> out;
    std::set<std::string> seen;
    auto take = [&](const CheckDef* d) {
        if (seen.insert(d->name).second) out.push_back(d);
    };
    auto lookup = [&](const std::string& name, const std::string& field) {
        const CheckDef* d = find_check(name);
        if (!d) throw ConfigError(field + ": unknown check '" + name + "'");
        const std::string why = d->applies(cfg);
        if (!why.empty()) throw ConfigError(field + ": check '" + name + "' " + why);
        return d;
    };

    if (!opt.checks.empty()) {
        for (const std::string& n : opt.checks) {
            const CheckDef* d = lookup(n, "--check");
            if (!in_command(*d, opt.command))
                throw ConfigError("--check: '" + n + "' does not belong to command " + opt.command);
            take(d);
        }
        return out;
    }
    if (!cfg.checks.empty()) {
        for (std::size_t i = 0; i < cfg.checks.size(); ++i) {
            const CheckDef* d = lookup(cfg.checks[i], "checks[" + std::to_string(i) + "]");
            if (in_command(*d, opt.command)) take(d);
        }
        return out;
    }
    for (const CheckDef& d : check_registry())
        if (in_command(d, opt.command) && d.applies(cfg).empty()) take(&d);
    return out;
}

void run_checks(std::vector<Outcome>& results, Context& ctx, int threads) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < results.size(); i = next++) {
            Outcome& r = results[i];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                r.residual = r.def->run(ctx);
            } catch (const Error& e) {
                r.error = e.what();
            } catch (const std::exception& e) {
                r.error = std::string("InternalError: ") + e.what();
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(results.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

using Writer = std::function<void(const std::string&, const std::string&)>;

void moments_artifacts(Context& ctx, const Writer& w) { w("g.csv", matrix_csv(ctx.moments().g())); }

void factorize_artifacts(Context& ctx, const Writer& w) {
    const Factorization& f = ctx.factorization();
    w("S.csv", matrix_csv(f.S));
    w("Sbar.csv", matrix_csv(f.Sbar));
    Csv piv({"index", "pivot"});
    for (std::size_t i = 0; i < f.pivots.size(); ++i) piv.row({cell(static_cast<int>(i)), cell(f.pivots[i])});
    w("pivots.csv", piv.str());
}

void mops_artifacts(Context& ctx, const Writer& w) {
    const Factorization& f = ctx.factorization();
    std::vector<MopPolynomial> a, b;
    for (int l = 0; l < f.L; ++l) {
        for (int ch = 0; ch < f.n1.p(); ++ch) a.push_back(mop(f, l, ch));
        for (int ch = 0; ch < f.n2.p(); ++ch) b.push_back(dual_mop(f, l, ch));
    }
    w("mops.csv", poly_csv(a));
    w("dual_mops.csv", poly_csv(b));
}

std::string grid_text(const std::vector<std::string>& rows) {
    std::string s;
    for (const auto& r : rows) s += r + '\n';
    return s;
}

void jacobi_artifacts(Context& ctx, const Writer& w) {
    const SnakeMatrix& s = ctx.snake();
    w("J.csv", band_csv(s.J, s.lower_bandwidth(), s.upper_bandwidth()));
    w("pattern.txt", grid_text(pattern_grid(s.J, Real("1e-10"))));
    w("pattern_predicted.txt", grid_text(pattern_grid(s.mask)));
}

void cd_artifacts(Context& ctx, const Writer& w) {
    const MomentMatrix& mm = ctx.moments();
    const Factorization& f = ctx.factorization();
    Csv csv({"level", "x", "y", "kernel_sum", "abc_kernel"});
    for (int l = 1; l <= std::min(12, mm.size() - 1); ++l)
        for (auto [x, y] : ctx.sample_pairs(3, 500u + static_cast<unsigned>(l)))
            csv.row({cell(l), cell(x), cell(y), cell(cd_kernel_sum(f, mm.source(), l, x, y)), cell(abc_kernel(mm, l, x, y))});
    w("kernel.csv", csv.str());
}

void tau_artifacts(Context& ctx, const Writer& w) {
    const GramSource src(ctx.weights(), ctx.cfg().n1, ctx.cfg().n2);
    const TauTable t = tau_table(src, std::min(ctx.cfg().L - 2, 12));
    Csv csv({"level", "tau"});
    for (std::size_t l = 0; l < t.tau.size(); ++l) csv.row({cell(static_cast<int>(l)), cell(t.tau[l])});
    w("tau.csv", csv.str());
}

void nikishin_artifacts(Context& ctx, const Writer& w) {
    Csv csv({"sequence", "verdict"});
    const ExperimentConfig& c = ctx.cfg();
    if (c.measure.kind != "nikishin")
        csv.row({"measure", to_string(hausdorff_check(unit_interval_moments(ctx.weights().measure(), 60), 25, 25, false)
                                          .verdict)});
    for (std::size_t k = 0; k < c.measure.generators.size(); ++k)
        csv.row({"generator" + std::to_string(k + 1),
                 to_string(hausdorff_check(unit_interval_moments(c.measure.generators[k], 60), 25, 25, false).verdict)});
    if (!c.measure.generators.empty()) {
        const NikishinReport rep = nikishin_inverse(mnikishin_coefficients(c.measure.generators, 200), Real("1e-12"));
        csv.row({"generated_inverse", rep.success ? "success" : "failure: " + rep.failure});
    }
    w("hausdorff.csv", csv.str());
}

const std::vector<std::pair<std::string, std::function<void(Context&, const Writer&)>>>& artifact_table() {
    static const std::vector<std::pair<std::string, std::function<void(Context&, const Writer&)>>> t = {
        {"moments", moments_artifacts}, {"factorize", factorize_artifacts}, {"mops", mops_artifacts},
        {"jacobi", jacobi_artifacts},   {"cd", cd_artifacts},               {"tau", tau_artifacts},
        {"nikishin", nikishin_artifacts},
    };
    return t;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

int run(const RunOptions& opt, std::ostream& log) {
    const auto& cmds = command_names();
    if (std::find(cmds.begin(), cmds.end(), opt.command) == cmds.end()) {
        log << "error: unknown command '" << opt.command << "'\n";
        return 2;
    }
    ExperimentConfig cfg;
    std::vector<const CheckDef*> selected;
    try {
        cfg = load_config(opt.config_path);
        for (const auto& [name, _] : cfg.tolerances)
            if (!find_check(name)) throw ConfigError("tolerances." + name + ": unknown check");
        selected = select_checks(opt, cfg);
        if (!(opt.tolerance_scale > 0)) throw ConfigError("--tolerance-scale: must be positive");
        if (opt.threads < 1) throw ConfigError("--threads: must be at least 1");
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return 2;
    }

    Context ctx(cfg, opt.seed);
    std::vector<Outcome> results;
    for (const CheckDef* d : selected) {
        Outcome o;
        o.def = d;
        auto it = cfg.tolerances.find(d->name);
        o.tolerance = (it == cfg.tolerances.end() ? d->tolerance : it->second) * Real(opt.tolerance_scale);
        results.push_back(std::move(o));
    }
    run_checks(results, ctx, opt.threads);

    std::vector<std::string> errors;
    auto writer = [&](const std::string& file, const std::string& content) { write_atomic(opt.out / file, content); };
    for (const auto& [cmd, fn] : artifact_table()) {
        if (opt.command != "verify-all" && opt.command != cmd) continue;
        try {
            fn(ctx, writer);
        } catch (const std::exception& e) {
            errors.push_back(cmd + " artifacts: " + e.what());
        }
    }

    json checks = json::array();
    Csv csv({"name", "residual", "tolerance", "pass"});
    bool ok = errors.empty();
    for (const Outcome& r : results) {
        json j;
        j["name"] = r.def->name;
        j["residual"] = r.residual ? number_or_null(to_double(*r.residual)) : json(nullptr);
        j["tolerance"] = to_double(r.tolerance);
        j["pass"] = r.pass();
        j["seconds"] = opt.timing ? r.seconds : 0.0;
        if (!r.error.empty()) j["error"] = r.error;
        checks.push_back(std::move(j));
        csv.row({r.def->name, r.residual ? cell(*r.residual) : "nan", cell(r.tolerance), r.pass() ? "true" : "false"});
        ok = ok && r.pass();
        log << (r.pass() ? "PASS " : "FAIL ") << r.def->name << "  residual="
            << (r.residual ? format_real(*r.residual, 3) : "n/a") << "  tolerance=" << format_real(r.tolerance, 3);
        if (!r.error.empty()) log << "  " << r.error;
        log << '\n';
    }
    for (const auto& e : errors) log << "ERROR " << e << '\n';

    json report;
    report["version"] = MIXEDMOP_VERSION;
    report["command"] = opt.command;
    report["config_echo"] = cfg.source;
    report["options"] = {{"seed", opt.seed}, {"tolerance_scale", opt.tolerance_scale}};
    report["checks"] = std::move(checks);
    report["errors"] = errors;
    try {
        write_atomic(opt.out / "checks.csv", csv.str());
        write_atomic(opt.out / "report.json", report.dump(2) + "\n");
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
    return ok ? 0 : 1;
}

}  // namespace mixedmop::cli
