#include "checks.hpp"

#include <random>

#include "mixedmop/cd.hpp"
#include "mixedmop/errors.hpp"
#include "mixedmop/tau.hpp"

namespace mixedmop::cli {

const WeightedMeasure& Context::weights() {
    return wm_.get([&] { return build_weighted_measure(cfg_); });
}

const MomentMatrix& Context::moments() {
    return mm_.get([&] { return MomentMatrix(weights(), cfg_.n1, cfg_.n2, cfg_.L); });
}

const Factorization& Context::factorization() {
    return f_.get([&] { return gauss_borel(moments()); });
}

const Factorization& Context::jacobi_factorization() {
    return fj_.get([&] {
        return gauss_borel(MomentMatrix(weights(), cfg_.n1, cfg_.n2, cfg_.L + jacobi_margin(cfg_.n1, cfg_.n2)));
    });
}

const SnakeMatrix& Context::snake() {
    return snake_.get([&] { return build_J(jacobi_factorization(), cfg_.L); });
}

ShiftConfig Context::shifts() {
    ShiftConfig sc = shift_config(cfg_, weights());
    // Bilinear runs without a shift table only move in continuous time; the sequences are never stepped.
    const Real far = weights().measure().radius() + 2;
    if (sc.lambda.empty()) sc.lambda.assign(static_cast<std::size_t>(cfg_.n1.p()), LambdaSequence::constant(far));
    if (sc.lambda_bar.empty())
        sc.lambda_bar.assign(static_cast<std::size_t>(cfg_.n2.p()), LambdaSequence::constant(far));
    return sc;
}

FlowPoint Context::origin() const { return {flow_times(cfg_), cfg_.shifts.s, cfg_.shifts.sbar}; }

std::vector<std::pair<Real, Real>> Context::sample_pairs(int count, unsigned salt) const {
    std::mt19937 gen(seed_ * 7919u + salt);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const Real lo = cfg_.measure.lo, w = cfg_.measure.hi - cfg_.measure.lo;
    std::vector<std::pair<Real, Real>> out;
    for (int i = 0; i < count; ++i) {
        const Real x = lo + w * Real(u(gen));
        const Real y = lo + w * Real(u(gen));
        out.emplace_back(x, y);
    }
    return out;
}

std::vector<Real> Context::off_support() {
    const Real r = weights().measure().radius();
    return {r + Real("0.7"), -(r + Real("1.3")), r + Real("3.1")};
}

namespace {

std::string always(const ExperimentConfig&) { return {}; }

std::string needs_legendre(const ExperimentConfig& c) {
    return is_legendre(c) ? "" : "needs p1 = p2 = 1, unit weights and Lebesgue [-1, 1]";
}

std::string needs_shifts(const ExperimentConfig& c) { return c.shifts.present ? "" : "needs a shifts section"; }

std::string needs_generators(const ExperimentConfig& c) {
    return c.measure.kind == "nikishin" ? "" : "needs a nikishin measure";
}

std::vector<Direction> directions(const ExperimentConfig& c, int j) {
    std::vector<Direction> out;
    for (int a = 0; a < c.n1.p(); ++a) out.push_back({false, j, a});
    for (int b = 0; b < c.n2.p(); ++b) out.push_back({true, j, b});
    return out;
}

std::vector<Step> steps(const ExperimentConfig& c) {
    std::vector<Step> out;
    for (int a = 0; a < c.n1.p(); ++a) out.push_back({false, a});
    for (int b = 0; b < c.n2.p(); ++b) out.push_back({true, b});
    return out;
}

const Real kH("1e-4");

Real coefficient_gap(const Poly& a, const Poly& b) {
    Real worst = 0;
    for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k) {
        const Real x = k < a.size() ? a[k] : Real(0);
        const Real y = k < b.size() ? b[k] : Real(0);
        worst = std::max(worst, Real(abs(x - y)));
    }
    return worst;
}

// Monic Legendre polynomials from the three-term recurrence.
std::vector<Poly> legendre_monic(int count) {
    std::vector<Poly> P{{Real(1)}, {Real(0), Real(1)}};
    for (int n = 1; n + 1 < count; ++n) {
        const Real c = Real(n * n) / (4 * n * n - 1);
        P.push_back(poly_add(poly_mul(P[static_cast<std::size_t>(n)], {Real(0), Real(1)}),
                             poly_scale(P[static_cast<std::size_t>(n - 1)], -c)));
    }
    return P;
}

Real mops_legendre(Context& ctx) {
    const Factorization& f = ctx.factorization();
    const auto P = legendre_monic(f.L);
    Real worst = 0;
    for (int l = 0; l < f.L; ++l)
        worst = std::max(worst, coefficient_gap(mop(f, l, 0).coeffs, P[static_cast<std::size_t>(l)]));
    return worst;
}

Real mops_determinantal(Context& ctx) {
    const MomentMatrix& mm = ctx.moments();
    const Factorization& f = ctx.factorization();
    Real worst = 0;
    for (int l = 1; l <= std::min(10, mm.size() - 1); ++l) {
        for (int a = 0; a < mm.n1().p(); ++a)
            worst = std::max(worst, coefficient_gap(mop(f, l, a).coeffs, det_mop_oracle(mm, l, a).coeffs));
        for (int b = 0; b < mm.n2().p(); ++b)
            worst = std::max(worst, coefficient_gap(dual_mop(f, l, b).coeffs, det_dual_mop_oracle(mm, l, b).coeffs));
        const Vec q = primal_form(mm.g(), l, FormRoute::factorization, &f);
        const Vec qd = primal_form(mm.g(), l, FormRoute::determinant);
        const Vec p = dual_form(mm.g(), l, FormRoute::factorization, &f);
        const Vec pd = dual_form(mm.g(), l, FormRoute::determinant);
        worst = std::max({worst, max_abs(Vec(q - qd)), max_abs(Vec(p - pd))});
    }
    return worst;
}

// Cells that are nonzero outside the predicted support, plus unit cells that are not 1.
// Symmetric measures may zero out predicted entries, so those are not counted.
Real jacobi_pattern(Context& ctx) {
    const SnakeMatrix& s = ctx.snake();
    const auto got = pattern_grid(s.J, Real("1e-10"));
    int bad = 0;
    for (int i = 0; i < s.L; ++i)
        for (int j = 0; j < s.L; ++j) {
            const Cell want = s.mask[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (want == Cell::zero) bad += got[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != '.';
            if (want == Cell::unit) bad += abs(s.J(i, j) - 1) > Real("1e-10");
        }
    return Real(bad);
}

Real jacobi_recursion(Context& ctx) {
    const SnakeMatrix& s = ctx.snake();
    const Factorization& f = ctx.jacobi_factorization();
    Real worst = 0;
    for (const char* z : {"0.3", "-0.71", "1.7", "2.9", "-3.3"}) {
        worst = std::max(worst, recursion_residual(s, f, Real(z), s.full_begin(), s.full_end()));
        worst = std::max(worst, dual_recursion_residual(s, f, Real(z), s.full_begin(), s.full_end()));
    }
    return worst;
}

Real jacobi_legendre(Context& ctx) {
    const SnakeMatrix& s = ctx.snake();
    Real worst = 0;
    for (int k = 0; k < s.L; ++k) {
        worst = std::max(worst, Real(abs(s.J(k, k))));
        if (k + 1 < s.L) worst = std::max(worst, Real(abs(s.J(k, k + 1) - 1)));
        if (k >= 1) worst = std::max(worst, Real(abs(s.J(k, k - 1) - Real(k * k) / (4 * k * k - 1))));
    }
    return worst;
}

Real cd_abc(Context& ctx) {
    const MomentMatrix& mm = ctx.moments();
    const Factorization& f = ctx.factorization();
    Real worst = 0;
    for (int l = 1; l <= std::min(12, mm.size() - 1); ++l)
        for (auto [x, y] : ctx.sample_pairs(10, 100u + static_cast<unsigned>(l)))
            worst = std::max(worst, Real(abs(abc_kernel(mm, l, x, y) - cd_kernel_sum(f, mm.source(), l, x, y))));
    return worst;
}

Real cd_formula(Context& ctx) {
    const MomentMatrix& mm = ctx.moments();
    const Factorization& f = ctx.factorization();
    Real worst = 0;
    const int lo = std::max(mm.n1().total(), mm.n2().total());
    for (int l = lo; l <= std::min(12, mm.size() - 2); ++l)
        for (auto [x, y] : ctx.sample_pairs(10, 200u + static_cast<unsigned>(l)))
            worst = std::max(worst, cd_formula_residual(mm, f, l, x, y));
    return worst;
}

Real cd_reproducing(Context& ctx) {
    const MomentMatrix& mm = ctx.moments();
    const Factorization& f = ctx.factorization();
    Real worst = 0;
    for (int l : {2, 5, 8}) {
        if (l >= mm.size()) break;
        for (auto [x, y] : ctx.sample_pairs(3, 300u + static_cast<unsigned>(l)))
            worst = std::max(worst, reproducing_residual(f, mm.source(), l, x, y));
    }
    return worst;
}

Real toda_lax(Context& ctx) {
    const FlowSetup s = flow_setup(ctx.cfg(), ctx.weights());
    const FlowTimes t = flow_times(ctx.cfg());
    Real worst = 0;
    for (int j = 1; j <= s.jmax; ++j)
        for (const Direction& d : directions(ctx.cfg(), j)) worst = std::max(worst, lax_fd_residual(s, t, d, kH));
    return worst;
}

Real toda_zs(Context& ctx) {
    const FlowSetup s = flow_setup(ctx.cfg(), ctx.weights());
    const FlowTimes t = flow_times(ctx.cfg());
    const auto dirs = directions(ctx.cfg(), 1);
    Real worst = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t k = i + 1; k < dirs.size(); ++k)
            worst = std::max(worst, zs_fd_residual(s, t, dirs[i], dirs[k], kH));
    if (s.jmax >= 2) worst = std::max(worst, zs_fd_residual(s, t, {false, 2, 0}, dirs.back(), kH));
    return worst;
}

Real toda_symmetry(Context& ctx) {
    const FlowSetup s = flow_setup(ctx.cfg(), ctx.weights());
    const FlowTimes t = flow_times(ctx.cfg());
    Real worst = 0;
    for (int j = 1; j <= s.jmax; ++j) worst = std::max(worst, symmetry_invariance_residual(s, t, j, kH));
    return worst;
}

Real toda_flow_mop(Context& ctx) {
    const FlowSetup s = flow_setup(ctx.cfg(), ctx.weights());
    const FlowTimes t = flow_times(ctx.cfg());
    const auto pts = ctx.sample_pairs(1, 400u);
    Real worst = 0;
    for (const Direction& d : directions(ctx.cfg(), 1)) {
        worst = std::max(worst, flow_mop_residual(s, t, d, kH, pts[0].first));
        worst = std::max(worst, wave_flow_residual(s, t, d, kH, pts[0].second));
    }
    return worst;
}

// Distance of the h / (h/2) error ratio from 4 for the first Lax direction and the symmetry sum.
// Residuals already at rounding level carry no ratio and are skipped.
Real toda_richardson(Context& ctx) {
    const FlowSetup s = flow_setup(ctx.cfg(), ctx.weights());
    const FlowTimes t = flow_times(ctx.cfg());
    const Direction d{false, 1, 0};
    const Real floor("1e-60");
    Real worst = 0;
    auto ratio = [&](const Real& r1, const Real& r2) {
        if (r1 > floor) worst = std::max(worst, Real(abs(r1 / r2 - 4)));
    };
    ratio(lax_fd_residual(s, t, d, kH), lax_fd_residual(s, t, d, kH / 2));
    ratio(symmetry_invariance_residual(s, t, 1, kH), symmetry_invariance_residual(s, t, 1, kH / 2));
    return worst;
}

Real discrete_omega(Context& ctx) {
    const ShiftState st = make_state(ctx.shifts(), ctx.cfg().shifts.s, ctx.cfg().shifts.sbar);
    Real worst = 0;
    for (const Step& step : steps(ctx.cfg())) {
        const OmegaReport rep = omega_factors(st, step);
        worst = std::max({worst, rep.lu_plus, rep.lu_minus, rep.ul});
    }
    return worst;
}

// Number of steps whose banded factor leaves the predicted band or fails to fill it. In binary mode
// 2N is an upper bound, so the factor only has to reach past N.
Real discrete_omega_band(Context& ctx) {
    const ShiftConfig sc = ctx.shifts();
    const ShiftState st = make_state(sc, ctx.cfg().shifts.s, ctx.cfg().shifts.sbar);
    int bad = 0;
    for (const Step& step : steps(ctx.cfg())) {
        const Composition& comp = step.bar ? sc.n2 : sc.n1;
        const int n = comp.jump(step.channel);
        const int band = omega_band(sc, step);
        const OmegaReport rep = omega_factors(st, step);
        auto at = [&](int k, int off) { return Real(abs(step.bar ? rep.banded(k + off, k) : rep.banded(k, k + off))); };
        Real edge = 0, beyond = 0;
        for (int k = 0; k < sc.L; ++k) {
            edge = std::max(edge, at(k, band));
            if (sc.binary)
                for (int off = n + 1; off <= band; ++off) beyond = std::max(beyond, at(k, off));
        }
        bad += band != (sc.binary ? 2 : 1) * n;
        bad += rep.shape >= Real("1e-60");
        bad += sc.binary ? beyond <= Real("1e-20") : edge <= Real("1e-20");
    }
    return Real(bad);
}

Real discrete_zs(Context& ctx) {
    ShiftLattice lat(ctx.shifts());
    const auto st = steps(ctx.cfg());
    Real worst = 0;
    for (std::size_t i = 0; i < st.size(); ++i)
        for (std::size_t k = i + 1; k < st.size(); ++k)
            worst = std::max(worst, dzs_residual(lat, ctx.cfg().shifts.s, ctx.cfg().shifts.sbar, st[i], st[k]));
    return worst;
}

Real discrete_links(Context& ctx) {
    const ShiftState st = make_state(ctx.shifts(), ctx.cfg().shifts.s, ctx.cfg().shifts.sbar);
    Real worst = 0;
    for (const Step& step : steps(ctx.cfg())) {
        for (const char* z : {"-1.7", "1.4", "2.3"}) {
            worst = std::max(worst, discrete_mop_link_residual(st, step, Real(z)));
            worst = std::max(worst, discrete_wave_residual(st, step, Real(z)));
        }
        worst = std::max(worst, discrete_lax_residual(st, step));
    }
    return worst;
}

Real discrete_miwa(Context& ctx) {
    const ExperimentConfig& c = ctx.cfg();
    std::vector<Real> pts = c.shifts.miwa;
    if (pts.empty()) {
        const Real r = ctx.weights().measure().radius();
        pts = {r + 2, -(r + Real("1.5"))};
    }
    Real worst = 0;
    for (int a = 0; a < c.n1.p(); ++a)
        for (const Real& lam : pts)
            worst = std::max(worst, miwa_equivalence_residual(ctx.weights(), c.n1, c.n2, std::min(c.L, 10), a, lam));
    return worst;
}

Real tau_ratio(Context& ctx) {
    const GramSource src(ctx.weights(), ctx.cfg().n1, ctx.cfg().n2);
    return tau_ratio_residual(tau_table(src, std::min(ctx.cfg().L - 2, 12)), ctx.factorization());
}

Real tau_reps(Context& ctx, bool cauchy) {
    const ExperimentConfig& c = ctx.cfg();
    Real worst = 0;
    for (int l = 0; l <= std::min(6, c.L - 2); ++l)
        for (const Real& z : ctx.off_support())
            worst = std::max(worst, cauchy ? tau_cauchy_residual(ctx.weights(), c.n1, c.n2, l, z)
                                           : tau_mop_residual(ctx.weights(), c.n1, c.n2, l, z));
    return worst;
}

enum class BilinearPart { residue, quadrature, tau, delta };

Real bilinear_check(Context& ctx, BilinearPart part) {
    const ShiftConfig sc = ctx.shifts();
    const FlowPoint left = ctx.origin();
    FlowPoint right = left;
    right.times.t.at(0).at(0) += Real("0.1");
    Real worst = 0;
    for (int k = 0; k <= 4; ++k)
        for (int l = 0; l <= 4; ++l) {
            if (part == BilinearPart::delta) {
                const BilinearReport r = bilinear(sc, left, left, k, l);
                const Real d = k == l ? 1 : 0;
                worst = std::max({worst, Real(abs(r.lhs - d)), Real(abs(r.rhs - d))});
                continue;
            }
            const BilinearReport r = bilinear(sc, left, right, k, l, 48);
            worst = std::max(worst, part == BilinearPart::residue      ? r.residual
                                    : part == BilinearPart::quadrature ? r.quadrature_gap
                                                                       : r.tau_gap);
        }
    return worst;
}

Real nikishin_hausdorff(Context& ctx) {
    const ExperimentConfig& c = ctx.cfg();
    std::vector<Measure> positive;
    if (c.measure.kind == "atoms") positive.push_back(ctx.weights().measure());
    for (const Measure& g : c.measure.generators) positive.push_back(g);
    int bad = 0;
    for (const Measure& mu : positive)
        bad += hausdorff_check(unit_interval_moments(mu, 60), 25, 25, false).verdict !=
               HausdorffVerdict::solvable_positive;
    std::vector<Real> alt;
    for (int i = 0; i < 60; ++i) alt.push_back(i % 2 ? Real(-1) : Real(1));
    bad += hausdorff_check(alt, 25, 25, false).verdict != HausdorffVerdict::fails;
    return Real(bad);
}

Real nikishin_inverse_check(Context&) {
    CoefficientTable dup(2, std::vector<Real>(80));
    for (int i = 0; i < 80; ++i) dup[0][static_cast<std::size_t>(i)] = dup[1][static_cast<std::size_t>(i)] = pow(Real(2), -i);
    const NikishinReport rep = nikishin_inverse(dup, Real("1e-12"));
    if (!rep.success) throw IncompatibleSystem(rep.failure);
    const auto& th = rep.theta.at(1).at(1);
    Real worst = rep.max_residual;
    for (std::size_t i = 0; i < th.size(); ++i) worst = std::max(worst, Real(abs(th[i] - (i == 0 ? 1 : 0))));
    return worst;
}

Real nikishin_generated(Context& ctx) {
    return nikishin_inverse(mnikishin_coefficients(ctx.cfg().measure.generators, 200), Real("1e-12")).max_residual;
}

std::vector<CheckDef> make_registry() {
    using F = std::function<Real(Context&)>;
    auto def = [](std::string name, std::string cmd, const char* tol, std::function<std::string(const ExperimentConfig&)> ap,
                  F run) { return CheckDef{std::move(name), std::move(cmd), Real(tol), std::move(ap), std::move(run)}; };
    return {
        def("moments.hankel", "moments", "1e-40", always, [](Context& c) { return hankel_residual(c.moments()); }),
        def("factorize.reconstruct", "factorize", "1e-30", always,
            [](Context& c) {
                const Mat& g = c.moments().g();
                return max_abs(Mat(c.factorization().reconstruct() - g)) / max_abs(g);
            }),
        def("mops.biorthogonality", "mops", "1e-10", always,
            [](Context& c) {
                return biorthogonality_residual(c.factorization(), c.weights(), std::min(c.cfg().L, 30) - 1);
            }),
        def("mops.determinantal", "mops", "1e-8", always, mops_determinantal),
        def("mops.legendre", "mops", "1e-10", needs_legendre, mops_legendre),
        def("jacobi.pattern", "jacobi", "0", always, jacobi_pattern),
        def("jacobi.recursion", "jacobi", "1e-8", always, jacobi_recursion),
        def("jacobi.string_identity", "jacobi", "1e-9", always,
            [](Context& c) { return string_identity_residual(c.jacobi_factorization()); }),
        def("jacobi.legendre", "jacobi", "1e-10", needs_legendre, jacobi_legendre),
        def("cd.abc", "cd", "1e-9", always, cd_abc),
        def("cd.formula", "cd", "1e-8", always, cd_formula),
        def("cd.reproducing", "cd", "1e-7", always, cd_reproducing),
        def("toda.lax", "toda", "1e-5", always, toda_lax),
        def("toda.zs", "toda", "1e-5", always, toda_zs),
        def("toda.symmetry", "toda", "1e-5", always, toda_symmetry),
        def("toda.flow_mop", "toda", "1e-5", always, toda_flow_mop),
        def("toda.richardson", "toda", "0.5", always, toda_richardson),
        def("discrete.omega", "discrete", "1e-8", needs_shifts, discrete_omega),
        def("discrete.omega_band", "discrete", "0", needs_shifts, discrete_omega_band),
        def("discrete.zs", "discrete", "1e-8", needs_shifts, discrete_zs),
        def("discrete.links", "discrete", "1e-8", needs_shifts, discrete_links),
        def("discrete.miwa", "discrete", "1e-9", always, discrete_miwa),
        def("tau.ratio", "tau", "1e-9", always, tau_ratio),
        def("tau.mops", "tau", "1e-8", always, [](Context& c) { return tau_reps(c, false); }),
        def("tau.cauchy", "tau", "1e-8", always, [](Context& c) { return tau_reps(c, true); }),
        def("bilinear.residue", "bilinear", "1e-6", always,
            [](Context& c) { return bilinear_check(c, BilinearPart::residue); }),
        def("bilinear.quadrature", "bilinear", "1e-7", always,
            [](Context& c) { return bilinear_check(c, BilinearPart::quadrature); }),
        def("bilinear.tau", "bilinear", "1e-6", always, [](Context& c) { return bilinear_check(c, BilinearPart::tau); }),
        def("bilinear.delta", "bilinear", "1e-10", always,
            [](Context& c) { return bilinear_check(c, BilinearPart::delta); }),
        def("nikishin.hausdorff", "nikishin", "0", always, nikishin_hausdorff),
        def("nikishin.inverse", "nikishin", "1e-12", always, nikishin_inverse_check),
        def("nikishin.generated", "nikishin", "1e-12", needs_generators, nikishin_generated),
    };
}

}  // namespace

const std::vector<CheckDef>& check_registry() {
    static const std::vector<CheckDef> reg = make_registry();
    return reg;
}

const CheckDef* find_check(const std::string& name) {
    for (const CheckDef& c : check_registry())
        if (c.name == name) return &c;
    return nullptr;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"moments", "factorize", "mops",     "jacobi",   "cd",        "toda",
                                                   "discrete", "tau",      "bilinear", "nikishin", "verify-all"};
    return names;
}

}  // namespace mixedmop::cli
