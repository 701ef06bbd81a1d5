// One line per acceptance criterion; exit status 1 if any line fails.
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mixedmop/cd.hpp"
#include "mixedmop/errors.hpp"
#include "mixedmop/tau.hpp"
#include "snake_display.hpp"

using namespace mixedmop;

namespace {

struct Line {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
    // Records value against tol and returns whether it is within.
    bool bound(const std::string& label, const Real& value, const Real& tol) {
        detail << ' ' << label << '=' << format_real(value, 3) << " (<" << format_real(tol, 2) << ")";
        const bool ok = value < tol;
        if (!ok) pass = false;
        return ok;
    }
};

std::vector<std::pair<Real, Real>> sample_pairs(int count, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-0.9, 0.9);
    std::vector<std::pair<Real, Real>> out;
    for (int i = 0; i < count; ++i) out.emplace_back(Real(d(gen)), Real(d(gen)));
    return out;
}

Real coefficient_gap(const Poly& a, const Poly& b) {
    Real worst = 0;
    for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k)
        worst = std::max(worst, Real(abs((k < a.size() ? a[k] : Real(0)) - (k < b.size() ? b[k] : Real(0)))));
    return worst;
}

const Composition kOne({1});
const Composition kN1({2, 1});
const Composition kN2({1, 1});

void legendre_reduction(Line& out) {
    const int L = 20;
    const Factorization f = gauss_borel(MomentMatrix(fixtures::legendre(), kOne, kOne, L));
    std::vector<Poly> P{{Real(1)}, {Real(0), Real(1)}};
    for (int n = 1; n + 1 < L; ++n)
        P.push_back(poly_add(poly_mul(P[static_cast<std::size_t>(n)], {Real(0), Real(1)}),
                             poly_scale(P[static_cast<std::size_t>(n - 1)], -Real(n * n) / (4 * n * n - 1))));
    Real gap = 0;
    for (int l = 0; l < L; ++l) gap = std::max(gap, coefficient_gap(mop(f, l, 0).coeffs, P[static_cast<std::size_t>(l)]));
    out.bound("monic gap", gap, Real("1e-10"));

    const auto fj = gauss_borel(MomentMatrix(fixtures::legendre(), kOne, kOne, L + jacobi_margin(kOne, kOne)));
    const SnakeMatrix s = build_J(fj, L);
    Real jgap = 0;
    for (int k = 0; k < L; ++k)
        for (int j = 0; j < L; ++j) {
            const Real want = j == k + 1 ? Real(1) : j + 1 == k ? Real(k * k) / (4 * k * k - 1) : Real(0);
            jgap = std::max(jgap, Real(abs(s.J(k, j) - want)));
        }
    out.bound("J gap", jgap, Real("1e-10"));
}

void biorthogonality(Line& out) {
    const WeightedMeasure single(fixtures::random_atoms(40, 3), {Weight()}, {Weight::exponential(1)});
    const WeightedMeasure mixed = fixtures::atomic_mixed();
    Real worst = 0;
    for (const auto& [wm, n1, n2] : {std::tuple{single, kOne, kOne}, std::tuple{mixed, kN1, kN2}}) {
        const Factorization f = gauss_borel(MomentMatrix(wm, n1, n2, 30));
        worst = std::max(worst, biorthogonality_residual(f, wm, 29));
    }
    out.bound("max |int Q Qbar - delta|, l,k<30", worst, Real("1e-10"));
}

void determinantal(Line& out) {
    Real worst = 0;
    for (const auto& [wm, n1, n2] :
         {std::tuple{fixtures::legendre(), kOne, kOne}, std::tuple{fixtures::atomic_mixed(), kN1, kN2},
          std::tuple{fixtures::atomic_mixed(), Composition({1, 2}), Composition({2, 1})}}) {
        const MomentMatrix mm(wm, n1, n2, 12);
        const Factorization f = gauss_borel(mm);
        for (int l = 1; l <= 10; ++l) {
            for (int a = 0; a < n1.p(); ++a)
                worst = std::max(worst, coefficient_gap(mop(f, l, a).coeffs, det_mop_oracle(mm, l, a).coeffs));
            for (int b = 0; b < n2.p(); ++b)
                worst = std::max(worst, coefficient_gap(dual_mop(f, l, b).coeffs, det_dual_mop_oracle(mm, l, b).coeffs));
            worst = std::max(worst, max_abs(Vec(primal_form(mm.g(), l, FormRoute::factorization, &f) -
                                                primal_form(mm.g(), l, FormRoute::determinant))));
            worst = std::max(worst, max_abs(Vec(dual_form(mm.g(), l, FormRoute::factorization, &f) -
                                                dual_form(mm.g(), l, FormRoute::determinant))));
        }
    }
    out.bound("coefficient gap, l<=10", worst, Real("1e-8"));
}

void snake(Line& out) {
    const Composition n1({4, 3, 2}), n2({3, 2});
    const int L = 27;
    const Factorization f = gauss_borel(MomentMatrix(fixtures::snake_weights(), n1, n2, L + jacobi_margin(n1, n2)));
    const SnakeMatrix s = build_J(f, L);
    const Real thr("1e-10");
    const auto grid = pattern_grid(s.J, thr);
    int mismatched = 0;
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
            mismatched += grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] !=
                          kExpectedSnake27[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    int up = 0, down = 0;
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
            if (abs(s.J(i, j)) > thr) {
                up = std::max(up, j - i);
                down = std::max(down, i - j);
            }
    const int r8 = recursion_length(s.J, 8, thr), r14 = recursion_length(s.J, 14, thr);
    out.detail << " mismatched cells=" << mismatched << " band=" << up + down + 1 << " len(8)=" << r8
               << " len(14)=" << r14;
    out.require(mismatched == 0, "grid");
    out.require(up + down + 1 == 13, "band 13");
    out.require(r8 == 13 && r14 == 7, "recursion lengths 13 and 7");
}

void abc_cd(Line& out) {
    const WeightedMeasure wm = fixtures::atomic_mixed();
    Real kernel = 0, formula = 0, ladder = 0;
    // (2,1) and (4,2) reach the same degree vectors at every level l = 3m - 1
    const std::vector<Composition> ladders = {kN1, Composition({4, 2})};
    std::vector<Factorization> fs;
    for (const Composition& n1 : ladders) {
        const MomentMatrix mm(wm, n1, kN2, 14);
        const Factorization f = gauss_borel(mm);
        const int lo = std::max(n1.total(), kN2.total());
        for (int l = lo; l <= 12; ++l)
            for (auto [x, y] : sample_pairs(10, 1000u + static_cast<unsigned>(l))) {
                kernel = std::max(kernel, Real(abs(cd_kernel_sum(f, wm, l, x, y) - abc_kernel(mm, l, x, y))));
                formula = std::max(formula, cd_formula_residual(mm, f, l, x, y));
            }
        fs.push_back(f);
    }
    for (int l = 6; l <= 12; l += 3) {
        if (degree_vector(l - 1, ladders[0]).entries != degree_vector(l - 1, ladders[1]).entries) continue;
        for (auto [x, y] : sample_pairs(10, 2000u + static_cast<unsigned>(l)))
            ladder = std::max(ladder, Real(abs(cd_kernel_sum(fs[0], wm, l, x, y) - cd_kernel_sum(fs[1], wm, l, x, y))));
    }
    out.bound("|K - ABC|", kernel, Real("1e-9"));
    out.bound("CD formula", formula, Real("1e-8"));
    out.bound("ladder gap", ladder, Real("1e-8"));
}

FlowTimes generic_times(const FlowSetup& s) {
    FlowTimes t = FlowTimes::zero(s.n1.p(), s.n2.p(), s.jmax);
    int k = 0;
    for (auto& row : t.t)
        for (auto& v : row) v = Real(++k) / 40;
    for (auto& row : t.tbar)
        for (auto& v : row) v = -Real(++k) / 60;
    return t;
}

void hierarchy(Line& out) {
    const FlowSetup s{fixtures::atomic_mixed(), kN1, kN2, 8, 2};
    const FlowTimes t = generic_times(s);
    const Real h("1e-4");
    std::vector<Direction> dirs;
    for (int j = 1; j <= 2; ++j) {
        for (int a = 0; a < 2; ++a) dirs.push_back({false, j, a});
        for (int b = 0; b < 2; ++b) dirs.push_back({true, j, b});
    }
    Real lax = 0, zs = 0, mops = 0, sym = 0;
    for (const Direction& d : dirs) {
        lax = std::max(lax, lax_fd_residual(s, t, d, h));
        mops = std::max(mops, flow_mop_residual(s, t, d, h, Real("-0.45")));
    }
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t k = i + 1; k < dirs.size(); ++k) zs = std::max(zs, zs_fd_residual(s, t, dirs[i], dirs[k], h));
    for (int j = 1; j <= 2; ++j) sym = std::max(sym, symmetry_invariance_residual(s, t, j, h));
    const Real ratio = lax_fd_residual(s, t, dirs[0], h) / lax_fd_residual(s, t, dirs[0], h / 2);
    out.bound("Lax", lax, Real("1e-5"));
    out.bound("ZS", zs, Real("1e-5"));
    out.bound("MOP flows", mops, Real("1e-5"));
    out.bound("symmetry", sym, Real("1e-5"));
    out.detail << " Richardson ratio=" << format_real(ratio, 4);
    out.require(ratio >= Real("3.5") && ratio <= Real("4.5"), "ratio in [3.5, 4.5]");
}

ShiftConfig mixed_shifts(bool binary) {
    ShiftConfig c;
    c.base = fixtures::atomic_mixed();
    c.n1 = kN1;
    c.n2 = kN2;
    c.L = 8;
    c.binary = binary;
    auto seq = [](std::vector<SpectralPoint> fwd, std::vector<SpectralPoint> bwd) {
        LambdaSequence s;
        s.forward = std::move(fwd);
        s.backward = std::move(bwd);
        return s;
    };
    if (!binary) {
        c.lambda = {seq({{Real("-1.5")}, {Real("-1.7")}}, {{Real("-1.9")}}), seq({{Real("-1.3")}, {Real("-2.1")}}, {{Real("-1.6")}})};
        c.lambda_bar = {seq({{Real("-1.8")}, {Real("-2.4")}}, {{Real("-2.2")}}),
                        seq({{Real("-1.4")}, {Real("-2.2")}}, {{Real("-2.6")}})};
    } else {
        c.lambda = {seq({{Real("0.3"), Real("0.5")}, {Real("0.15"), Real(1)}}, {}),
                    seq({{Real("-0.2"), Real("0.7")}, {Real("-0.1"), Real("1.4")}}, {})};
        c.lambda_bar = {seq({{Real("0.1"), Real("0.6")}, {Real("0.05"), Real("1.2")}}, {}),
                        seq({{Real("-0.4"), Real("0.4")}, {Real("-0.2"), Real("0.8")}}, {})};
    }
    return c;
}

std::vector<Step> all_steps() { return {{false, 0}, {false, 1}, {true, 0}, {true, 1}}; }

void discrete_flows(Line& out) {
    Real miwa = 0;
    for (int a = 0; a < 2; ++a)
        for (const char* lam : {"3", "-2.5"})
            miwa = std::max(miwa, miwa_equivalence_residual(fixtures::atomic_mixed(), kN1, kN2, 10, a, Real(lam)));
    miwa = std::max(miwa, miwa_equivalence_residual(fixtures::legendre(), kOne, kOne, 10, 0, Real(3)));

    Real dzs = 0;
    ShiftLattice lat(mixed_shifts(false));
    const auto st = all_steps();
    for (const auto& [s, sb] : {std::pair{std::vector<int>{0, 0}, std::vector<int>{0, 0}},
                                std::pair{std::vector<int>{1, 0}, std::vector<int>{0, 1}}})
        for (std::size_t i = 0; i < st.size(); ++i)
            for (std::size_t k = i + 1; k < st.size(); ++k) dzs = std::max(dzs, dzs_residual(lat, s, sb, st[i], st[k]));

    int shape_failures = 0;
    for (bool binary : {false, true}) {
        const ShiftConfig c = mixed_shifts(binary);
        const ShiftState state = make_state(c, {binary ? 0 : 1, 0}, {0, binary ? 0 : 1});
        for (const Step& step : st) {
            const Composition& comp = step.bar ? c.n2 : c.n1;
            const int n = comp.jump(step.channel), band = omega_band(c, step);
            const OmegaReport rep = omega_factors(state, step);
            auto at = [&](int k, int off) {
                return Real(abs(step.bar ? rep.banded(k + off, k) : rep.banded(k, k + off)));
            };
            Real edge = 0, beyond = 0;
            for (int k = 0; k < c.L; ++k) {
                edge = std::max(edge, at(k, band));
                for (int off = n + 1; off <= band; ++off) beyond = std::max(beyond, at(k, off));
            }
            shape_failures += band != (binary ? 2 * n : n);
            shape_failures += rep.shape >= Real("1e-60");
            shape_failures += binary ? beyond <= Real("1e-20") : edge <= Real("1e-20");
        }
    }
    out.bound("Miwa vs Darboux", miwa, Real("1e-9"));
    out.bound("discrete ZS", dzs, Real("1e-8"));
    out.detail << " omega shape failures=" << shape_failures;
    out.require(shape_failures == 0, "omega band shapes");
}

void tau_calculus(Line& out) {
    const WeightedMeasure wm = fixtures::atomic_mixed();
    const GramSource src(wm, kN1, kN2);
    const Factorization f = gauss_borel(MomentMatrix(wm, kN1, kN2, 14));
    Real ratio = tau_ratio_residual(tau_table(src, 12), f);
    const auto leg = fixtures::legendre();
    ratio = std::max(ratio, tau_ratio_residual(tau_table(GramSource(leg, kOne, kOne), 8),
                                               gauss_borel(MomentMatrix(leg, kOne, kOne, 10))));
    Real reps = 0, cauchy = 0;
    for (int l = 0; l <= 6; ++l)
        for (const char* z : {"1.7", "-2.3", "4.1"}) {
            reps = std::max(reps, tau_mop_residual(wm, kN1, kN2, l, Real(z)));
            cauchy = std::max(cauchy, tau_cauchy_residual(wm, kN1, kN2, l, Real(z)));
        }
    out.bound("tau ratio (rel)", ratio, Real("1e-9"));
    out.bound("MOP representations", reps, Real("1e-8"));
    out.bound("Cauchy representations", cauchy, Real("1e-8"));
}

void bilinear_identity(Line& out) {
    const ShiftConfig cfg = mixed_shifts(false);
    const FlowPoint p0{FlowTimes::zero(2, 2, 2), {0, 0}, {0, 0}};
    FlowPoint p1 = p0;
    p1.times.t[0][0] = Real("0.1");
    Real residue = 0, quad = 0, delta = 0;
    for (int k = 0; k <= 4; ++k)
        for (int l = 0; l <= 4; ++l) {
            const BilinearReport r = bilinear(cfg, p0, p1, k, l, 48);
            residue = std::max(residue, r.residual);
            quad = std::max(quad, r.quadrature_gap);
            const BilinearReport d = bilinear(cfg, p0, p0, k, l, 48);
            const Real want = k == l ? 1 : 0;
            delta = std::max({delta, Real(abs(d.lhs - want)), Real(abs(d.rhs - want))});
        }
    out.bound("residue form", residue, Real("1e-6"));
    out.bound("quadrature gap", quad, Real("1e-7"));
    out.bound("t = t' delta", delta, Real("1e-10"));
}

void nikishin(Line& out) {
    std::vector<Measure> positive = {fixtures::random_atoms(40, 7), fixtures::random_atoms(12, 3),
                                     Measure::atomic({Real("0.1"), Real("0.5"), Real("0.9")}, {Real(1), Real(2), Real("0.5")}),
                                     Measure::atomic({Real(0), Real("0.5")}, {Real(1), Real(1)})};
    int accepted = 0;
    for (const Measure& mu : positive)
        accepted += hausdorff_check(unit_interval_moments(mu, 60), 25, 25, false).verdict ==
                    HausdorffVerdict::solvable_positive;
    std::vector<Real> alt;
    for (int i = 0; i < 60; ++i) alt.push_back(i % 2 ? Real(-1) : Real(1));
    const bool rejected = hausdorff_check(alt, 25, 25, false).verdict == HausdorffVerdict::fails;
    out.detail << " accepted " << accepted << "/" << positive.size() << ", alternating "
               << (rejected ? "rejected" : "accepted");
    out.require(accepted == static_cast<int>(positive.size()) && rejected, "Hausdorff verdicts");

    CoefficientTable dup(2, std::vector<Real>(80));
    for (int i = 0; i < 80; ++i) dup[0][static_cast<std::size_t>(i)] = dup[1][static_cast<std::size_t>(i)] = pow(Real(2), -i);
    const NikishinReport rep = nikishin_inverse(dup, Real("1e-12"));
    out.require(rep.success, "inverse recursion succeeds");
    Real gap = 0;
    if (rep.success) {
        const auto& th = rep.theta.at(1).at(1);
        for (std::size_t i = 0; i < th.size(); ++i) gap = std::max(gap, Real(abs(th[i] - (i == 0 ? 1 : 0))));
    }
    out.bound("theta_22 gap", gap, Real("1e-12"));
    out.bound("residual", rep.max_residual, Real("1e-12"));
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Line&)>>> criteria = {
        {"single-channel Legendre reduction", legendre_reduction},
        {"biorthogonality on atomic configurations", biorthogonality},
        {"determinantal expressions", determinantal},
        {"snake support of J for (4,3,2)/(3,2), L=27", snake},
        {"ABC theorem and CD formula on two ladders", abc_cd},
        {"hierarchy finite-difference battery", hierarchy},
        {"discrete flows", discrete_flows},
        {"tau calculus", tau_calculus},
        {"bilinear identity", bilinear_identity},
        {"Nikishin machinery", nikishin},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Line line;
        try {
            criteria[i].second(line);
        } catch (const std::exception& e) {
            line.pass = false;
            line.detail << " [error: " << e.what() << "]";
        }
        failed += !line.pass;
        std::cout << "criterion " << (i + 1) << " " << (line.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ":"
                  << line.detail.str() << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
