#include "mixedmop/toda.hpp"

#include <algorithm>

#include "mixedmop/errors.hpp"

namespace mixedmop {

FlowTimes FlowTimes::zero(int p1, int p2, int jmax) {
    FlowTimes t;
    t.t.assign(static_cast<std::size_t>(p1), std::vector<Real>(static_cast<std::size_t>(jmax), Real(0)));
    t.tbar.assign(static_cast<std::size_t>(p2), std::vector<Real>(static_cast<std::size_t>(jmax), Real(0)));
    return t;
}

FlowTimes shifted(const FlowTimes& times, const Direction& d, const Real& h) {
    FlowTimes out = times;
    auto& table = d.bar ? out.tbar : out.t;
    if (d.channel < 0 || d.channel >= static_cast<int>(table.size()) || d.j < 1)
        throw ConfigError("flow direction outside the time table");
    auto& row = table[static_cast<std::size_t>(d.channel)];
    if (static_cast<int>(row.size()) < d.j) row.resize(static_cast<std::size_t>(d.j), Real(0));
    row[static_cast<std::size_t>(d.j - 1)] += h;
    return out;
}

int lax_margin(const Composition& n1, const Composition& n2, int jmax) {
    return (jmax + 1) * (n1.bandwidth() + n2.bandwidth()) + 1;
}

WeightedMeasure deform(const WeightedMeasure& base, const FlowTimes& times) {
    if (static_cast<int>(times.t.size()) != base.p1() || static_cast<int>(times.tbar.size()) != base.p2())
        throw ConfigError("time table does not match the weight counts");
    WeightedMeasure out = base;
    for (int a = 0; a < base.p1(); ++a)
        out = out.with_w1(a, base.w1()[static_cast<std::size_t>(a)].with_times(times.t[static_cast<std::size_t>(a)], +1));
    for (int b = 0; b < base.p2(); ++b)
        out = out.with_w2(b, base.w2()[static_cast<std::size_t>(b)].with_times(times.tbar[static_cast<std::size_t>(b)], -1));
    return out;
}

FlowState evolve(const FlowSetup& setup, const FlowTimes& times) {
    FlowState fs;
    fs.setup = setup;
    fs.times = times;
    fs.deformed = deform(setup.base, times);
    fs.deformed.validate();
    MomentMatrix mm(fs.deformed, setup.n1, setup.n2, setup.L + lax_margin(setup.n1, setup.n2, setup.jmax));
    fs.g = mm.g();
    fs.f = gauss_borel(mm);
    return fs;
}

LaxSet lax_set(const FlowState& fs, int jmax) {
    if (jmax > fs.setup.jmax) throw ConfigError("lax powers beyond the setup's jmax lose exactness");
    const Factorization& f = fs.f;
    LaxSet lx;
    lx.L = fs.setup.L;
    for (int a = 0; a < f.n1.p(); ++a) lx.La.push_back(f.S * build_lambda(f.n1, a, f.L).dense() * f.Sinv);
    for (int b = 0; b < f.n2.p(); ++b)
        lx.Lbar.push_back(f.Sbar * build_lambda(f.n2, b, f.L).dense().transpose() * f.Sbarinv);
    lx.powers.resize(static_cast<std::size_t>(jmax));
    lx.bar_powers.resize(static_cast<std::size_t>(jmax));
    lx.B.resize(static_cast<std::size_t>(jmax));
    lx.Bbar.resize(static_cast<std::size_t>(jmax));
    for (int j = 1; j <= jmax; ++j) {
        const auto sj = static_cast<std::size_t>(j - 1);
        for (std::size_t a = 0; a < lx.La.size(); ++a) {
            lx.powers[sj].push_back(j == 1 ? lx.La[a] : Mat(lx.powers[sj - 1][a] * lx.La[a]));
            lx.B[sj].push_back(upper_part(lx.powers[sj][a]));
        }
        for (std::size_t b = 0; b < lx.Lbar.size(); ++b) {
            lx.bar_powers[sj].push_back(j == 1 ? lx.Lbar[b] : Mat(lx.bar_powers[sj - 1][b] * lx.Lbar[b]));
            lx.Bbar[sj].push_back(strict_lower_part(lx.bar_powers[sj][b]));
        }
    }
    return lx;
}

namespace {

Real exp_factor(const std::vector<Real>& t, const Real& z) {
    Real e = 0, zp = 1;
    for (const Real& tj : t) {
        zp *= z;
        e += tj * zp;
    }
    return exp(e);
}

void require_off_support(const Measure& mu, const Real& z) {
    if (z >= mu.lo() - Real("1e-6") && z <= mu.hi() + Real("1e-6"))
        throw TooCloseToSupport("evaluation point on or near the support");
}

const Mat& zs_operator(const LaxSet& lx, const Direction& d) {
    const auto sj = static_cast<std::size_t>(d.j - 1);
    return d.bar ? lx.Bbar.at(sj).at(static_cast<std::size_t>(d.channel)) : lx.B.at(sj).at(static_cast<std::size_t>(d.channel));
}

Mat lead(const Mat& m, int k) { return m.topLeftCorner(k, k); }

Real block_diff(const Mat& a, const Mat& b, int k) { return max_abs(Mat(lead(a, k) - lead(b, k))); }

// Finite-difference errors scale with the operator being differentiated.
Real scale_of(const Mat& m, int k) { return std::max(Real(1), max_abs(Mat(lead(m, k)))); }
Real scale_of(const Vec& v, int k) { return std::max(Real(1), max_abs(Vec(v.head(k)))); }

struct Stencil {
    FlowState plus, minus;
    LaxSet lplus, lminus;
};

Stencil stencil(const FlowSetup& setup, const FlowTimes& times, const Direction& d, const Real& h, int jmax) {
    Stencil s{evolve(setup, shifted(times, d, h)), evolve(setup, shifted(times, d, -h)), {}, {}};
    s.lplus = lax_set(s.plus, jmax);
    s.lminus = lax_set(s.minus, jmax);
    return s;
}

Vec mop_vector(const Factorization& f, int a, const Real& x) {
    return f.S * channel_monomials(f.n1, a, f.L, x);
}

Vec dual_mop_vector(const Factorization& f, int b, const Real& x) {
    return f.Sbarinv.transpose() * channel_monomials(f.n2, b, f.L, x);
}

}  // namespace

Real wave_function(const FlowState& fs, WaveKind kind, int channel, int k, const Real& z) {
    const auto sc = static_cast<std::size_t>(channel);
    const Measure& mu = fs.deformed.measure();
    switch (kind) {
        case WaveKind::psi:
            return mop(fs.f, k, channel)(z) * exp_factor(fs.times.t.at(sc), z);
        case WaveKind::psi_bar_star:
            return dual_mop(fs.f, k, channel)(z) / exp_factor(fs.times.tbar.at(sc), z);
        case WaveKind::psi_bar: {
            require_off_support(mu, z);
            const Weight& w = fs.setup.base.w2().at(sc);
            Real s = 0;
            for (int i = 0; i < mu.size(); ++i) {
                const Real& x = mu.nodes()[static_cast<std::size_t>(i)];
                s += mu.masses()[static_cast<std::size_t>(i)] * linear_form(fs.f, fs.deformed, k, x) * w(x) / (z - x);
            }
            return s;
        }
        case WaveKind::psi_star: {
            require_off_support(mu, z);
            const Weight& w = fs.setup.base.w1().at(sc);
            Real s = 0;
            for (int i = 0; i < mu.size(); ++i) {
                const Real& x = mu.nodes()[static_cast<std::size_t>(i)];
                s += mu.masses()[static_cast<std::size_t>(i)] * dual_linear_form(fs.f, fs.deformed, k, x) * w(x) / (z - x);
            }
            return s;
        }
    }
    return 0;
}

Real wave_cauchy_series(const FlowState& fs, WaveKind kind, int channel, int k, const Real& z, int terms) {
    const Measure& mu = fs.deformed.measure();
    if (abs(z) < 2 * mu.radius()) throw TooCloseToSupport("series route needs |z| >= 2R");
    const auto sc = static_cast<std::size_t>(channel);
    // sum_m z^{-m-1} int x^{d+m} u(x) dmu
    auto resolvent_moment = [&](int d, const auto& u) {
        Real s = 0;
        for (int i = 0; i < mu.size(); ++i) {
            const Real& x = mu.nodes()[static_cast<std::size_t>(i)];
            Real term = mu.masses()[static_cast<std::size_t>(i)] * u(x) * pow(x, d) / z, acc = 0;
            for (int m = 0; m < terms; ++m) {
                acc += term;
                term *= x / z;
            }
            s += acc;
        }
        return s;
    };
    Real out = 0;
    if (kind == WaveKind::psi_bar) {
        const Weight& w2 = fs.setup.base.w2().at(sc);
        for (int i = 0; i <= k; ++i) {
            const Weight& w1 = fs.deformed.w1().at(static_cast<std::size_t>(channel_of(i, fs.f.n1)));
            out += fs.f.S(k, i) * resolvent_moment(local_degree(i, fs.f.n1), [&](const Real& x) { return w1(x) * w2(x); });
        }
    } else if (kind == WaveKind::psi_star) {
        const Weight& w1 = fs.setup.base.w1().at(sc);
        for (int j = 0; j <= k; ++j) {
            const Weight& w2 = fs.deformed.w2().at(static_cast<std::size_t>(channel_of(j, fs.f.n2)));
            out += fs.f.Sbarinv(j, k) * resolvent_moment(local_degree(j, fs.f.n2), [&](const Real& x) { return w1(x) * w2(x); });
        }
    } else {
        throw ConfigError("series route only exists for the Cauchy-type wave functions");
    }
    return out;
}

Real lax_fd_residual(const FlowSetup& setup, const FlowTimes& times, const Direction& d, const Real& h) {
    const FlowState fs = evolve(setup, times);
    const LaxSet lx = lax_set(fs, d.j);
    const Stencil st = stencil(setup, times, d, h, 1);
    const Mat& B = zs_operator(lx, d);
    const int K = setup.L;
    Real worst = 0;
    for (std::size_t a = 0; a < lx.La.size(); ++a) {
        const Mat dl = (st.lplus.La[a] - st.lminus.La[a]) / (2 * h);
        worst = std::max(worst, block_diff(dl, Mat(B * lx.La[a] - lx.La[a] * B), K) / scale_of(lx.La[a], K));
    }
    for (std::size_t b = 0; b < lx.Lbar.size(); ++b) {
        const Mat dl = (st.lplus.Lbar[b] - st.lminus.Lbar[b]) / (2 * h);
        worst = std::max(worst, block_diff(dl, Mat(B * lx.Lbar[b] - lx.Lbar[b] * B), K) / scale_of(lx.Lbar[b], K));
    }
    return worst;
}

Real zs_fd_residual(const FlowSetup& setup, const FlowTimes& times, const Direction& d1, const Direction& d2,
                    const Real& h) {
    const int jm = std::max(d1.j, d2.j);
    const LaxSet lx = lax_set(evolve(setup, times), jm);
    const Stencil s1 = stencil(setup, times, d1, h, jm), s2 = stencil(setup, times, d2, h, jm);
    const Mat dB1 = (zs_operator(s2.lplus, d1) - zs_operator(s2.lminus, d1)) / (2 * h);
    const Mat dB2 = (zs_operator(s1.lplus, d2) - zs_operator(s1.lminus, d2)) / (2 * h);
    const Mat& B1 = zs_operator(lx, d1);
    const Mat& B2 = zs_operator(lx, d2);
    const Real scale = std::max(Real(1), scale_of(B1, setup.L) * scale_of(B2, setup.L));
    return max_abs(Mat(lead(Mat(dB1 - dB2 + B1 * B2 - B2 * B1), setup.L))) / scale;
}

Real symmetry_invariance_residual(const FlowSetup& setup, const FlowTimes& times, int j, const Real& h) {
    const FlowState fs = evolve(setup, times);
    const int Lf = fs.f.L;
    std::vector<Mat> acc_L(static_cast<std::size_t>(setup.n1.p()), Mat::Zero(Lf, Lf));
    std::vector<Mat> acc_Lbar(static_cast<std::size_t>(setup.n2.p()), Mat::Zero(Lf, Lf));
    Mat acc_S = Mat::Zero(Lf, Lf), acc_Sbarinv = Mat::Zero(Lf, Lf);
    std::vector<Direction> dirs;
    for (int a = 0; a < setup.n1.p(); ++a) dirs.push_back({false, j, a});
    for (int b = 0; b < setup.n2.p(); ++b) dirs.push_back({true, j, b});
    for (const auto& d : dirs) {
        const Stencil st = stencil(setup, times, d, h, 1);
        for (std::size_t a = 0; a < acc_L.size(); ++a) acc_L[a] += (st.lplus.La[a] - st.lminus.La[a]) / (2 * h);
        for (std::size_t b = 0; b < acc_Lbar.size(); ++b)
            acc_Lbar[b] += (st.lplus.Lbar[b] - st.lminus.Lbar[b]) / (2 * h);
        acc_S += (st.plus.f.S - st.minus.f.S) / (2 * h);
        acc_Sbarinv += (st.plus.f.Sbarinv - st.minus.f.Sbarinv) / (2 * h);
    }
    const int K = setup.L;
    const LaxSet lx = lax_set(fs, 1);
    Real worst = std::max(max_abs(Mat(lead(acc_S, K))) / scale_of(fs.f.S, K),
                          max_abs(Mat(lead(acc_Sbarinv, K))) / scale_of(fs.f.Sbarinv, K));
    for (std::size_t a = 0; a < acc_L.size(); ++a)
        worst = std::max(worst, max_abs(Mat(lead(acc_L[a], K))) / scale_of(lx.La[a], K));
    for (std::size_t b = 0; b < acc_Lbar.size(); ++b)
        worst = std::max(worst, max_abs(Mat(lead(acc_Lbar[b], K))) / scale_of(lx.Lbar[b], K));
    return worst;
}

Real flow_mop_residual(const FlowSetup& setup, const FlowTimes& times, const Direction& d, const Real& h,
                       const Real& x) {
    const FlowState fs = evolve(setup, times);
    const LaxSet lx = lax_set(fs, d.j);
    const Stencil st = stencil(setup, times, d, h, 1);
    const Mat& B = zs_operator(lx, d);
    const Real xj = pow(x, d.j);
    const int K = setup.L;
    Real worst = 0;
    for (int a = 0; a < setup.n1.p(); ++a) {
        const Vec dA = (mop_vector(st.plus.f, a, x) - mop_vector(st.minus.f, a, x)) / (2 * h);
        const Vec A = mop_vector(fs.f, a, x);
        Vec rhs = B * A;
        if (!d.bar && d.channel == a) rhs -= xj * A;
        worst = std::max(worst, max_abs(Vec((dA - rhs).head(K))) / scale_of(A, K));
    }
    for (int b = 0; b < setup.n2.p(); ++b) {
        const Vec dA = (dual_mop_vector(st.plus.f, b, x) - dual_mop_vector(st.minus.f, b, x)) / (2 * h);
        const Vec A = dual_mop_vector(fs.f, b, x);
        Vec rhs = -(B.transpose() * A);
        if (d.bar && d.channel == b) rhs += xj * A;
        worst = std::max(worst, max_abs(Vec((dA - rhs).head(K))) / scale_of(A, K));
    }
    return worst;
}

Real wave_flow_residual(const FlowSetup& setup, const FlowTimes& times, const Direction& d, const Real& h,
                        const Real& z) {
    const FlowState fs = evolve(setup, times);
    const LaxSet lx = lax_set(fs, d.j);
    const Stencil st = stencil(setup, times, d, h, 1);
    const Mat& B = zs_operator(lx, d);
    Real worst = 0;
    for (int a = 0; a < setup.n1.p(); ++a) {
        const auto sa = static_cast<std::size_t>(a);
        auto psi = [&](const FlowState& s) -> Vec { return mop_vector(s.f, a, z) * exp_factor(s.times.t[sa], z); };
        const Vec dpsi = (psi(st.plus) - psi(st.minus)) / (2 * h);
        const Vec p0 = psi(fs);
        worst = std::max(worst, max_abs(Vec((dpsi - B * p0).head(setup.L))) / scale_of(p0, setup.L));
    }
    return worst;
}

Real string_equation_residual(const FlowState& fs, const LaxSet& lx, int j) {
    if (j < 1 || j > static_cast<int>(lx.powers.size())) throw ConfigError("string equation power outside the lax set");
    const Mat J = build_J(fs.f, fs.f.L - jacobi_margin(fs.f.n1, fs.f.n2)).J;
    Mat Jj = J;
    for (int i = 1; i < j; ++i) Jj = Jj * J;
    Mat s1 = Mat::Zero(fs.f.L, fs.f.L), s2 = Mat::Zero(fs.f.L, fs.f.L);
    for (const auto& m : lx.powers[static_cast<std::size_t>(j - 1)]) s1 += m;
    for (const auto& m : lx.bar_powers[static_cast<std::size_t>(j - 1)]) s2 += m;
    const int K = lx.L;
    return std::max({block_diff(Jj, s1, K), block_diff(Jj, s2, K), block_diff(s1, s2, K)});
}

Real lax_eigen_residual(const FlowState& fs, const LaxSet& lx, const Real& z) {
    Real worst = 0;
    for (int ap = 0; ap < fs.f.n1.p(); ++ap) {
        const Vec psi = mop_vector(fs.f, ap, z) * exp_factor(fs.times.t[static_cast<std::size_t>(ap)], z);
        for (std::size_t a = 0; a < lx.La.size(); ++a) {
            Vec r = lx.La[a] * psi;
            if (static_cast<int>(a) == ap) r -= z * psi;
            worst = std::max(worst, max_abs(Vec(r.head(lx.L))));
        }
    }
    return worst;
}

Real lax_power_consistency(const FlowState& fs, const LaxSet& lx, int j) {
    Real worst = 0;
    for (int a = 0; a < fs.f.n1.p(); ++a) {
        const Mat lam = build_lambda(fs.f.n1, a, fs.f.L).dense();
        Mat lj = lam;
        for (int i = 1; i < j; ++i) lj = lj * lam;
        const Mat direct = fs.f.S * lj * fs.f.Sinv;
        worst = std::max(worst, block_diff(direct, lx.powers.at(static_cast<std::size_t>(j - 1))[static_cast<std::size_t>(a)], lx.L));
    }
    return worst;
}

}  // namespace mixedmop
