#include "mixedmop/discrete.hpp"

#include <algorithm>
#include <mutex>

#include "mixedmop/errors.hpp"

namespace mixedmop {

SpectralPoint LambdaSequence::at(int n) const {
    const auto& table = n >= 1 ? forward : backward;
    const auto k = static_cast<std::size_t>(n >= 1 ? n - 1 : -n);
    if (k >= table.size()) throw ConfigError("lambda(" + std::to_string(n) + ") not configured");
    return table[k];
}

LambdaSequence LambdaSequence::constant(const Real& re, const Real& im) {
    LambdaSequence seq;
    seq.forward.assign(16, SpectralPoint{re, im});
    seq.backward.assign(16, SpectralPoint{re, im});
    return seq;
}

int discrete_margin(const ShiftConfig& cfg) {
    const int mult = cfg.binary ? 2 : 1;
    return (2 * mult + 1) * std::max(cfg.n1.bandwidth(), cfg.n2.bandwidth()) + 2;
}

namespace {

const LambdaSequence& sequence(const ShiftConfig& cfg, const Step& step) {
    const auto& table = step.bar ? cfg.lambda_bar : cfg.lambda;
    if (step.channel < 0 || step.channel >= static_cast<int>(table.size()))
        throw ConfigError("step channel outside the lambda table");
    return table[static_cast<std::size_t>(step.channel)];
}

WeightFactor factor_at(const ShiftConfig& cfg, const SpectralPoint& lam, int power) {
    WeightFactor f;
    f.re = lam.re;
    f.power = power;
    if (cfg.binary) {
        f.kind = WeightFactor::Kind::quadratic;
        f.im = lam.im;
    } else {
        if (lam.im != 0) throw ConfigError("complex lambda needs binary mode");
        f.kind = WeightFactor::Kind::linear;
    }
    return f;
}

Weight apply_steps(const ShiftConfig& cfg, Weight w, const LambdaSequence& seq, int s) {
    for (int n = 1; n <= s; ++n) w = w.with_factor(factor_at(cfg, seq.at(n), +1));
    for (int n = s + 1; n <= 0; ++n) w = w.with_factor(factor_at(cfg, seq.at(n), -1));
    return w;
}

// Product of the step factors at z, the scalar analogue of apply_steps.
Real step_product(const ShiftConfig& cfg, const LambdaSequence& seq, int s, const Real& z) {
    Real d = 1;
    for (int n = 1; n <= s; ++n) d *= factor_at(cfg, seq.at(n), +1)(z);
    for (int n = s + 1; n <= 0; ++n) d *= factor_at(cfg, seq.at(n), -1)(z);
    return d;
}

std::pair<std::vector<int>, std::vector<int>> bumped(std::vector<int> s, std::vector<int> sbar, const Step& step) {
    auto& table = step.bar ? sbar : s;
    if (step.channel < 0 || step.channel >= static_cast<int>(table.size()))
        throw ConfigError("step channel outside the s table");
    ++table[static_cast<std::size_t>(step.channel)];
    return {std::move(s), std::move(sbar)};
}

Mat lead(const Mat& m, int k) { return m.topLeftCorner(k, k); }
Real scale_of(const Mat& m, int k) { return std::max(Real(1), max_abs(Mat(lead(m, k)))); }

Mat upper_inverse(const Mat& m) {
    return m.triangularView<Eigen::Upper>().solve(Mat::Identity(m.rows(), m.cols()));
}
Mat lower_inverse(const Mat& m) {
    return m.triangularView<Eigen::Lower>().solve(Mat::Identity(m.rows(), m.cols()));
}
Mat omega_inverse(const Mat& w, const Step& step) { return step.bar ? lower_inverse(w) : upper_inverse(w); }

// q_a = I - Pi_a(1 + lambda) + Lambda_a, or q'_a; transposed Lambda for barred steps.
Mat shift_symbol(const ShiftState& st, const Step& step) {
    const int n = st.f.L;
    const Composition& comp = step.bar ? st.cfg.n2 : st.cfg.n1;
    const Mat P = build_projector(comp, step.channel, n).dense();
    Mat Lam = build_lambda(comp, step.channel, n).dense();
    if (step.bar) Lam.transposeInPlace();
    const SpectralPoint lam = st.next_lambda(step);
    const Mat I = Mat::Identity(n, n);
    if (!st.cfg.binary) return I - P * (1 + lam.re) + Lam;
    const Real mod2 = lam.re * lam.re + lam.im * lam.im;
    return I - P * (1 - mod2) - Lam * (2 * lam.re) + Lam * Lam;
}

Real max_entry(const Vec& v, int k) { return max_abs(Vec(v.head(k))); }

}  // namespace

SpectralPoint ShiftState::next_lambda(const Step& st) const {
    const auto& table = st.bar ? sbar : s;
    return sequence(cfg, st).at(table.at(static_cast<std::size_t>(st.channel)) + 1);
}

WeightedMeasure shifted_weights(const ShiftConfig& cfg, const std::vector<int>& s, const std::vector<int>& sbar) {
    const WeightedMeasure& base = cfg.base;
    if (static_cast<int>(s.size()) != base.p1() || static_cast<int>(sbar.size()) != base.p2())
        throw ConfigError("s table does not match the weight counts");
    WeightedMeasure out = base;
    for (int a = 0; a < base.p1(); ++a) {
        const auto sa = static_cast<std::size_t>(a);
        if (s[sa] == 0) continue;
        out = out.with_w1(a, apply_steps(cfg, base.w1()[sa], sequence(cfg, {false, a}), s[sa]));
    }
    for (int b = 0; b < base.p2(); ++b) {
        const auto sb = static_cast<std::size_t>(b);
        if (sbar[sb] == 0) continue;
        out = out.with_w2(b, apply_steps(cfg, base.w2()[sb], sequence(cfg, {true, b}), sbar[sb]));
    }
    return out;
}

ShiftState make_state(const ShiftConfig& cfg, const std::vector<int>& s, const std::vector<int>& sbar) {
    if (cfg.L < 1) throw ConfigError("observed block must be >= 1");
    ShiftState st;
    st.cfg = cfg;
    st.s = s;
    st.sbar = sbar;
    st.weights = shifted_weights(cfg, s, sbar);
    st.weights.validate();
    MomentMatrix mm(st.weights, cfg.n1, cfg.n2, cfg.L + discrete_margin(cfg));
    st.f = gauss_borel(mm);
    return st;
}

ShiftState shift(const ShiftState& st, const Step& step) {
    auto [s, sbar] = bumped(st.s, st.sbar, step);
    return make_state(st.cfg, s, sbar);
}

std::shared_ptr<const ShiftState> ShiftLattice::get(const std::vector<int>& s, const std::vector<int>& sbar) {
    const auto key = std::make_pair(s, sbar);
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto built = std::make_shared<const ShiftState>(make_state(cfg_, s, sbar));
    std::unique_lock lock(mutex_);
    return cache_.try_emplace(key, std::move(built)).first->second;
}

std::size_t ShiftLattice::size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

Mat lattice_resolvent(const ShiftState& st, const Step& step) {
    const Factorization& f = st.f;
    const int n = f.L;
    const Composition& comp = step.bar ? st.cfg.n2 : st.cfg.n1;
    const Mat P = build_projector(comp, step.channel, n).dense();
    const Mat Lam = build_lambda(comp, step.channel, n).dense();
    Mat C, Lx;
    if (step.bar) {
        C = f.Sbar * P * f.Sbarinv;
        Lx = f.Sbar * Lam.transpose() * f.Sbarinv;
    } else {
        C = f.S * P * f.Sinv;
        Lx = f.S * Lam * f.Sinv;
    }
    const SpectralPoint lam = st.next_lambda(step);
    const Mat I = Mat::Identity(n, n);
    if (!st.cfg.binary) return I - C * (1 + lam.re) + Lx;
    const Real mod2 = lam.re * lam.re + lam.im * lam.im;
    return I - C * (1 - mod2) - Lx * (2 * lam.re) + Lx * Lx;
}

Mat omega(const ShiftState& st, const ShiftState& shifted, const Step& step) {
    if (step.bar) return shifted.f.S * st.f.Sinv;
    return shifted.f.Sbar * st.f.Sbarinv;
}

int omega_band(const ShiftConfig& cfg, const Step& step) {
    const Composition& comp = step.bar ? cfg.n2 : cfg.n1;
    return (cfg.binary ? 2 : 1) * comp.jump(step.channel);
}

OmegaReport omega_factors(const ShiftState& st, const Step& step) {
    const ShiftState next = shift(st, step);
    OmegaReport rep;
    rep.omega = omega(st, next, step);
    const int band = omega_band(st.cfg, step);
    const int K = st.f.L - band;

    const Mat delta = lattice_resolvent(st, step);
    const Factorization lu = gauss_borel(Mat(lead(delta, K)), st.cfg.n1, st.cfg.n2);
    // delta = delta_-^{-1} delta_+: lu.S is delta_-, lu.Sbar is delta_+.
    const Mat plus = step.bar ? Mat(next.f.Sbar * st.f.Sbarinv) : rep.omega;
    const Mat minus = step.bar ? rep.omega : Mat(next.f.S * st.f.Sinv);
    rep.lu_plus = max_abs(Mat(lu.Sbar - lead(plus, K))) / scale_of(plus, K);
    rep.lu_minus = max_abs(Mat(lu.S - lead(minus, K))) / scale_of(minus, K);
    if (rep.lu_plus > Real("1e-7") || rep.lu_minus > Real("1e-7"))
        throw FactorizationMismatch("omega from refactorization disagrees with the LU of delta");

    rep.banded = step.bar ? Mat(st.f.S * next.f.Sinv) : rep.omega;
    Real outside = 0;
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            const int off = step.bar ? i - j : j - i;
            if (off < 0 || off > band) outside = std::max(outside, Real(abs(rep.banded(i, j))));
        }
    rep.shape = outside / scale_of(rep.banded, K);

    // T delta keeps lambda(s + 1) and conjugates with the shifted factor.
    const Mat& TS = step.bar ? next.f.Sbar : next.f.S;
    const Mat& TSi = step.bar ? next.f.Sbarinv : next.f.Sinv;
    const Mat shifted_delta = TS * shift_symbol(st, step) * TSi;
    const Mat ul = step.bar ? Mat(plus * rep.banded) : Mat(rep.omega * (st.f.S * next.f.Sinv));
    const int k = st.cfg.L;
    rep.ul = max_abs(Mat(lead(shifted_delta, k) - lead(ul, k))) / scale_of(shifted_delta, k);
    return rep;
}

Real dzs_residual(ShiftLattice& lattice, const std::vector<int>& s, const std::vector<int>& sbar, const Step& s1,
                  const Step& s2) {
    const auto k1 = bumped(s, sbar, s1);
    const auto k2 = bumped(s, sbar, s2);
    const auto k12 = bumped(k1.first, k1.second, s2);
    const auto p = lattice.get(s, sbar);
    const auto p1 = lattice.get(k1.first, k1.second);
    const auto p2 = lattice.get(k2.first, k2.second);
    const auto p12 = lattice.get(k12.first, k12.second);
    const Mat w1 = omega(*p, *p1, s1);
    const Mat w2 = omega(*p, *p2, s2);
    const Mat lhs = omega(*p1, *p12, s2) * w1;
    const Mat rhs = omega(*p2, *p12, s1) * w2;
    const int k = p->cfg.L;
    return max_abs(Mat(lead(lhs, k) - lead(rhs, k))) / scale_of(lhs, k);
}

Real gamma_factor(const ShiftState& st, const Step& step, int channel, const Real& z) {
    if (channel != step.channel) return 1;
    const SpectralPoint lam = st.next_lambda(step);
    if (st.cfg.binary) return (z - lam.re) * (z - lam.re) + lam.im * lam.im;
    return 1 - (1 + lam.re - z);
}

namespace {

// Relations between MOP vectors (and their duals) of st and T st; `waves` multiplies in the step factors.
Real link_residual(const ShiftState& st, const Step& step, const Real& z, bool waves) {
    const ShiftState next = shift(st, step);
    const Mat w = omega(st, next, step);
    const Mat winv = step.bar ? Mat(st.f.S * next.f.Sinv) : Mat();
    const int k = st.cfg.L;
    const int n = st.f.L;
    Real r = 0;
    for (int a = 0; a < st.cfg.n1.p(); ++a) {
        const Vec chi = channel_monomials(st.cfg.n1, a, n, z);
        Vec A = st.f.S * chi, TA = next.f.S * chi;
        if (waves) {
            const auto& seq = sequence(st.cfg, {false, a});
            A *= step_product(st.cfg, seq, st.s[static_cast<std::size_t>(a)], z);
            TA *= step_product(st.cfg, seq, next.s[static_cast<std::size_t>(a)], z);
        } else if (!step.bar) {
            TA *= gamma_factor(st, step, a, z);
        }
        const Vec gap = TA - w * A;
        r = std::max(r, max_entry(gap, k) / std::max(Real(1), max_entry(A, k)));
    }
    for (int b = 0; b < st.cfg.n2.p(); ++b) {
        const Vec chi = channel_monomials(st.cfg.n2, b, n, z);
        Vec A = st.f.Sbarinv.transpose() * chi, TA = next.f.Sbarinv.transpose() * chi;
        if (waves) {
            const auto& seq = sequence(st.cfg, {true, b});
            A *= step_product(st.cfg, seq, st.sbar[static_cast<std::size_t>(b)], z);
            TA *= step_product(st.cfg, seq, next.sbar[static_cast<std::size_t>(b)], z);
        } else if (step.bar) {
            TA *= gamma_factor(st, step, b, z);
        }
        // omegabar is dense lower; its inverse is banded, so the barred relation is used inverted.
        const Vec gap = step.bar ? Vec(TA - winv.transpose() * A) : Vec(w.transpose() * TA - A);
        r = std::max(r, max_entry(gap, k) / std::max(Real(1), max_entry(A, k)));
    }
    return r;
}

}  // namespace

Real discrete_mop_link_residual(const ShiftState& st, const Step& step, const Real& z) {
    return link_residual(st, step, z, false);
}

Real discrete_wave_residual(const ShiftState& st, const Step& step, const Real& z) {
    return link_residual(st, step, z, true);
}

Real discrete_lax_residual(const ShiftState& st, const Step& step) {
    const ShiftState next = shift(st, step);
    const Mat w = omega(st, next, step);
    const Mat winv = omega_inverse(w, step);
    const int k = st.cfg.L;
    Real r = 0;
    auto check = [&](const Factorization& f, const Factorization& tf, const Composition& comp, bool bar, int c) {
        Mat Lam = build_lambda(comp, c, f.L).dense();
        if (bar) Lam.transposeInPlace();
        const Mat& S = bar ? f.Sbar : f.S;
        const Mat& Si = bar ? f.Sbarinv : f.Sinv;
        const Mat& TS = bar ? tf.Sbar : tf.S;
        const Mat& TSi = bar ? tf.Sbarinv : tf.Sinv;
        const Mat TL = TS * Lam * TSi;
        const Mat conj = w * (S * Lam * Si) * winv;
        r = std::max(r, max_abs(Mat(lead(TL, k) - lead(conj, k))) / scale_of(TL, k));
    };
    for (int a = 0; a < st.cfg.n1.p(); ++a) check(st.f, next.f, st.cfg.n1, false, a);
    for (int b = 0; b < st.cfg.n2.p(); ++b) check(st.f, next.f, st.cfg.n2, true, b);
    return r;
}

Real mixed_zs_residual(const ShiftState& st, const Step& step, const Direction& d, const Real& h) {
    const ShiftState next = shift(st, step);
    const FlowSetup base{st.weights, st.cfg.n1, st.cfg.n2, st.cfg.L, d.j};
    const FlowSetup moved{next.weights, st.cfg.n1, st.cfg.n2, st.cfg.L, d.j};
    const FlowTimes t0 = FlowTimes::zero(st.cfg.base.p1(), st.cfg.base.p2(), d.j);
    auto om = [&](const FlowTimes& t) {
        const FlowState a = evolve(base, t), b = evolve(moved, t);
        return step.bar ? Mat(b.f.S * a.f.Sinv) : Mat(b.f.Sbar * a.f.Sbarinv);
    };
    const FlowState here = evolve(base, t0), there = evolve(moved, t0);
    const LaxSet lx = lax_set(here, d.j), tlx = lax_set(there, d.j);
    const auto sj = static_cast<std::size_t>(d.j - 1);
    const auto sc = static_cast<std::size_t>(d.channel);
    const Mat& B = d.bar ? lx.Bbar.at(sj).at(sc) : lx.B.at(sj).at(sc);
    const Mat& TB = d.bar ? tlx.Bbar.at(sj).at(sc) : tlx.B.at(sj).at(sc);

    const Mat w = step.bar ? Mat(there.f.S * here.f.Sinv) : Mat(there.f.Sbar * here.f.Sbarinv);
    const Mat winv = omega_inverse(w, step);
    const Mat dw = (om(shifted(t0, d, h)) - om(shifted(t0, d, -h))) / (2 * h);
    const Mat rhs = dw * winv + w * B * winv;
    const int k = st.cfg.L;
    const Real scale = std::max({scale_of(w, k), scale_of(TB, k)});
    return max_abs(Mat(lead(TB, k) - lead(rhs, k))) / scale;
}

Real miwa_weight_residual(const WeightedMeasure& base, int a, const Real& lambda) {
    const Weight& w = base.w1().at(static_cast<std::size_t>(a));
    const Real c = -1 / lambda;
    const Weight darboux = w.with_factor({WeightFactor::Kind::linear, lambda, 0, 1});
    const Weight miwa = w.with_factor({WeightFactor::Kind::miwa, lambda, 0, 1});
    Real r = 0;
    for (const Real& x : base.measure().nodes()) r = std::max(r, Real(abs(c * darboux(x) - miwa(x))));
    return r;
}

Real miwa_equivalence_residual(const WeightedMeasure& base, const Composition& n1, const Composition& n2, int L, int a,
                               const Real& lambda) {
    if (abs(lambda) <= base.measure().radius()) throw ConfigError("Miwa shift needs |lambda| beyond the support radius");
    const Weight& w = base.w1().at(static_cast<std::size_t>(a));
    const Real c = -1 / lambda;
    const Weight stepped = w.with_factor({WeightFactor::Kind::linear, lambda, 0, 1});
    const Weight darboux([stepped, c](const Real& x) { return c * stepped(x); }, "scaled darboux");
    const WeightedMeasure r1 = base.with_w1(a, darboux);
    const WeightedMeasure r2 = base.with_w1(a, w.with_factor({WeightFactor::Kind::miwa, lambda, 0, 1}));
    r1.validate();
    r2.validate();
    const Factorization f1 = gauss_borel(MomentMatrix(r1, n1, n2, L));
    const Factorization f2 = gauss_borel(MomentMatrix(r2, n1, n2, L));
    Real r = 0;
    for (int l = 0; l < L; ++l) {
        for (int c1 = 0; c1 < n1.p(); ++c1) {
            const Poly p = mop(f1, l, c1).coeffs, q = mop(f2, l, c1).coeffs;
            for (std::size_t i = 0; i < std::max(p.size(), q.size()); ++i)
                r = std::max(r, Real(abs((i < p.size() ? p[i] : Real(0)) - (i < q.size() ? q[i] : Real(0)))));
        }
        for (int c2 = 0; c2 < n2.p(); ++c2) {
            const Poly p = dual_mop(f1, l, c2).coeffs, q = dual_mop(f2, l, c2).coeffs;
            for (std::size_t i = 0; i < std::max(p.size(), q.size()); ++i)
                r = std::max(r, Real(abs((i < p.size() ? p[i] : Real(0)) - (i < q.size() ? q[i] : Real(0)))));
        }
    }
    return r;
}

}  // namespace mixedmop
