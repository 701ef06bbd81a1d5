#include "mixedmop/mops.hpp"

#include <algorithm>
#include <cmath>

#include "mixedmop/errors.hpp"

namespace mixedmop {

Real default_pivot_tolerance() {
    // eps^{3/4} of the working precision
    return pow(working_epsilon(), Real(3) / 4);
}

Factorization gauss_borel(const Mat& g, const Composition& n1, const Composition& n2, std::optional<Real> tol) {
    const int L = static_cast<int>(g.rows());
    const Real t = tol.value_or(default_pivot_tolerance());
    Mat U = g;
    Mat Lo = Mat::Identity(L, L);
    Factorization f;
    f.n1 = n1;
    f.n2 = n2;
    f.L = L;
    for (int k = 0; k < L; ++k) {
        Real rowmax = 0;
        for (int j = 0; j < L; ++j) rowmax = std::max(rowmax, Real(abs(g(k, j))));
        if (!(abs(U(k, k)) > t * rowmax))
            throw PerfectnessViolation("pivot " + std::to_string(k) + " is " + format_real(U(k, k), 6) +
                                       " relative to row max " + format_real(rowmax, 6));
        f.pivots.push_back(U(k, k));
        for (int i = k + 1; i < L; ++i) {
            const Real m = U(i, k) / U(k, k);
            Lo(i, k) = m;
            U(i, k) = 0;
            for (int j = k + 1; j < L; ++j) U(i, j) -= m * U(k, j);
        }
    }
    const Mat I = Mat::Identity(L, L);
    f.Sinv = Lo;
    f.S = Lo.triangularView<Eigen::UnitLower>().solve(I);
    f.Sbar = U;
    f.Sbarinv = U.triangularView<Eigen::Upper>().solve(I);
    return f;
}

Factorization gauss_borel(const MomentMatrix& mm, std::optional<Real> tol) {
    return gauss_borel(mm.g(), mm.n1(), mm.n2(), tol);
}

std::vector<Poly> split_channels(const Vec& c, const Composition& n) {
    std::vector<Poly> out(static_cast<std::size_t>(n.p()));
    const int last = static_cast<int>(c.size()) - 1;
    for (int a = 0; a < n.p(); ++a) out[static_cast<std::size_t>(a)].assign(
        static_cast<std::size_t>(degree_count(last, a, n)), Real(0));
    for (int i = 0; i <= last; ++i)
        out[static_cast<std::size_t>(channel_of(i, n))][static_cast<std::size_t>(local_degree(i, n))] = c(i);
    return out;
}

MopPolynomial mop(const Factorization& f, int l, int a) {
    const auto polys = split_channels(f.S.row(l).head(l + 1).transpose(), f.n1);
    return {a, l, polys.at(static_cast<std::size_t>(a))};
}

MopPolynomial dual_mop(const Factorization& f, int l, int b) {
    const auto polys = split_channels(f.Sbarinv.col(l).head(l + 1), f.n2);
    return {b, l, polys.at(static_cast<std::size_t>(b))};
}

namespace {

Real checked_det(const Mat& m, const char* what) {
    const Real d = determinant(m);
    if (d == 0 || !isfinite(d)) throw SingularMinor(std::string(what) + " has vanishing determinant");
    return d;
}

}  // namespace

Vec primal_form(const Mat& g, int l, FormRoute route, const Factorization* f) {
    Vec c = Vec::Zero(l + 1);
    switch (route) {
        case FormRoute::factorization:
            if (!f) throw ConfigError("factorization route needs a factorization");
            return f->S.row(l).head(l + 1).transpose();
        case FormRoute::schur: {
            c(l) = 1;
            if (l == 0) return c;
            const Vec y = solve(Mat(g.topLeftCorner(l, l).transpose()), Vec(g.row(l).head(l).transpose()));
            c.head(l) = -y;
            return c;
        }
        case FormRoute::inverse_row: {
            Vec e = Vec::Zero(l + 1);
            e(l) = 1;
            const Vec r = solve(Mat(g.topLeftCorner(l + 1, l + 1).transpose()), e);
            return r / r(l);
        }
        case FormRoute::determinant: {
            c(l) = 1;
            if (l == 0) return c;
            const Real d = checked_det(g.topLeftCorner(l, l), "g^[l]");
            const Mat B = g.topLeftCorner(l + 1, l);
            for (int i = 0; i <= l; ++i) {
                Mat M(l, l);
                for (int r = 0, o = 0; r <= l; ++r)
                    if (r != i) M.row(o++) = B.row(r);
                const Real sign = ((i + l) % 2 == 0) ? 1 : -1;
                c(i) = sign * determinant(M) / d;
            }
            return c;
        }
    }
    return c;
}

Vec dual_form(const Mat& g, int l, FormRoute route, const Factorization* f) {
    Vec c = Vec::Zero(l + 1);
    switch (route) {
        case FormRoute::factorization:
            if (!f) throw ConfigError("factorization route needs a factorization");
            return f->Sbarinv.col(l).head(l + 1);
        case FormRoute::schur: {
            if (l == 0) {
                c(0) = 1 / g(0, 0);
                return c;
            }
            const Vec y = solve(Mat(g.topLeftCorner(l, l)), Vec(g.col(l).head(l)));
            const Real s = g(l, l) - g.row(l).head(l).dot(y);
            c.head(l) = -y / s;
            c(l) = 1 / s;
            return c;
        }
        case FormRoute::inverse_row: {
            Vec e = Vec::Zero(l + 1);
            e(l) = 1;
            return solve(Mat(g.topLeftCorner(l + 1, l + 1)), e);
        }
        case FormRoute::determinant: {
            const Real d = checked_det(g.topLeftCorner(l + 1, l + 1), "g^[l+1]");
            const Mat B = g.topLeftCorner(l, l + 1);
            for (int j = 0; j <= l; ++j) {
                Mat M(l, l);
                for (int col = 0, o = 0; col <= l; ++col)
                    if (col != j) M.col(o++) = B.col(col);
                const Real sign = ((j + l) % 2 == 0) ? 1 : -1;
                c(j) = sign * determinant(M) / d;
            }
            return c;
        }
    }
    return c;
}

MopPolynomial det_mop_oracle(const MomentMatrix& mm, int l, int a) {
    if (l < 1 || l >= mm.size()) throw ConfigError("determinantal oracle needs 1 <= l < L");
    const auto polys = split_channels(primal_form(mm.g(), l, FormRoute::determinant), mm.n1());
    return {a, l, polys.at(static_cast<std::size_t>(a))};
}

MopPolynomial det_dual_mop_oracle(const MomentMatrix& mm, int l, int b) {
    if (l >= mm.size()) throw ConfigError("determinantal oracle needs l < L");
    const auto polys = split_channels(dual_form(mm.g(), l, FormRoute::determinant), mm.n2());
    return {b, l, polys.at(static_cast<std::size_t>(b))};
}

Vec weighted_monomials(const WeightedMeasure& wm, const Composition& n, int side, int count, const Real& x) {
    const auto& ws = side == 1 ? wm.w1() : wm.w2();
    std::vector<Real> wv;
    for (const auto& w : ws) wv.push_back(w(x));
    Vec v(count);
    for (int i = 0; i < count; ++i)
        v(i) = pow(x, local_degree(i, n)) * wv[static_cast<std::size_t>(channel_of(i, n))];
    return v;
}

Vec channel_monomials(const Composition& n, int a, int count, const Real& x) {
    Vec v = Vec::Zero(count);
    for (int i = 0; i < count; ++i)
        if (channel_of(i, n) == a) v(i) = pow(x, local_degree(i, n));
    return v;
}

Real eval_form(const WeightedMeasure& wm, const Composition& n, int side, const Vec& c, const Real& x) {
    return c.dot(weighted_monomials(wm, n, side, static_cast<int>(c.size()), x));
}

Real linear_form(const Factorization& f, const WeightedMeasure& wm, int l, const Real& x) {
    return eval_form(wm, f.n1, 1, f.S.row(l).head(l + 1).transpose(), x);
}

Real dual_linear_form(const Factorization& f, const WeightedMeasure& wm, int l, const Real& x) {
    return eval_form(wm, f.n2, 2, f.Sbarinv.col(l).head(l + 1), x);
}

namespace {

void require_off_support(const Measure& mu, const Real& z) {
    Real d = 0;
    if (z < mu.lo()) d = mu.lo() - z;
    else if (z > mu.hi()) d = z - mu.hi();
    if (d < Real("1e-6")) throw TooCloseToSupport("z = " + format_real(z, 10) + " is within 1e-6 of the support");
}

}  // namespace

Real second_kind(const Factorization& f, const WeightedMeasure& wm, int l, Kind2 side, int channel, const Real& z) {
    const Measure& mu = wm.measure();
    require_off_support(mu, z);
    Real s = 0;
    for (int i = 0; i < mu.size(); ++i) {
        const Real x = mu.nodes()[static_cast<std::size_t>(i)];
        const Real form = side == Kind2::C ? linear_form(f, wm, l, x) : dual_linear_form(f, wm, l, x);
        const Real w = side == Kind2::C ? wm.w2()[static_cast<std::size_t>(channel)](x)
                                        : wm.w1()[static_cast<std::size_t>(channel)](x);
        s += mu.masses()[static_cast<std::size_t>(i)] * form * w / (z - x);
    }
    return s;
}

Real second_kind_series(const MomentMatrix& mm, int l, Kind2 side, int channel, const Real& z, int terms) {
    const Measure& mu = mm.source().measure();
    if (abs(z) < 2 * mu.radius()) throw TooCloseToSupport("series form needs |z| >= 2 R");
    const Mat& g = mm.g();
    if (side == Kind2::C) {
        const int start = associated_integer(l, channel, Side::plus, mm.n2());
        const int k0 = local_degree(start, mm.n2());
        Mat B(l + 1, l + 1);
        B.leftCols(l) = g.topLeftCorner(l + 1, l);
        for (int k = 0; k <= l; ++k) {
            Real s = 0;
            for (int m = 0; m < terms; ++m) {
                const int kk = k0 + m;
                s += mm.moment(channel_of(k, mm.n1()), channel, local_degree(k, mm.n1()) + kk) / pow(z, kk + 1);
            }
            B(k, l) = s;
        }
        return determinant(B) / determinant(Mat(g.topLeftCorner(l, l)));
    }
    const int start = associated_integer(l, channel, Side::plus, mm.n1());
    const int k0 = local_degree(start, mm.n1());
    Mat B(l + 1, l + 1);
    B.topRows(l) = g.topLeftCorner(l, l + 1);
    for (int k = 0; k <= l; ++k) {
        Real s = 0;
        for (int m = 0; m < terms; ++m) {
            const int kk = k0 + m;
            s += mm.moment(channel, channel_of(k, mm.n2()), kk + local_degree(k, mm.n2())) / pow(z, kk + 1);
        }
        B(l, k) = s;
    }
    return determinant(B) / determinant(Mat(g.topLeftCorner(l + 1, l + 1)));
}

Real markov_stieltjes_function(const WeightedMeasure& wm, int a, int b, const Real& z) {
    require_off_support(wm.measure(), z);
    const auto& w1 = wm.w1()[static_cast<std::size_t>(a)];
    const auto& w2 = wm.w2()[static_cast<std::size_t>(b)];
    return integrate([&](const Real& x) { return w1(x) * w2(x) / (z - x); }, wm.measure());
}

Real markov_stieltjes(const Factorization& f, const WeightedMeasure& wm, int l, Kind2 side, int channel,
                      const Real& z) {
    Real h = 0;
    if (side == Kind2::C) {
        for (int a = 0; a < wm.p1(); ++a) h += mop(f, l, a)(z) * markov_stieltjes_function(wm, a, channel, z);
    } else {
        for (int b = 0; b < wm.p2(); ++b) h += dual_mop(f, l, b)(z) * markov_stieltjes_function(wm, channel, b, z);
    }
    return h - second_kind(f, wm, l, side, channel, z);
}

Real markov_stieltjes_polynomiality(const Factorization& f, const WeightedMeasure& wm, int l, Kind2 side,
                                    int channel) {
    int deg = -1;
    if (side == Kind2::C)
        for (int a = 0; a < wm.p1(); ++a) deg = std::max(deg, static_cast<int>(mop(f, l, a).coeffs.size()) - 2);
    else
        for (int b = 0; b < wm.p2(); ++b) deg = std::max(deg, static_cast<int>(dual_mop(f, l, b).coeffs.size()) - 2);
    const Real hi = wm.measure().hi() + 1;
    std::vector<Real> xs, ys;
    for (int m = 0; m <= deg; ++m) {
        xs.push_back(hi + Real(m) * Real("0.37"));
        ys.push_back(markov_stieltjes(f, wm, l, side, channel, xs.back()));
    }
    const std::vector<Real> probes = {hi + Real("0.11"), wm.measure().lo() - Real("1.3"), hi + Real(deg + 3)};
    Real scale = 1, worst = 0;
    for (const Real& y : ys) scale = std::max(scale, Real(abs(y)));
    for (const Real& t : probes) {
        const Real h = markov_stieltjes(f, wm, l, side, channel, t);
        const Real p = xs.empty() ? Real(0) : lagrange_eval(xs, ys, t);
        scale = std::max(scale, Real(abs(h)));
        worst = std::max(worst, Real(abs(h - p)));
    }
    return worst / scale;
}

namespace {

// rows: Q^{(l)} (or Qbar) at every node, l <= lmax
Mat forms_at_nodes(const Factorization& f, const WeightedMeasure& wm, int lmax, int side) {
    if (lmax >= f.L) throw ConfigError("lmax must be below the truncation");
    const Measure& mu = wm.measure();
    const int K = lmax + 1;
    Mat X(K, mu.size());
    for (int i = 0; i < mu.size(); ++i)
        X.col(i) = weighted_monomials(wm, side == 1 ? f.n1 : f.n2, side, K, mu.nodes()[static_cast<std::size_t>(i)]);
    if (side == 1) return Mat(f.S.topLeftCorner(K, K).triangularView<Eigen::Lower>()) * X;
    return Mat(f.Sbarinv.topLeftCorner(K, K).triangularView<Eigen::Upper>()).transpose() * X;
}

}  // namespace

Real biorthogonality_residual(const Factorization& f, const WeightedMeasure& wm, int lmax) {
    const Measure& mu = wm.measure();
    const Mat Q = forms_at_nodes(f, wm, lmax, 1);
    Mat Qb = forms_at_nodes(f, wm, lmax, 2);
    for (int i = 0; i < mu.size(); ++i) Qb.col(i) *= mu.masses()[static_cast<std::size_t>(i)];
    const Mat G = Q * Qb.transpose() - Mat::Identity(lmax + 1, lmax + 1);
    return max_abs(G);
}

Real orthogonality_residual(const Factorization& f, const WeightedMeasure& wm, int lmax) {
    const Measure& mu = wm.measure();
    const Mat Q = forms_at_nodes(f, wm, lmax, 1);
    const Mat Qb = forms_at_nodes(f, wm, lmax, 2);
    Real worst = 0;
    for (int l = 0; l <= lmax; ++l) {
        for (int b = 0; b < wm.p2(); ++b) {
            for (int k = 0; k < degree_count(l - 1, b, f.n2); ++k) {
                Real s = 0;
                for (int i = 0; i < mu.size(); ++i) {
                    const Real x = mu.nodes()[static_cast<std::size_t>(i)];
                    s += mu.masses()[static_cast<std::size_t>(i)] * Q(l, i) * wm.w2()[static_cast<std::size_t>(b)](x) * pow(x, k);
                }
                worst = std::max(worst, Real(abs(s)));
            }
        }
        for (int a = 0; a < wm.p1(); ++a) {
            for (int k = 0; k < degree_count(l - 1, a, f.n1); ++k) {
                Real s = 0;
                for (int i = 0; i < mu.size(); ++i) {
                    const Real x = mu.nodes()[static_cast<std::size_t>(i)];
                    s += mu.masses()[static_cast<std::size_t>(i)] * Qb(l, i) * wm.w1()[static_cast<std::size_t>(a)](x) * pow(x, k);
                }
                worst = std::max(worst, Real(abs(s)));
            }
        }
    }
    return worst;
}

}  // namespace mixedmop
