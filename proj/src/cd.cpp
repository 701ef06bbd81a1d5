#include "mixedmop/cd.hpp"

#include <algorithm>

#include "mixedmop/errors.hpp"

namespace mixedmop {

Real cd_kernel_sum(const Factorization& f, const WeightedMeasure& wm, int l, const Real& x, const Real& y) {
    if (l > f.L) throw WindowExceeded("kernel level beyond the factorization");
    Real k = 0;
    for (int i = 0; i < l; ++i) k += linear_form(f, wm, i, y) * dual_linear_form(f, wm, i, x);
    return k;
}

Real cd_kernel_partial(const Factorization& f, int l, int b, int a, const Real& x, const Real& y) {
    if (l > f.L) throw WindowExceeded("kernel level beyond the factorization");
    Real k = 0;
    for (int i = 0; i < l; ++i) k += mop(f, i, a)(y) * dual_mop(f, i, b)(x);
    return k;
}

namespace {

Mat block(const MomentMatrix& mm, int rows, int cols) {
    const int M = static_cast<int>(mm.extended().rows());
    if (rows > M || cols > M) throw WindowExceeded("block beyond the extension window");
    return mm.extended().topLeftCorner(rows, cols);
}

Real gentry(const MomentMatrix& mm, int i, int j) { return mm.entry(i, j); }

Mat checked_inverse(const Mat& g) {
    const Real d = determinant(g);
    if (d == 0 || !isfinite(d)) throw SingularMinor("leading block is singular");
    return inverse(g);
}

void require_level(const MomentMatrix& mm, int l) {
    if (l < std::max(mm.n1().total(), mm.n2().total()))
        throw ConfigError("the CD formula needs l >= max(|n1|, |n2|)");
}

// Coefficient vector of a bordered determinant whose last column is symbolic, divided by `den`.
// `rows` selects rows of the extended matrix, `cols` its columns, `sym` the flat index carried by each row.
Vec bordered_column(const MomentMatrix& mm, const std::vector<int>& rows, const std::vector<int>& cols,
                    const std::vector<int>& sym, int count, const Real& den, const Real& sign) {
    const int m = static_cast<int>(rows.size());
    Mat base(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c + 1 < m; ++c) base(r, c) = gentry(mm, rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    Vec out = Vec::Zero(count);
    for (int r = 0; r < m; ++r) {
        Mat t = base;
        t.col(m - 1).setZero();
        t(r, m - 1) = 1;
        out(sym[static_cast<std::size_t>(r)]) += sign * determinant(t) / den;
    }
    return out;
}

// Same with the last row symbolic.
Vec bordered_row(const MomentMatrix& mm, const std::vector<int>& rows, const std::vector<int>& cols,
                 const std::vector<int>& sym, int count, const Real& den, const Real& sign) {
    const int m = static_cast<int>(cols.size());
    Mat base(m, m);
    for (int r = 0; r + 1 < m; ++r)
        for (int c = 0; c < m; ++c) base(r, c) = gentry(mm, rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    Vec out = Vec::Zero(count);
    for (int c = 0; c < m; ++c) {
        Mat t = base;
        t.row(m - 1).setZero();
        t(m - 1, c) = 1;
        out(sym[static_cast<std::size_t>(c)]) += sign * determinant(t) / den;
    }
    return out;
}

std::vector<int> range(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

std::vector<int> range_without(int n, int skip) {
    std::vector<int> v;
    for (int i = 0; i < n; ++i)
        if (i != skip) v.push_back(i);
    return v;
}

Real parity(int k) { return k % 2 == 0 ? Real(1) : Real(-1); }

Vec linear_route(const MomentMatrix& mm, int l, AssocKind kind, int ch) {
    switch (kind) {
        case AssocKind::plus_a: {
            const int lp = associated_integer(l, ch, Side::plus, mm.n1());
            Vec row(l);
            for (int j = 0; j < l; ++j) row(j) = gentry(mm, lp, j);
            Vec c = Vec::Zero(lp + 1);
            if (l > 0) c.head(l) = -(checked_inverse(block(mm, l, l)).transpose() * row);
            c(lp) += 1;
            return c;
        }
        case AssocKind::plus_b: {
            const int lp = associated_integer(l, ch, Side::plus, mm.n2());
            Vec col(l);
            for (int i = 0; i < l; ++i) col(i) = gentry(mm, i, lp);
            Vec c = Vec::Zero(lp + 1);
            if (l > 0) c.head(l) = -(checked_inverse(block(mm, l, l)) * col);
            c(lp) += 1;
            return c;
        }
        case AssocKind::minus_a: {
            const int lm = associated_integer(l, ch, Side::minus, mm.n1());
            return checked_inverse(block(mm, l + 1, l + 1)).col(lm);
        }
        case AssocKind::minus_b: {
            const int lm = associated_integer(l, ch, Side::minus, mm.n2());
            return checked_inverse(block(mm, l + 1, l + 1)).row(lm).transpose();
        }
    }
    return {};
}

Vec determinant_route(const MomentMatrix& mm, int l, AssocKind kind, int ch) {
    switch (kind) {
        case AssocKind::plus_a: {
            const int lp = associated_integer(l, ch, Side::plus, mm.n1());
            auto rows = range(l);
            rows.push_back(lp);
            auto sym = rows;
            return bordered_column(mm, rows, range(l), sym, lp + 1, determinant(block(mm, l, l)), 1);
        }
        case AssocKind::plus_b: {
            const int lp = associated_integer(l, ch, Side::plus, mm.n2());
            auto cols = range(l);
            cols.push_back(lp);
            return bordered_row(mm, range(l), cols, cols, lp + 1, determinant(block(mm, l, l)), 1);
        }
        case AssocKind::minus_a: {
            const int lm = associated_integer(l, ch, Side::minus, mm.n1());
            auto rows = range_without(l + 1, lm);
            rows.push_back(-1);
            return bordered_row(mm, rows, range(l + 1), range(l + 1), l + 1, determinant(block(mm, l + 1, l + 1)),
                                parity(l + lm));
        }
        case AssocKind::minus_b: {
            const int lm = associated_integer(l, ch, Side::minus, mm.n2());
            auto cols = range_without(l + 1, lm);
            cols.push_back(-1);
            return bordered_column(mm, range(l + 1), cols, range(l + 1), l + 1, determinant(block(mm, l + 1, l + 1)),
                                   parity(l + lm));
        }
    }
    return {};
}

}  // namespace

Real abc_kernel(const MomentMatrix& mm, int l, const Real& x, const Real& y, std::optional<std::pair<int, int>> partial) {
    if (l == 0) return 0;
    const Mat gi = checked_inverse(block(mm, l, l));
    Vec left, right;
    if (partial) {
        left = channel_monomials(mm.n2(), partial->first, l, x);
        right = channel_monomials(mm.n1(), partial->second, l, y);
    } else {
        left = weighted_monomials(mm.source(), mm.n2(), 2, l, x);
        right = weighted_monomials(mm.source(), mm.n1(), 1, l, y);
    }
    return left.dot(gi * right);
}

AssociatedForm associated_form(const MomentMatrix& mm, int l, AssocKind kind, int channel, AssocRoute route) {
    if (l < 0) throw ConfigError("negative level");
    AssociatedForm out;
    out.kind = kind;
    out.level = l;
    out.channel = channel;
    out.coeffs = route == AssocRoute::linear_algebra ? linear_route(mm, l, kind, channel)
                                                     : determinant_route(mm, l, kind, channel);
    out.polys = split_channels(out.coeffs, out.side() == 1 ? mm.n1() : mm.n2());
    return out;
}

MopPolynomial associated_poly(const MomentMatrix& mm, int l, AssocKind kind, int channel, int target,
                              AssocRoute route) {
    const auto form = associated_form(mm, l, kind, channel, route);
    return {target, l, form.polys.at(static_cast<std::size_t>(target))};
}

Real associated_linear_form(const MomentMatrix& mm, const AssociatedForm& form, const Real& x) {
    return eval_form(mm.source(), form.side() == 1 ? mm.n1() : mm.n2(), form.side(), form.coeffs, x);
}

Real associated_route_gap(const MomentMatrix& mm, int l) {
    Real gap = 0;
    auto compare = [&](AssocKind kind, int p) {
        for (int ch = 0; ch < p; ++ch) {
            const Vec a = associated_form(mm, l, kind, ch, AssocRoute::linear_algebra).coeffs;
            const Vec b = associated_form(mm, l, kind, ch, AssocRoute::determinant).coeffs;
            gap = std::max(gap, max_abs(Vec(a - b)));
        }
    };
    compare(AssocKind::plus_a, mm.n1().p());
    compare(AssocKind::minus_a, mm.n1().p());
    compare(AssocKind::plus_b, mm.n2().p());
    compare(AssocKind::minus_b, mm.n2().p());
    return gap;
}

Real associated_orthogonality_residual(const MomentMatrix& mm, int l) {
    Real worst = 0;
    for (int a = 0; a < mm.n1().p(); ++a) {
        const Vec c = associated_form(mm, l, AssocKind::plus_a, a).coeffs;
        for (int k = 0; k < l; ++k) {
            Real s = 0;
            for (int i = 0; i < c.size(); ++i) s += c(i) * gentry(mm, i, k);
            worst = std::max(worst, Real(abs(s)));
        }
    }
    for (int b = 0; b < mm.n2().p(); ++b) {
        const Vec c = associated_form(mm, l, AssocKind::plus_b, b).coeffs;
        for (int k = 0; k < l; ++k) {
            Real s = 0;
            for (int j = 0; j < c.size(); ++j) s += gentry(mm, k, j) * c(j);
            worst = std::max(worst, Real(abs(s)));
        }
    }
    return worst;
}

Real cd_formula_residual(const MomentMatrix& mm, const Factorization& f, int l, const Real& x, const Real& y) {
    require_level(mm, l);
    Real rhs = 0;
    for (int b = 0; b < mm.n2().p(); ++b)
        rhs += associated_linear_form(mm, associated_form(mm, l, AssocKind::plus_b, b), x) *
               associated_linear_form(mm, associated_form(mm, l - 1, AssocKind::minus_b, b), y);
    for (int a = 0; a < mm.n1().p(); ++a)
        rhs -= associated_linear_form(mm, associated_form(mm, l - 1, AssocKind::minus_a, a), x) *
               associated_linear_form(mm, associated_form(mm, l, AssocKind::plus_a, a), y);
    return abs((x - y) * cd_kernel_sum(f, mm.source(), l, x, y) - rhs);
}

Real cd_formula_partial_residual(const MomentMatrix& mm, const Factorization& f, int l, int bp, int ap,
                                 const Real& x, const Real& y) {
    require_level(mm, l);
    auto poly = [&](int lev, AssocKind kind, int ch, int target, const Real& t) {
        return eval_poly(associated_form(mm, lev, kind, ch).polys.at(static_cast<std::size_t>(target)), t);
    };
    Real rhs = 0;
    for (int b = 0; b < mm.n2().p(); ++b)
        rhs += poly(l, AssocKind::plus_b, b, bp, x) * poly(l - 1, AssocKind::minus_b, b, ap, y);
    for (int a = 0; a < mm.n1().p(); ++a)
        rhs -= poly(l - 1, AssocKind::minus_a, a, bp, x) * poly(l, AssocKind::plus_a, a, ap, y);
    return abs((x - y) * cd_kernel_partial(f, l, bp, ap, x, y) - rhs);
}

Real reproducing_residual(const Factorization& f, const WeightedMeasure& wm, int l, const Real& x, const Real& y) {
    const Measure& mu = wm.measure();
    Real s = 0;
    for (int i = 0; i < mu.size(); ++i) {
        const Real& v = mu.nodes()[static_cast<std::size_t>(i)];
        s += mu.masses()[static_cast<std::size_t>(i)] * cd_kernel_sum(f, wm, l, x, v) * cd_kernel_sum(f, wm, l, v, y);
    }
    return abs(s - cd_kernel_sum(f, wm, l, x, y));
}

Real projection_residual(const Factorization& f, const WeightedMeasure& wm, int l, const Real& y) {
    const Measure& mu = wm.measure();
    Real worst = 0;
    std::vector<Real> ky(static_cast<std::size_t>(mu.size()));
    for (int i = 0; i < mu.size(); ++i) ky[static_cast<std::size_t>(i)] = cd_kernel_sum(f, wm, l, mu.nodes()[static_cast<std::size_t>(i)], y);
    for (int k = 0; k < l; ++k) {
        Real s = 0;
        for (int i = 0; i < mu.size(); ++i) {
            const auto si = static_cast<std::size_t>(i);
            s += mu.masses()[si] * ky[si] * linear_form(f, wm, k, mu.nodes()[si]);
        }
        worst = std::max(worst, Real(abs(s - linear_form(f, wm, k, y))));
    }
    return worst;
}

}  // namespace mixedmop
