#include "mixedmop/tau.hpp"

#include <algorithm>

#include "mixedmop/cd.hpp"
#include "mixedmop/errors.hpp"
#include "mixedmop/linalg.hpp"

namespace mixedmop {

namespace {

std::vector<int> range(int n) {
    std::vector<int> v(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

std::vector<int> range_without(int n, int skip) {
    std::vector<int> v;
    for (int i = 0; i < n; ++i)
        if (i != skip) v.push_back(i);
    return v;
}

int parity(int k) { return k % 2 == 0 ? 1 : -1; }

std::optional<int> minus_integer(int l, int ch, const Composition& n) {
    try {
        return associated_integer(l, ch, Side::minus, n);
    } catch (const MinusNotFound&) {
        return std::nullopt;
    }
}

// Largest position whose index lies in channel ch.
std::optional<int> top_position(const std::vector<int>& idx, int ch, const Composition& n) {
    for (int p = static_cast<int>(idx.size()) - 1; p >= 0; --p)
        if (channel_of(idx[static_cast<std::size_t>(p)], n) == ch) return p;
    return std::nullopt;
}

std::vector<int> erase_at(std::vector<int> v, int pos) {
    v.erase(v.begin() + pos);
    return v;
}

Real ipow(const Real& z, int e) {
    Real r = 1;
    const Real b = e < 0 ? Real(1 / z) : z;
    for (int i = 0; i < std::abs(e); ++i) r *= b;
    return r;
}

Real relative_gap(const Real& a, const Real& b) { return abs(a - b) / std::max(Real(1), Real(abs(b))); }

}  // namespace

GramSource::GramSource(const WeightedMeasure& wm, Composition n1, Composition n2)
    : wm_(wm), n1_(std::move(n1)), n2_(std::move(n2)) {
    if (n1_.p() != wm.p1() || n2_.p() != wm.p2()) throw ConfigError("compositions do not match the weights");
    const auto& x = wm.measure().nodes();
    for (const auto& w : wm.w1()) {
        std::vector<Real> v;
        for (const auto& xi : x) v.push_back(w(xi));
        w1_.push_back(std::move(v));
    }
    for (const auto& w : wm.w2()) {
        std::vector<Real> v;
        for (const auto& xi : x) v.push_back(w(xi));
        w2_.push_back(std::move(v));
    }
    pow_.assign(x.size(), std::vector<Real>{Real(1)});
}

const Real& GramSource::power(std::size_t node, int k) const {
    auto& p = pow_[node];
    while (static_cast<int>(p.size()) <= k) p.push_back(p.back() * wm_.measure().nodes()[node]);
    return p[static_cast<std::size_t>(k)];
}

Real GramSource::moment(int a, int k1, int b, int k2) const {
    const auto& m = wm_.measure().masses();
    const auto& u = w1_.at(static_cast<std::size_t>(a));
    const auto& v = w2_.at(static_cast<std::size_t>(b));
    Real s = 0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m[i] * power(i, k1 + k2) * u[i] * v[i];
    return s;
}

Real GramSource::entry(int i, int j) const {
    return moment(channel_of(i, n1_), local_degree(i, n1_), channel_of(j, n2_), local_degree(j, n2_));
}

Mat GramSource::block(const std::vector<int>& rows, const std::vector<int>& cols) const {
    Mat b(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = entry(rows[r], cols[c]);
    return b;
}

Real evaluate(const MinorSpec& m, const GramSource& src) {
    if (m.rows.size() != m.cols.size()) throw ConfigError("minor is not square");
    if (m.rows.empty()) return Real(m.sign);
    return m.sign * determinant(src.block(m.rows, m.cols));
}

Real checked_evaluate(const MinorSpec& m, const GramSource& src, const Real& rel) {
    if (m.rows.empty()) return Real(m.sign);
    const Mat b = src.block(m.rows, m.cols);
    Real bound = 1;
    for (Eigen::Index r = 0; r < b.rows(); ++r) bound *= b.row(r).norm();
    const Real d = determinant(b);
    if (abs(d) <= rel * bound) throw SingularTau("tau determinant vanishes at working precision");
    return m.sign * d;
}

MinorSpec spec_level(int l) { return {range(l), range(l), 1}; }

std::optional<MinorSpec> spec_minus(const Composition& n1, int l, int a) {
    const auto lm = minus_integer(l, a, n1);
    if (!lm) return std::nullopt;
    return MinorSpec{range_without(l + 1, *lm), range(l), parity(l + *lm)};
}

std::optional<MinorSpec> spec_plus_minus(const Composition& n1, int l, int ap, int a) {
    auto rows = range(l);
    rows.push_back(associated_integer(l, ap, Side::plus, n1));
    const auto pos = top_position(rows, a, n1);
    if (!pos) return std::nullopt;
    return MinorSpec{erase_at(rows, *pos), range(l), parity(l + *pos)};
}

std::optional<MinorSpec> spec_minus_minus(const Composition& n1, const Composition& n2, int l, int b, int a) {
    const auto la = minus_integer(l, a, n1);
    const auto lb = minus_integer(l, b, n2);
    if (!la || !lb) return std::nullopt;
    return MinorSpec{range_without(l + 1, *la), range_without(l + 1, *lb), parity(*la + *lb)};
}

std::optional<MinorSpec> spec_bar_minus(const Composition& n2, int l, int b) {
    const auto lm = minus_integer(l, b, n2);
    if (!lm) return std::nullopt;
    return MinorSpec{range(l), range_without(l + 1, *lm), parity(l + *lm)};
}

std::optional<MinorSpec> spec_bar_plus_minus(const Composition& n2, int l, int bp, int b) {
    auto cols = range(l);
    cols.push_back(associated_integer(l, bp, Side::plus, n2));
    const auto pos = top_position(cols, b, n2);
    if (!pos) return std::nullopt;
    return MinorSpec{range(l), erase_at(cols, *pos), parity(l + *pos)};
}

MinorSpec spec_plus(const Composition& n1, int l, int a) {
    auto rows = range(l);
    rows.push_back(associated_integer(l, a, Side::plus, n1));
    return {rows, range(l + 1), 1};
}

MinorSpec spec_bar_plus(const Composition& n2, int l, int b) {
    auto cols = range(l);
    cols.push_back(associated_integer(l, b, Side::plus, n2));
    return {range(l + 1), cols, 1};
}

TauTable tau_table(const GramSource& src, int lmax) {
    if (lmax < 0) throw ConfigError("negative level");
    const Composition& n1 = src.n1();
    const Composition& n2 = src.n2();
    const int p1 = n1.p(), p2 = n2.p();
    auto opt = [&](const std::optional<MinorSpec>& m) -> std::optional<Real> {
        if (!m) return std::nullopt;
        return evaluate(*m, src);
    };
    TauTable t;
    t.n1 = n1;
    t.n2 = n2;
    t.lmax = lmax;
    for (int l = 0; l <= lmax + 1; ++l) t.tau.push_back(evaluate(spec_level(l), src));
    for (int l = 0; l <= lmax; ++l) {
        std::vector<std::optional<Real>> mi, bmi;
        std::vector<Real> pl, bpl;
        std::vector<std::vector<std::optional<Real>>> pm(static_cast<std::size_t>(p1)), bpm(static_cast<std::size_t>(p2)),
            mm(static_cast<std::size_t>(p2));
        for (int a = 0; a < p1; ++a) {
            mi.push_back(opt(spec_minus(n1, l, a)));
            pl.push_back(evaluate(spec_plus(n1, l, a), src));
            for (int a2 = 0; a2 < p1; ++a2) pm[static_cast<std::size_t>(a)].push_back(opt(spec_plus_minus(n1, l, a, a2)));
        }
        for (int b = 0; b < p2; ++b) {
            bmi.push_back(opt(spec_bar_minus(n2, l, b)));
            bpl.push_back(evaluate(spec_bar_plus(n2, l, b), src));
            for (int b2 = 0; b2 < p2; ++b2) bpm[static_cast<std::size_t>(b)].push_back(opt(spec_bar_plus_minus(n2, l, b, b2)));
            for (int a = 0; a < p1; ++a) mm[static_cast<std::size_t>(b)].push_back(opt(spec_minus_minus(n1, n2, l, b, a)));
        }
        t.minus.push_back(std::move(mi));
        t.bar_minus.push_back(std::move(bmi));
        t.plus.push_back(std::move(pl));
        t.bar_plus.push_back(std::move(bpl));
        t.plus_minus.push_back(std::move(pm));
        t.bar_plus_minus.push_back(std::move(bpm));
        t.minus_minus.push_back(std::move(mm));
    }
    return t;
}

Real tau_ratio_residual(const TauTable& t, const Factorization& f) {
    Real worst = 0;
    for (int l = 0; l <= t.lmax && l < f.L; ++l) {
        const auto sl = static_cast<std::size_t>(l);
        worst = std::max(worst, Real(abs(f.Sbar(l, l) * t.tau[sl] - t.tau[sl + 1]) / abs(t.tau[sl + 1])));
    }
    return worst;
}

Real tau_degrees(const GramSource& src, const std::vector<int>& nu1, const std::vector<int>& nu2) {
    if (static_cast<int>(nu1.size()) != src.n1().p() || static_cast<int>(nu2.size()) != src.n2().p())
        throw ConfigError("degree vectors do not match the weights");
    std::vector<std::pair<int, int>> rows, cols;
    for (std::size_t a = 0; a < nu1.size(); ++a)
        for (int k = 0; k < nu1[a]; ++k) rows.emplace_back(static_cast<int>(a), k);
    for (std::size_t b = 0; b < nu2.size(); ++b)
        for (int k = 0; k < nu2[b]; ++k) cols.emplace_back(static_cast<int>(b), k);
    if (rows.empty() || rows.size() != cols.size() + 1) throw ConfigError("need |nu1| = |nu2| + 1");
    rows.pop_back();
    const auto n = static_cast<Eigen::Index>(cols.size());
    if (n == 0) return 1;
    Mat g(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto& [a, k1] = rows[static_cast<std::size_t>(r)];
            const auto& [b, k2] = cols[static_cast<std::size_t>(c)];
            g(r, c) = src.moment(a, k1, b, k2);
        }
    return determinant(g);
}

namespace {

int prefix(const std::vector<int>& nu, int a) {
    int s = 0;
    for (int j = 0; j <= a; ++j) s += nu[static_cast<std::size_t>(j)];
    return s;
}

}  // namespace

int epsilon11(const std::vector<int>& nu1, int a, int ap) {
    if (a == ap) return 1;
    const int last = static_cast<int>(nu1.size()) - 1;
    const int e = prefix(nu1, a) + prefix(nu1, ap);
    return ap < a ? parity(e + (a == last ? 1 : 0) - 1) : parity(e + (ap == last ? 1 : 0));
}

int epsilon22(const std::vector<int>& nu2, int b, int bp) {
    if (b == bp) return 1;
    const int e = prefix(nu2, b) + prefix(nu2, bp);
    return bp < b ? parity(e - 1) : parity(e);
}

int epsilon21(const std::vector<int>& nu1, const std::vector<int>& nu2, int b, int a) {
    const int last = static_cast<int>(nu2.size()) - 1;
    return parity(prefix(nu2, b) + prefix(nu1, a) + (b == last ? 1 : 0));
}

namespace {

GramSource miwa_source(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, bool bar, int ch,
                       const Real& z, int power) {
    const WeightFactor f{WeightFactor::Kind::miwa, z, 0, power};
    const auto c = static_cast<std::size_t>(ch);
    if (bar) return GramSource(wm.with_w2(ch, wm.w2().at(c).with_factor(f)), n1, n2);
    return GramSource(wm.with_w1(ch, wm.w1().at(c).with_factor(f)), n1, n2);
}

}  // namespace

Real tau_representation(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int l, TauRep kind,
                        int channel, int other, const Real& z) {
    if (l < 0) throw ConfigError("negative level");
    if (abs(z) <= wm.measure().radius()) throw TooCloseToSupport("Miwa shift needs |z| beyond the support radius");
    const GramSource base(wm, n1, n2);
    auto tau = [&](int lev) { return checked_evaluate(spec_level(lev), base); };
    const int a = channel, b = channel;
    switch (kind) {
        case TauRep::mop: {
            const auto m = spec_minus(n1, l, a);
            if (!m) return 0;
            return ipow(z, degree_count(l, a, n1) - 1) * evaluate(*m, miwa_source(wm, n1, n2, false, a, z, 1)) / tau(l);
        }
        case TauRep::plus: {
            const auto m = spec_plus_minus(n1, l, other, a);
            if (!m) return 0;
            const int e = degree_count(l - 1, a, n1) + (a == other ? 1 : 0) - 1;
            return ipow(z, e) * evaluate(*m, miwa_source(wm, n1, n2, false, a, z, 1)) / tau(l);
        }
        case TauRep::minus: {
            const auto m = spec_minus_minus(n1, n2, l, other, a);
            if (!m) return 0;
            return ipow(z, degree_count(l, a, n1) - 1) * evaluate(*m, miwa_source(wm, n1, n2, false, a, z, 1)) /
                   tau(l + 1);
        }
        case TauRep::dual_mop: {
            const auto m = spec_bar_minus(n2, l, b);
            if (!m) return 0;
            return ipow(z, degree_count(l, b, n2) - 1) * evaluate(*m, miwa_source(wm, n1, n2, true, b, z, 1)) /
                   tau(l + 1);
        }
        case TauRep::dual_plus: {
            const auto m = spec_bar_plus_minus(n2, l, other, b);
            if (!m) return 0;
            const int e = degree_count(l - 1, b, n2) + (b == other ? 1 : 0) - 1;
            return ipow(z, e) * evaluate(*m, miwa_source(wm, n1, n2, true, b, z, 1)) / tau(l);
        }
        case TauRep::dual_minus: {
            const auto m = spec_minus_minus(n1, n2, l, b, other);
            if (!m) return 0;
            return ipow(z, degree_count(l, b, n2) - 1) * evaluate(*m, miwa_source(wm, n1, n2, true, b, z, 1)) /
                   tau(l + 1);
        }
        case TauRep::cauchy_bar:
            return ipow(z, -degree_count(l - 1, a, n1) - 1) *
                   evaluate(spec_plus(n1, l, a), miwa_source(wm, n1, n2, false, a, z, -1)) / tau(l + 1);
        case TauRep::cauchy:
            return ipow(z, -degree_count(l - 1, b, n2) - 1) *
                   evaluate(spec_bar_plus(n2, l, b), miwa_source(wm, n1, n2, true, b, z, -1)) / tau(l);
    }
    return 0;
}

Real direct_representation(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int l, TauRep kind,
                           int channel, int other, const Real& z) {
    const MomentMatrix mm(wm, n1, n2, l + 2);
    switch (kind) {
        case TauRep::mop: return mop(gauss_borel(mm), l, channel)(z);
        case TauRep::dual_mop: return dual_mop(gauss_borel(mm), l, channel)(z);
        case TauRep::plus: return associated_poly(mm, l, AssocKind::plus_a, other, channel)(z);
        case TauRep::minus: return associated_poly(mm, l, AssocKind::minus_b, other, channel)(z);
        case TauRep::dual_plus: return associated_poly(mm, l, AssocKind::plus_b, other, channel)(z);
        case TauRep::dual_minus: return associated_poly(mm, l, AssocKind::minus_a, other, channel)(z);
        case TauRep::cauchy_bar: return second_kind(gauss_borel(mm), wm, l, Kind2::Cbar, channel, z);
        case TauRep::cauchy: return second_kind(gauss_borel(mm), wm, l, Kind2::C, channel, z);
    }
    return 0;
}

Real tau_mop_residual(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int l, const Real& z) {
    Real worst = 0;
    auto gap = [&](TauRep kind, int ch, int other) {
        Real d;
        try {
            d = direct_representation(wm, n1, n2, l, kind, ch, other, z);
        } catch (const MinusNotFound&) {
            return;
        }
        worst = std::max(worst, relative_gap(tau_representation(wm, n1, n2, l, kind, ch, other, z), d));
    };
    for (int a = 0; a < n1.p(); ++a) {
        gap(TauRep::mop, a, 0);
        for (int ap = 0; ap < n1.p(); ++ap) gap(TauRep::plus, a, ap);
        for (int b = 0; b < n2.p(); ++b) gap(TauRep::minus, a, b);
    }
    for (int b = 0; b < n2.p(); ++b) {
        gap(TauRep::dual_mop, b, 0);
        for (int bp = 0; bp < n2.p(); ++bp) gap(TauRep::dual_plus, b, bp);
        for (int a = 0; a < n1.p(); ++a) gap(TauRep::dual_minus, b, a);
    }
    return worst;
}

Real tau_cauchy_residual(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int l, const Real& z) {
    Real worst = 0;
    for (int a = 0; a < n1.p(); ++a) {
        const Real d = direct_representation(wm, n1, n2, l, TauRep::cauchy_bar, a, 0, z);
        worst = std::max(worst, abs(tau_representation(wm, n1, n2, l, TauRep::cauchy_bar, a, 0, z) - d) / abs(d));
    }
    for (int b = 0; b < n2.p(); ++b) {
        const Real d = direct_representation(wm, n1, n2, l, TauRep::cauchy, b, 0, z);
        worst = std::max(worst, abs(tau_representation(wm, n1, n2, l, TauRep::cauchy, b, 0, z) - d) / abs(d));
    }
    return worst;
}

namespace {

// Positions of `ch` on the shifted side, checked to carry degrees 0, 1, 2, ...
std::vector<int> channel_slots(const MinorSpec& m, const Composition& n, bool bar, int ch) {
    const auto& idx = bar ? m.cols : m.rows;
    std::vector<int> slots;
    for (std::size_t p = 0; p < idx.size(); ++p)
        if (channel_of(idx[p], n) == ch) {
            if (local_degree(idx[p], n) != static_cast<int>(slots.size()))
                throw ConfigError("channel rows are not consecutive degrees");
            slots.push_back(static_cast<int>(p));
        }
    return slots;
}

}  // namespace

Poly miwa_minus_poly(const GramSource& src, const MinorSpec& m, bool bar, int channel) {
    const Composition& n = bar ? src.n2() : src.n1();
    const auto slots = channel_slots(m, n, bar, channel);
    const int top = static_cast<int>(slots.size());
    Poly out;
    for (int j = 0; j <= top; ++j) {
        MinorSpec t = m;
        auto& idx = bar ? t.cols : t.rows;
        for (int s = 0, d = 0; s < top; ++s, ++d) {
            if (d == top - j) ++d;
            idx[static_cast<std::size_t>(slots[static_cast<std::size_t>(s)])] = compose_index(d, channel, n);
        }
        out.push_back(parity(j) * evaluate(t, src));
    }
    return out;
}

std::vector<Real> miwa_plus_series(const GramSource& src, const MinorSpec& m, bool bar, int channel, int terms) {
    const Composition& n = bar ? src.n2() : src.n1();
    const auto slots = channel_slots(m, n, bar, channel);
    if (slots.empty()) throw ConfigError("channel absent from the minor");
    const int top = static_cast<int>(slots.size()) - 1;
    const auto at = static_cast<Eigen::Index>(slots.back());
    Mat b = src.block(m.rows, m.cols);
    if (bar) b.transposeInPlace();
    const auto& other = bar ? m.rows : m.cols;
    // cofactors along the replaced row
    Vec cof(b.cols());
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
        Mat t = b;
        t.row(at).setZero();
        t(at, c) = 1;
        cof(c) = determinant(t);
    }
    std::vector<Real> out;
    for (int i = 0; i < terms; ++i) {
        const int idx = compose_index(top + i, channel, n);
        Real s = 0;
        for (Eigen::Index c = 0; c < b.cols(); ++c) {
            const int o = other[static_cast<std::size_t>(c)];
            s += (bar ? src.entry(o, idx) : src.entry(idx, o)) * cof(c);
        }
        out.push_back(m.sign * s);
    }
    return out;
}

LaurentSeries::LaurentSeries(int lo, std::vector<Real> coeffs, int order) : lo_(lo), c_(std::move(coeffs)), order_(order) {
    trim();
}

void LaurentSeries::trim() {
    const int floor = -4 * order_ - 64;
    if (lo_ < floor) {
        const auto cut = static_cast<std::size_t>(std::min(floor - lo_, static_cast<int>(c_.size())));
        c_.erase(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(cut));
        lo_ = floor;
    }
}

LaurentSeries LaurentSeries::polynomial(const Poly& p, int order) { return {0, p, order}; }

LaurentSeries LaurentSeries::cauchy(const std::vector<Real>& c, int order) {
    std::vector<Real> r(c.rbegin(), c.rend());
    return {-static_cast<int>(c.size()), std::move(r), order};
}

LaurentSeries LaurentSeries::inverse_powers(const std::vector<Real>& c, int shift, int order) {
    std::vector<Real> r(c.rbegin(), c.rend());
    return {shift - static_cast<int>(c.size()) + 1, std::move(r), order};
}

LaurentSeries LaurentSeries::exponential(const std::vector<Real>& d, int order) {
    // n e_n = sum_k k D_k e_{n-k}
    std::vector<Real> e(static_cast<std::size_t>(order + 1), Real(0));
    e[0] = 1;
    for (int n = 1; n <= order; ++n) {
        Real s = 0;
        for (int k = 1; k <= std::min(n, static_cast<int>(d.size())); ++k)
            s += k * d[static_cast<std::size_t>(k - 1)] * e[static_cast<std::size_t>(n - k)];
        e[static_cast<std::size_t>(n)] = s / n;
    }
    return {0, std::move(e), order};
}

LaurentSeries LaurentSeries::rational(const Poly& p, const Poly& q, int order) {
    if (q.empty() || q[0] == 0) throw ConfigError("denominator vanishes at the origin");
    std::vector<Real> r(static_cast<std::size_t>(order + 1), Real(0));
    for (int n = 0; n <= order; ++n) {
        Real s = n < static_cast<int>(p.size()) ? p[static_cast<std::size_t>(n)] : Real(0);
        for (int k = 1; k <= std::min(n, static_cast<int>(q.size()) - 1); ++k)
            s -= q[static_cast<std::size_t>(k)] * r[static_cast<std::size_t>(n - k)];
        r[static_cast<std::size_t>(n)] = s / q[0];
    }
    return {0, std::move(r), order};
}

Real LaurentSeries::coefficient(int e) const {
    const int i = e - lo_;
    if (i < 0 || i >= static_cast<int>(c_.size())) return 0;
    return c_[static_cast<std::size_t>(i)];
}

LaurentSeries LaurentSeries::operator*(const LaurentSeries& o) const {
    if (c_.empty() || o.c_.empty()) return {0, {}, std::min(order_, o.order_)};
    std::vector<Real> r(c_.size() + o.c_.size() - 1, Real(0));
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0) continue;
        for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    }
    return {lo_ + o.lo_, std::move(r), std::min(order_, o.order_)};
}

LaurentSeries LaurentSeries::operator+(const LaurentSeries& o) const {
    if (c_.empty()) return o;
    if (o.c_.empty()) return *this;
    const int lo = std::min(lo_, o.lo_), hi = std::max(this->hi(), o.hi());
    std::vector<Real> r(static_cast<std::size_t>(hi - lo + 1), Real(0));
    for (int e = lo; e <= hi; ++e) r[static_cast<std::size_t>(e - lo)] = coefficient(e) + o.coefficient(e);
    return {lo, std::move(r), std::min(order_, o.order_)};
}

namespace {

WeightedMeasure point_weights(const ShiftConfig& cfg, const FlowPoint& pt) {
    ShiftConfig c = cfg;
    c.base = deform(cfg.base, pt.times);
    WeightedMeasure wm = shifted_weights(c, pt.s, pt.sbar);
    wm.validate();
    return wm;
}

// prod (z - lambda(n)) over the steps from 0 to s as numerator and denominator.
std::pair<Poly, Poly> step_polys(const LambdaSequence& seq, bool binary, int s) {
    Poly num{Real(1)}, den{Real(1)};
    auto factor = [&](const SpectralPoint& p) -> Poly {
        if (binary) return {p.re * p.re + p.im * p.im, -2 * p.re, Real(1)};
        return {-p.re, Real(1)};
    };
    for (int n = 1; n <= s; ++n) num = poly_mul(num, factor(seq.at(n)));
    for (int n = s + 1; n <= 0; ++n) den = poly_mul(den, factor(seq.at(n)));
    return {num, den};
}

std::vector<Real> time_gap(const std::vector<Real>& t, const std::vector<Real>& tp) {
    std::vector<Real> d(std::max(t.size(), tp.size()), Real(0));
    for (std::size_t j = 0; j < t.size(); ++j) d[j] += t[j];
    for (std::size_t j = 0; j < tp.size(); ++j) d[j] -= tp[j];
    return d;
}

struct PointData {
    WeightedMeasure wm;
    Factorization f;
    GramSource src;
};

PointData point_data(const ShiftConfig& cfg, const FlowPoint& pt, int size) {
    WeightedMeasure wm = point_weights(cfg, pt);
    Factorization f = gauss_borel(MomentMatrix(wm, cfg.n1, cfg.n2, size));
    GramSource src(wm, cfg.n1, cfg.n2);
    return {std::move(wm), std::move(f), std::move(src)};
}

// int form(x) x^m w(x) dmu for m < count
std::vector<Real> form_moments(const WeightedMeasure& wm, const std::vector<Real>& form, const Weight& w, int count) {
    const auto& x = wm.measure().nodes();
    const auto& mass = wm.measure().masses();
    std::vector<Real> base(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) base[i] = mass[i] * form[i] * w(x[i]);
    std::vector<Real> out;
    for (int m = 0; m < count; ++m) {
        Real s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += base[i];
            base[i] *= x[i];
        }
        out.push_back(s);
    }
    return out;
}

std::vector<Real> head(const std::vector<Real>& v, int n) {
    return {v.begin(), v.begin() + std::min(n, static_cast<int>(v.size()))};
}

}  // namespace

BilinearReport bilinear(const ShiftConfig& cfg, const FlowPoint& left, const FlowPoint& right, int k, int l, int order,
                        const Real& stab) {
    if (k < 0 || l < 0 || order < 1) throw ConfigError("bad bilinear indices");
    const Composition& n1 = cfg.n1;
    const Composition& n2 = cfg.n2;
    const int size = std::max(k, l) + 2;
    const PointData L = point_data(cfg, left, size);
    const PointData R = point_data(cfg, right, size);
    const int big = order + 8;
    const int count = 2 * big + k + l + 8;

    std::vector<Real> qL, qbarR;
    for (const auto& x : L.wm.measure().nodes()) qL.push_back(linear_form(L.f, L.wm, k, x));
    for (const auto& x : R.wm.measure().nodes()) qbarR.push_back(dual_linear_form(R.f, R.wm, l, x));

    BilinearReport rep;
    {
        const auto& mass = L.wm.measure().masses();
        for (std::size_t i = 0; i < mass.size(); ++i) rep.quadrature += mass[i] * qL[i] * qbarR[i];
    }

    std::vector<std::vector<Real>> cbar, c;
    std::vector<LaurentSeries> Ea, Eb;
    auto E = [&](int M, bool bar, int ch) {
        const auto sc = static_cast<std::size_t>(ch);
        if (!bar) {
            auto [nl, dl] = step_polys(cfg.lambda.at(sc), cfg.binary, left.s.at(sc));
            auto [nr, dr] = step_polys(cfg.lambda.at(sc), cfg.binary, right.s.at(sc));
            return LaurentSeries::exponential(time_gap(left.times.t.at(sc), right.times.t.at(sc)), M) *
                   LaurentSeries::rational(poly_mul(nl, dr), poly_mul(dl, nr), M);
        }
        auto [nl, dl] = step_polys(cfg.lambda_bar.at(sc), cfg.binary, left.sbar.at(sc));
        auto [nr, dr] = step_polys(cfg.lambda_bar.at(sc), cfg.binary, right.sbar.at(sc));
        return LaurentSeries::exponential(time_gap(left.times.tbar.at(sc), right.times.tbar.at(sc)), M) *
               LaurentSeries::rational(poly_mul(nr, dl), poly_mul(dr, nl), M);
    };
    for (int a = 0; a < n1.p(); ++a) cbar.push_back(form_moments(R.wm, qbarR, R.wm.w1()[static_cast<std::size_t>(a)], count));
    for (int b = 0; b < n2.p(); ++b) c.push_back(form_moments(L.wm, qL, L.wm.w2()[static_cast<std::size_t>(b)], count));

    auto sides = [&](int M) {
        const int n = 2 * M + k + l + 8;
        Real lhs = 0, rhs = 0;
        for (int a = 0; a < n1.p(); ++a)
            lhs += (LaurentSeries::polynomial(mop(L.f, k, a).coeffs, M) * E(M, false, a) *
                    LaurentSeries::cauchy(head(cbar[static_cast<std::size_t>(a)], n), M))
                       .residue();
        for (int b = 0; b < n2.p(); ++b)
            rhs += (LaurentSeries::cauchy(head(c[static_cast<std::size_t>(b)], n), M) *
                    LaurentSeries::polynomial(dual_mop(R.f, l, b).coeffs, M) * E(M, true, b))
                       .residue();
        return std::pair{lhs, rhs};
    };
    const auto [lhs, rhs] = sides(order);
    const auto [lhs2, rhs2] = sides(big);
    if (abs(lhs - lhs2) > stab * std::max(Real(1), Real(abs(lhs))) ||
        abs(rhs - rhs2) > stab * std::max(Real(1), Real(abs(rhs))))
        throw SeriesUnderresolved("residues change between truncation orders");
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.residual = abs(lhs - rhs);
    rep.quadrature_gap = std::max(abs(lhs - rep.quadrature), abs(rhs - rep.quadrature));

    // tau forms
    const Real norm = checked_evaluate(spec_level(k), L.src) * checked_evaluate(spec_level(l + 1), R.src);
    const int terms = 2 * order + k + l + 8;
    Real tl = 0, tr = 0;
    for (int a = 0; a < n1.p(); ++a) {
        const auto m = spec_minus(n1, k, a);
        if (!m) continue;
        const auto P = LaurentSeries::inverse_powers(miwa_minus_poly(L.src, *m, false, a), degree_count(k, a, n1) - 1, order);
        const auto S = LaurentSeries::inverse_powers(miwa_plus_series(R.src, spec_plus(n1, l, a), false, a, terms),
                                                     -degree_count(l - 1, a, n1) - 1, order);
        tl += (P * S * E(order, false, a)).residue();
    }
    for (int b = 0; b < n2.p(); ++b) {
        const auto m = spec_bar_minus(n2, l, b);
        if (!m) continue;
        const auto S = LaurentSeries::inverse_powers(miwa_plus_series(L.src, spec_bar_plus(n2, k, b), true, b, terms),
                                                     -degree_count(k - 1, b, n2) - 1, order);
        const auto P = LaurentSeries::inverse_powers(miwa_minus_poly(R.src, *m, true, b), degree_count(l, b, n2) - 1, order);
        tr += (S * P * E(order, true, b)).residue();
    }
    rep.tau_lhs = tl / norm;
    rep.tau_rhs = tr / norm;
    rep.tau_gap = std::max({abs(rep.tau_lhs - lhs), abs(rep.tau_rhs - rhs), abs(rep.tau_lhs - rep.tau_rhs)});
    return rep;
}

Real cd_series_identity(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int terms,
                        CdIdentity which, int i, int j, const Real& z, const Real& zp, const Real& tail_tol) {
    if (terms < 1) throw ConfigError("need at least one term");
    if (abs(zp) >= abs(z)) throw ConfigError("the identities need |z'| < |z|");
    if (abs(zp) <= Real("1.5") * wm.measure().radius()) throw TooCloseToSupport("series need |z'| > 1.5 R");
    const int window = n1.total() + n2.total();
    const Factorization f = gauss_borel(MomentMatrix(wm, n1, n2, terms + window + 2));
    Real s = 0, tail = 0;
    for (int l = 0; l < terms; ++l) {
        Real t;
        switch (which) {
            case CdIdentity::primal: t = second_kind(f, wm, l, Kind2::Cbar, i, z) * mop(f, l, j)(zp); break;
            case CdIdentity::dual: t = second_kind(f, wm, l, Kind2::C, i, z) * dual_mop(f, l, j)(zp); break;
            case CdIdentity::mixed:
                t = second_kind(f, wm, l, Kind2::Cbar, i, z) * second_kind(f, wm, l, Kind2::C, j, zp);
                break;
        }
        s += t;
        if (l >= terms - window) tail = std::max(tail, Real(abs(t)));
    }
    if (tail > tail_tol) throw NotConverged("partial sums still move at the last terms");
    if (which == CdIdentity::mixed)
        return abs(s + (markov_stieltjes_function(wm, i, j, z) - markov_stieltjes_function(wm, i, j, zp)) / (z - zp));
    return abs(s - (i == j ? Real(1) : Real(0)) / (z - zp));
}

CdSeriesReport cd_series_identities(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int terms,
                                    int a, int ap, int b, int bp, const Real& z, const Real& zp, const Real& tail_tol) {
    CdSeriesReport r;
    r.terms = terms;
    r.primal = cd_series_identity(wm, n1, n2, terms, CdIdentity::primal, a, ap, z, zp, tail_tol);
    r.dual = cd_series_identity(wm, n1, n2, terms, CdIdentity::dual, b, bp, z, zp, tail_tol);
    r.mixed = cd_series_identity(wm, n1, n2, terms, CdIdentity::mixed, a, b, z, zp, tail_tol);
    return r;
}

Poly poly_determinant(const std::vector<std::vector<Poly>>& m) {
    const std::size_t n = m.size();
    if (n == 0) return {Real(1)};
    if (n == 1) return m[0][0];
    Poly out;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::vector<Poly>> sub;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Poly> row;
            for (std::size_t j = 0; j < n; ++j)
                if (j != c) row.push_back(m[r][j]);
            sub.push_back(std::move(row));
        }
        out = poly_add(out, poly_scale(poly_mul(m[0][c], poly_determinant(sub)), Real(parity(static_cast<int>(c)))));
    }
    return out;
}

Poly covector_expansion(const std::vector<Vec>& r) {
    const int n = static_cast<int>(r.size()) - 1;
    if (n < 1) throw ConfigError("need at least two covectors");
    Poly out(static_cast<std::size_t>(n + 1), Real(0));
    for (int j = 1; j <= n + 1; ++j) {
        Mat m(n, n);
        for (int i = 1, row = 0; i <= n + 1; ++i) {
            if (i == j) continue;
            if (r[static_cast<std::size_t>(i - 1)].size() != n) throw ConfigError("covector length must be n");
            m.row(row++) = r[static_cast<std::size_t>(i - 1)].transpose();
        }
        out[static_cast<std::size_t>(j - 1)] = parity(n + 1 - j) * determinant(m);
    }
    return out;
}

}  // namespace mixedmop
