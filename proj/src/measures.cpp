#include "mixedmop/measures.hpp"

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <map>
#include <mutex>

#include "mixedmop/errors.hpp"

namespace mixedmop {

Measure Measure::atomic(std::vector<Real> nodes, std::vector<Real> masses) {
    if (nodes.empty() || nodes.size() != masses.size())
        throw ConfigError("atomic measure needs matching, non-empty node and mass lists");
    const bool positive = masses.front() > 0;
    for (const Real& m : masses)
        if (m == 0 || (m > 0) != positive) throw ConfigError("atomic masses must share one nonzero sign");
    Measure mu;
    mu.kind_ = Kind::atomic;
    mu.lo_ = *std::min_element(nodes.begin(), nodes.end());
    mu.hi_ = *std::max_element(nodes.begin(), nodes.end());
    mu.nodes_ = std::move(nodes);
    mu.masses_ = std::move(masses);
    return mu;
}

Measure Measure::lebesgue(const Real& lo, const Real& hi, int order) {
    return quadrature(lo, hi, order, [](const Real&) { return Real(1); });
}

Measure Measure::quadrature(const Real& lo, const Real& hi, int order, const RealFn& density) {
    if (order < 1) throw ConfigError("quadrature order must be >= 1");
    if (!(hi > lo)) throw ConfigError("quadrature interval must have hi > lo");
    const auto& [x, w] = gauss_legendre(order);
    Measure mu;
    mu.kind_ = Kind::quadrature;
    mu.lo_ = lo;
    mu.hi_ = hi;
    const Real half = (hi - lo) / 2, mid = (hi + lo) / 2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Real t = mid + half * x[i];
        mu.nodes_.push_back(t);
        mu.masses_.push_back(half * w[i] * density(t));
    }
    return mu;
}

Real Measure::radius() const { return std::max(abs(lo_), abs(hi_)); }

const std::pair<std::vector<Real>, std::vector<Real>>& gauss_legendre(int order) {
    static std::mutex mtx;
    static std::map<int, std::pair<std::vector<Real>, std::vector<Real>>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    // boost returns the non-negative zeros in increasing order
    const std::vector<Real> half = boost::math::legendre_p_zeros<Real>(order);
    std::vector<Real> x;
    for (auto r = half.rbegin(); r != half.rend(); ++r)
        if (*r != 0) x.push_back(-*r);
    for (const Real& r : half) x.push_back(r);
    std::vector<Real> w;
    for (const Real& t : x) {
        const Real d = boost::math::legendre_p_prime<Real>(order, t);
        w.push_back(2 / ((1 - t * t) * d * d));
    }
    return cache.emplace(order, std::make_pair(std::move(x), std::move(w))).first->second;
}

Real WeightFactor::operator()(const Real& x) const {
    Real v;
    switch (kind) {
        case Kind::linear: v = x - re; break;
        case Kind::quadratic: v = (x - re) * (x - re) + im * im; break;
        case Kind::miwa: v = 1 - x / re; break;
    }
    return power >= 0 ? pow(v, power) : 1 / pow(v, -power);
}

std::optional<Real> WeightFactor::pole() const {
    if (power >= 0) return std::nullopt;
    if (kind == Kind::quadratic && im != 0) return std::nullopt;
    return re;
}

std::optional<Real> WeightFactor::real_zero() const {
    if (power <= 0) return std::nullopt;
    if (kind == Kind::quadratic && im != 0) return std::nullopt;
    return re;
}

Weight::Weight() : Weight([](const Real&) { return Real(1); }, "1") {}

Weight::Weight(RealFn base, std::string label) : base_(std::move(base)), label_(std::move(label)) {}

Weight Weight::constant(const Real& c) {
    return Weight([c](const Real&) { return c; }, "const");
}

Weight Weight::polynomial(std::vector<Real> coefficients) {
    return Weight(
        [cs = std::move(coefficients)](const Real& x) {
            Real v = 0;
            for (auto it = cs.rbegin(); it != cs.rend(); ++it) v = v * x + *it;
            return v;
        },
        "poly");
}

Weight Weight::exponential(const Real& rate) {
    Weight w;
    w.label_ = "exp";
    w.exponent_ = {rate};
    return w;
}

Weight Weight::with_times(const std::vector<Real>& t, int sign) const {
    Weight w = *this;
    if (w.exponent_.size() < t.size()) w.exponent_.resize(t.size(), Real(0));
    for (std::size_t j = 0; j < t.size(); ++j) w.exponent_[j] += sign * t[j];
    return w;
}

Weight Weight::with_factor(const WeightFactor& f) const {
    Weight w = *this;
    w.factors_.push_back(f);
    return w;
}

Real Weight::operator()(const Real& x) const {
    Real v = base_(x);
    if (!exponent_.empty()) {
        Real e = 0;
        for (auto it = exponent_.rbegin(); it != exponent_.rend(); ++it) e = (e + *it) * x;
        v *= exp(e);
    }
    for (const auto& f : factors_) v *= f(x);
    return v;
}

void Weight::check_poles(const Real& lo, const Real& hi) const {
    const Real margin = (hi - lo) * Real("1e-3");
    for (const auto& f : factors_) {
        if (auto p = f.pole(); p && *p >= lo - margin && *p <= hi + margin)
            throw PoleOnSupport("pole at " + format_real(*p, 10) + " within support margin");
    }
}

WeightedMeasure::WeightedMeasure(Measure mu, std::vector<Weight> w1, std::vector<Weight> w2)
    : mu_(std::move(mu)), w1_(std::move(w1)), w2_(std::move(w2)) {
    if (w1_.empty() || w2_.empty()) throw ConfigError("both weight systems need at least one weight");
}

WeightedMeasure WeightedMeasure::with_w1(int a, Weight w) const {
    WeightedMeasure r = *this;
    r.w1_.at(static_cast<std::size_t>(a)) = std::move(w);
    return r;
}

WeightedMeasure WeightedMeasure::with_w2(int b, Weight w) const {
    WeightedMeasure r = *this;
    r.w2_.at(static_cast<std::size_t>(b)) = std::move(w);
    return r;
}

void WeightedMeasure::validate() const {
    auto check = [&](const Weight& w, const std::string& name) {
        w.check_poles(mu_.lo(), mu_.hi());
        int sign = 0;
        for (const Real& x : mu_.nodes()) {
            const Real v = w(x);
            if (!isfinite(v)) throw NonFinite(name + " is not finite at a node");
            const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
            if (s == 0 || (sign != 0 && s != sign))
                throw SignFlip(name + " changes sign or vanishes on the support");
            sign = s;
        }
    };
    for (int a = 0; a < p1(); ++a) check(w1_[static_cast<std::size_t>(a)], "w1[" + std::to_string(a) + "]");
    for (int b = 0; b < p2(); ++b) check(w2_[static_cast<std::size_t>(b)], "w2[" + std::to_string(b) + "]");
}

Real integrate(const RealFn& f, const Measure& mu) {
    Real s = 0;
    for (int i = 0; i < mu.size(); ++i) {
        const Real v = f(mu.nodes()[static_cast<std::size_t>(i)]);
        if (!isfinite(v)) throw NonFinite("integrand not finite at a node");
        s += v * mu.masses()[static_cast<std::size_t>(i)];
    }
    return s;
}

Real integrate(const RealFn& f, const WeightedMeasure& wm) { return integrate(f, wm.measure()); }

std::vector<Real> elementary_schur(const std::vector<Real>& t, int J) {
    std::vector<Real> S(static_cast<std::size_t>(J + 1), Real(0));
    S[0] = 1;
    for (int n = 1; n <= J; ++n) {
        Real acc = 0;
        for (int k = 1; k <= n && k <= static_cast<int>(t.size()); ++k)
            acc += k * t[static_cast<std::size_t>(k - 1)] * S[static_cast<std::size_t>(n - k)];
        S[static_cast<std::size_t>(n)] = acc / n;
    }
    return S;
}

std::vector<Real> miwa_times(const Real& z, int count) {
    std::vector<Real> t;
    Real zp = 1;
    for (int j = 1; j <= count; ++j) {
        zp /= z;
        t.push_back(zp / j);
    }
    return t;
}

std::string to_string(HausdorffVerdict v) {
    switch (v) {
        case HausdorffVerdict::solvable_positive: return "solvable-positive";
        case HausdorffVerdict::solvable_negative: return "solvable-negative";
        case HausdorffVerdict::fails: return "fails";
        case HausdorffVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

HausdorffReport hausdorff_check(const std::vector<Real>& c, int Ncap, int Kcap, bool restricted,
                                const HausdorffOptions& opt) {
    HausdorffReport rep;
    if (static_cast<int>(c.size()) < Ncap + Kcap + 1) return rep;

    bool can_pos = true, can_neg = true;
    Real worst_pos = 0, worst_neg = 0;
    for (int n = 0; n <= Ncap; ++n) {
        for (int k = 0; k <= Kcap; ++k) {
            Real d = 0, scale = 0;
            for (int i = 0; i <= n; ++i) {
                const Real b = boost::math::binomial_coefficient<double>(static_cast<unsigned>(n),
                                                                        static_cast<unsigned>(i));
                const Real term = b * c[static_cast<std::size_t>(i + k)];
                d += (i % 2 == 0) ? term : -term;
                scale += abs(term);
            }
            const Real noise = scale * opt.input_eps;
            if (d < -noise) {
                can_pos = false;
                worst_pos = std::max(worst_pos, -d);
            }
            if (d > noise) {
                can_neg = false;
                worst_neg = std::max(worst_neg, d);
            }
        }
    }
    if (can_pos) rep.verdict = HausdorffVerdict::solvable_positive;
    else if (can_neg) rep.verdict = HausdorffVerdict::solvable_negative;
    else {
        rep.verdict = HausdorffVerdict::fails;
        rep.worst_violation = std::min(worst_pos, worst_neg);
    }

    if (restricted) {
        const int m = static_cast<int>(c.size());
        bool ok = m > opt.window;
        if (ok) {
            Real tail = 0;
            for (int i = m - opt.window; i < m; ++i) {
                if (!isfinite(c[static_cast<std::size_t>(i)])) ok = false;
                tail += c[static_cast<std::size_t>(i)];
            }
            ok = ok && abs(tail) < opt.cauchy_tol;
        }
        rep.restricted_pass = ok;
    }
    return rep;
}

std::vector<Real> unit_interval_moments(const Measure& mu, int count) {
    const bool inside = mu.lo() >= 0 && mu.hi() <= 1;
    const Real span = mu.hi() > mu.lo() ? mu.hi() - mu.lo() : Real(1);
    std::vector<Real> m(static_cast<std::size_t>(count), Real(0));
    for (int i = 0; i < mu.size(); ++i) {
        const Real x = mu.nodes()[static_cast<std::size_t>(i)];
        const Real y = inside ? x : (x - mu.lo()) / span;
        Real yp = mu.masses()[static_cast<std::size_t>(i)];
        for (int n = 0; n < count; ++n) {
            m[static_cast<std::size_t>(n)] += yp;
            yp *= y;
        }
    }
    return m;
}

namespace {

// Shortest leading block x_0..x_{m-1} with max |H x - b| < tol, zero padded.
std::optional<std::vector<Real>> solve_hankel_minimal(const std::vector<Real>& h, const std::vector<Real>& b,
                                                      const Real& tol, Real& residual) {
    const int I = static_cast<int>(std::min(h.size(), b.size()));
    const int rows = I / 2;
    const int max_cols = I - rows;
    residual = std::numeric_limits<Real>::infinity();
    for (int m = 1; m <= max_cols; ++m) {
        Mat A(rows, m);
        Vec rhs(rows);
        for (int l = 0; l < rows; ++l) {
            rhs(l) = b[static_cast<std::size_t>(l)];
            for (int i = 0; i < m; ++i) A(l, i) = h[static_cast<std::size_t>(l + i)];
        }
        const Vec x = A.colPivHouseholderQr().solve(rhs);
        const Real r = max_abs(Vec(A * x - rhs));
        residual = std::min(residual, r);
        if (r < tol) {
            std::vector<Real> out(static_cast<std::size_t>(max_cols), Real(0));
            for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = x(i);
            residual = r;
            return out;
        }
    }
    return std::nullopt;
}

}  // namespace

NikishinReport nikishin_inverse(const CoefficientTable& table, const Real& tol, const HausdorffOptions& opt) {
    NikishinReport rep;
    const int p = static_cast<int>(table.size());
    if (p == 0) throw ConfigError("empty coefficient table");
    const std::size_t len = table.front().size();
    for (const auto& row : table)
        if (row.size() != len) throw ConfigError("coefficient table must be rectangular");

    auto admissible = [&](const std::vector<Real>& seq, const std::string& name) {
        const int Ncap = std::min(12, static_cast<int>(seq.size()) / 2);
        const int Kcap = static_cast<int>(seq.size()) - 1 - Ncap;
        const HausdorffReport h = hausdorff_check(seq, Ncap, std::max(0, Kcap), true, opt);
        const bool signed_ok = h.verdict == HausdorffVerdict::solvable_positive ||
                               h.verdict == HausdorffVerdict::solvable_negative;
        if (!signed_ok) rep.failure = name + " fails the Hausdorff test (" + to_string(h.verdict) + ")";
        else if (!h.restricted_pass.value_or(false)) rep.failure = name + " fails the restricted finiteness test";
        return signed_ok && h.restricted_pass.value_or(false);
    };

    rep.theta.push_back(table);
    for (int j = 0; j < p; ++j)
        if (!admissible(table[static_cast<std::size_t>(j)], "C[" + std::to_string(j + 1) + ",1]")) return rep;

    for (int k = 0; k + 1 < p; ++k) {
        const auto& prev = rep.theta.back();
        const std::vector<Real>& h = prev[static_cast<std::size_t>(k)];
        std::vector<std::vector<Real>> next(static_cast<std::size_t>(p));
        for (int j = k + 1; j < p; ++j) {
            Real r;
            auto sol = solve_hankel_minimal(h, prev[static_cast<std::size_t>(j)], tol, r);
            rep.max_residual = std::max(rep.max_residual, r);
            if (!sol)
                throw IncompatibleSystem("Hankel system k=" + std::to_string(k + 1) + ", j=" + std::to_string(j + 1) +
                                         " has residual " + format_real(r, 6));
            next[static_cast<std::size_t>(j)] = std::move(*sol);
            if (!admissible(next[static_cast<std::size_t>(j)],
                            "C[" + std::to_string(j + 1) + "," + std::to_string(k + 2) + "]"))
                return rep;
        }
        rep.theta.push_back(std::move(next));
    }
    rep.success = true;
    return rep;
}

namespace {

struct Atoms {
    std::vector<Real> t, m;
};

Real tilde(const Atoms& s, const Real& x) {
    Real v = 0;
    for (std::size_t i = 0; i < s.t.size(); ++i) v += s.m[i] / (1 - s.t[i] * x);
    return v;
}

// s_{k, j} = [sigma_k, ..., sigma_j] as weighted atoms.
Atoms nested(const std::vector<Measure>& g, std::size_t k, std::size_t j) {
    Atoms a{g[k].nodes(), g[k].masses()};
    if (k == j) return a;
    const Atoms inner = nested(g, k + 1, j);
    for (std::size_t i = 0; i < a.t.size(); ++i) a.m[i] *= tilde(inner, a.t[i]);
    return a;
}

}  // namespace

std::vector<Weight> mnikishin_weights(const std::vector<Measure>& generators) {
    if (generators.empty()) throw ConfigError("at least one Nikishin generator required");
    HausdorffOptions opt;
    for (std::size_t k = 0; k < generators.size(); ++k) {
        const Measure& g = generators[k];
        if (g.lo() < 0 || g.hi() > 1)
            throw ConfigError("Nikishin generator " + std::to_string(k + 1) + " must live on [0,1]");
        // |sum of moments| < inf is the x -> 1 bound on the Cauchy-type transform.
        Real tail = 0;
        Real yp = 0;
        for (int i = 0; i < g.size(); ++i) {
            const Real t = g.nodes()[static_cast<std::size_t>(i)];
            if (t == 1) throw ConstraintViolated("generator " + std::to_string(k + 1) + " has mass at 1");
        }
        const int count = 4096;
        std::vector<Real> mom(static_cast<std::size_t>(count), Real(0));
        for (int i = 0; i < g.size(); ++i) {
            yp = g.masses()[static_cast<std::size_t>(i)];
            for (int n = 0; n < count; ++n) {
                mom[static_cast<std::size_t>(n)] += yp;
                yp *= g.nodes()[static_cast<std::size_t>(i)];
            }
        }
        for (int n = count - opt.window; n < count; ++n) tail += mom[static_cast<std::size_t>(n)];
        if (abs(tail) >= opt.cauchy_tol)
            throw ConstraintViolated("generator " + std::to_string(k + 1) + " diverges as x -> 1");
    }
    std::vector<Weight> out;
    for (std::size_t j = 0; j < generators.size(); ++j) {
        Atoms s = nested(generators, 0, j);
        out.emplace_back([s = std::move(s)](const Real& x) { return tilde(s, x); },
                         "nikishin" + std::to_string(j + 1));
    }
    return out;
}

CoefficientTable mnikishin_coefficients(const std::vector<Measure>& generators, int count) {
    if (generators.empty()) throw ConfigError("at least one Nikishin generator required");
    CoefficientTable out;
    for (std::size_t j = 0; j < generators.size(); ++j) {
        const Atoms s = nested(generators, 0, j);
        std::vector<Real> row(static_cast<std::size_t>(count), Real(0));
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            Real v = s.m[i];
            for (auto& c : row) {
                c += v;
                v *= s.t[i];
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace mixedmop
