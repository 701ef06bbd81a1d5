#pragma once

#include <optional>
#include <vector>

#include "mixedmop/discrete.hpp"

namespace mixedmop {

// Moments int x^{k1(i)+k2(j)} w1_{a(i)} w2_{b(j)} dmu for arbitrary flat indices i, j.
// Powers are tabulated lazily, so an instance must not be shared between threads.
class GramSource {
public:
    GramSource(const WeightedMeasure& wm, Composition n1, Composition n2);

    const WeightedMeasure& weights() const { return wm_; }
    const Composition& n1() const { return n1_; }
    const Composition& n2() const { return n2_; }

    Real moment(int a, int k1, int b, int k2) const;
    Real entry(int i, int j) const;
    Mat block(const std::vector<int>& rows, const std::vector<int>& cols) const;

private:
    const Real& power(std::size_t node, int k) const;

    WeightedMeasure wm_;
    Composition n1_, n2_;
    std::vector<std::vector<Real>> w1_, w2_;  // [channel][node]
    mutable std::vector<std::vector<Real>> pow_;  // [node][k]
};

// sign * det of the moment block on rows x cols.
struct MinorSpec {
    std::vector<int> rows, cols;
    int sign = 1;
};

Real evaluate(const MinorSpec& m, const GramSource& src);

// Determinantal shapes; nullopt where the minus integer does not exist.
MinorSpec spec_level(int l);                                                                 // tau^{(l)}
std::optional<MinorSpec> spec_minus(const Composition& n1, int l, int a);                   // tau^{(l)}_{-a}
std::optional<MinorSpec> spec_plus_minus(const Composition& n1, int l, int ap, int a);      // tau^{(l)}_{+a',-a}
std::optional<MinorSpec> spec_minus_minus(const Composition& n1, const Composition& n2, int l, int b, int a);
std::optional<MinorSpec> spec_bar_minus(const Composition& n2, int l, int b);               // taubar^{(l)}_{-b}
std::optional<MinorSpec> spec_bar_plus_minus(const Composition& n2, int l, int bp, int b);  // taubar^{(l)}_{+b',-b}
MinorSpec spec_plus(const Composition& n1, int l, int a);                                   // tau^{(l+1)}_{+a}
MinorSpec spec_bar_plus(const Composition& n2, int l, int b);                               // taubar^{(l+1)}_{+b}

struct TauTable {
    Composition n1, n2;
    int lmax = 0;
    std::vector<Real> tau;  // l = 0 .. lmax + 1
    // [l][a] and [l][b]
    std::vector<std::vector<std::optional<Real>>> minus, bar_minus;
    std::vector<std::vector<Real>> plus, bar_plus;
    // [l][a'][a], [l][b'][b], [l][b][a]
    std::vector<std::vector<std::vector<std::optional<Real>>>> plus_minus, bar_plus_minus, minus_minus;
};

TauTable tau_table(const GramSource& src, int lmax);
// max_l |Sbar_ll tau^{(l)} - tau^{(l+1)}| / |tau^{(l+1)}|
Real tau_ratio_residual(const TauTable& t, const Factorization& f);

// SingularTau when |det| is below rel times the Hadamard bound of the block.
Real checked_evaluate(const MinorSpec& m, const GramSource& src, const Real& rel = Real("1e-60"));

// Degree-indexed tau: rows are the channel-major monomials of nu1 without the last one, columns those of nu2.
Real tau_degrees(const GramSource& src, const std::vector<int>& nu1, const std::vector<int>& nu2);
// Signs relating level and degree tau functions on the ladder n1 = nu1, n2 = nu2 + e_{p2}; 0-based channels.
int epsilon11(const std::vector<int>& nu1, int a, int ap);
int epsilon22(const std::vector<int>& nu2, int b, int bp);
int epsilon21(const std::vector<int>& nu1, const std::vector<int>& nu2, int b, int a);

enum class TauRep { mop, plus, minus, dual_mop, dual_plus, dual_minus, cauchy_bar, cauchy };

// Miwa-shifted ratio at z. `channel` is a (primal kinds, cauchy_bar) or b (dual kinds, cauchy);
// `other` is a' for plus, b for minus, b' for dual_plus, a for dual_minus and ignored otherwise.
Real tau_representation(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int l, TauRep kind,
                        int channel, int other, const Real& z);
// Same quantity from the factorization.
Real direct_representation(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int l, TauRep kind,
                           int channel, int other, const Real& z);

// Relative gaps over all channels for the polynomial kinds and for the Cauchy transforms.
Real tau_mop_residual(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int l, const Real& z);
Real tau_cauchy_residual(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int l, const Real& z);

// Coefficients in w = 1/z of a minor whose `channel` rows (columns when bar) carry the factor (1 - x w).
// The MinorSpec must omit the top row of that channel, as the minus shapes do.
Poly miwa_minus_poly(const GramSource& src, const MinorSpec& m, bool bar, int channel);
// Same with (1 - x w)^{-1}, truncated after `terms` coefficients; the top row of the channel is the last one kept.
std::vector<Real> miwa_plus_series(const GramSource& src, const MinorSpec& m, bool bar, int channel, int terms);

// Finitely many negative and positive powers of z. Powers above order() are treated as truncated.
class LaurentSeries {
public:
    LaurentSeries() = default;
    LaurentSeries(int lo, std::vector<Real> coeffs, int order);

    static LaurentSeries polynomial(const Poly& p, int order);
    // sum_m c[m] z^{-m-1}
    static LaurentSeries cauchy(const std::vector<Real>& c, int order);
    // sum_m c[m] z^{-m}, shifted by z^shift
    static LaurentSeries inverse_powers(const std::vector<Real>& c, int shift, int order);
    // exp(sum_j d[j-1] z^j)
    static LaurentSeries exponential(const std::vector<Real>& d, int order);
    // p(z) / q(z) expanded around z = 0
    static LaurentSeries rational(const Poly& p, const Poly& q, int order);

    int lo() const { return lo_; }
    int hi() const { return lo_ + static_cast<int>(c_.size()) - 1; }
    int order() const { return order_; }
    Real coefficient(int e) const;
    Real residue() const { return coefficient(-1); }

    LaurentSeries operator*(const LaurentSeries& o) const;
    LaurentSeries operator+(const LaurentSeries& o) const;

private:
    void trim();

    int lo_ = 0;
    std::vector<Real> c_;
    int order_ = 0;
};

// A point of the joint continuous and discrete flows.
struct FlowPoint {
    FlowTimes times;
    std::vector<int> s, sbar;
};

struct BilinearReport {
    Real lhs = 0, rhs = 0;
    Real quadrature = 0;
    // Tau forms divided by tau^{(k)}(left) tau^{(l+1)}(right)
    Real tau_lhs = 0, tau_rhs = 0;
    Real residual = 0;        // |lhs - rhs|
    Real quadrature_gap = 0;  // max distance of either side to the quadrature value
    Real tau_gap = 0;         // max distance of the tau forms to lhs
};

// Residue form of the bilinear identity between Q^{(k)} at `left` and Qbar^{(l)} at `right`.
// SeriesUnderresolved when the residues at order and order + 8 differ by more than stab * max(1, |value|).
BilinearReport bilinear(const ShiftConfig& cfg, const FlowPoint& left, const FlowPoint& right, int k, int l,
                        int order = 48, const Real& stab = Real("1e-8"));

struct CdSeriesReport {
    Real primal = 0;  // sum Cbar_a(z) A_a'(z') - delta / (z - z')
    Real dual = 0;    // sum C_b(z) Abar_b'(z') - delta / (z - z')
    Real mixed = 0;   // sum Cbar_a(z) C_b(z') + (muhat_ab(z) - muhat_ab(z')) / (z - z')
    int terms = 0;
};

enum class CdIdentity { primal, dual, mixed };

// One identity over l < terms; i, j are (a, a'), (b, b') or (a, b). NotConverged if any of the last |n1| + |n2|
// terms exceeds tail_tol.
Real cd_series_identity(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int terms,
                        CdIdentity which, int i, int j, const Real& z, const Real& zp,
                        const Real& tail_tol = Real("1e-6"));
// All three at once.
CdSeriesReport cd_series_identities(const WeightedMeasure& wm, const Composition& n1, const Composition& n2, int terms,
                                    int a, int ap, int b, int bp, const Real& z, const Real& zp,
                                    const Real& tail_tol = Real("1e-6"));

// Symbolic determinant of a small matrix with polynomial entries.
Poly poly_determinant(const std::vector<std::vector<Poly>>& m);
// sum_j (-1)^{n+1-j} z^{j-1} det(r_1, .., r_j omitted, .., r_{n+1}) for n + 1 covectors of length n.
Poly covector_expansion(const std::vector<Vec>& r);

}  // namespace mixedmop
