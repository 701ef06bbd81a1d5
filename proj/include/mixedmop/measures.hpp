#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mixedmop/real.hpp"

namespace mixedmop {

using RealFn = std::function<Real(const Real&)>;

// Finite measure stored as nodes and masses. Quadrature measures carry the
// Gauss-Legendre rule of the interval with the density folded into the masses.
class Measure {
public:
    enum class Kind { atomic, quadrature };

    static Measure atomic(std::vector<Real> nodes, std::vector<Real> masses);
    static Measure lebesgue(const Real& lo, const Real& hi, int order = 200);
    static Measure quadrature(const Real& lo, const Real& hi, int order, const RealFn& density);

    Kind kind() const { return kind_; }
    const std::vector<Real>& nodes() const { return nodes_; }
    const std::vector<Real>& masses() const { return masses_; }
    const Real& lo() const { return lo_; }
    const Real& hi() const { return hi_; }
    Real radius() const;
    Real width() const { return hi_ - lo_; }
    int size() const { return static_cast<int>(nodes_.size()); }

private:
    Kind kind_ = Kind::atomic;
    std::vector<Real> nodes_;
    std::vector<Real> masses_;
    Real lo_ = 0;
    Real hi_ = 0;
};

// Gauss-Legendre rule on [-1, 1], cached per order.
const std::pair<std::vector<Real>, std::vector<Real>>& gauss_legendre(int order);

// Multiplicative factor attached to a weight.
struct WeightFactor {
    enum class Kind {
        linear,     // (x - re)^power
        quadratic,  // ((x - re)^2 + im^2)^power, i.e. |x - lambda|^(2 power)
        miwa        // (1 - x / re)^power
    };
    Kind kind = Kind::linear;
    Real re = 0;
    Real im = 0;
    int power = 1;

    Real operator()(const Real& x) const;
    // Pole location along the real line if the factor is singular there.
    std::optional<Real> pole() const;
    std::optional<Real> real_zero() const;
};

class Weight {
public:
    Weight();
    explicit Weight(RealFn base, std::string label = "custom");

    static Weight constant(const Real& c);
    static Weight polynomial(std::vector<Real> coefficients);
    static Weight exponential(const Real& rate);

    // exp(sign * sum_j t_j x^j) is multiplied in; t[0] is t_1.
    Weight with_times(const std::vector<Real>& t, int sign) const;
    Weight with_factor(const WeightFactor& f) const;

    Real operator()(const Real& x) const;
    Real base(const Real& x) const { return base_(x); }

    // Coefficients of x^1, x^2, ... in the exponent.
    const std::vector<Real>& exponent() const { return exponent_; }
    const std::vector<WeightFactor>& factors() const { return factors_; }
    const std::string& label() const { return label_; }

    // PoleOnSupport when a pole sits within margin of [lo, hi].
    void check_poles(const Real& lo, const Real& hi) const;

private:
    RealFn base_;
    std::string label_;
    std::vector<Real> exponent_;
    std::vector<WeightFactor> factors_;
};

class WeightedMeasure {
public:
    WeightedMeasure() = default;
    WeightedMeasure(Measure mu, std::vector<Weight> w1, std::vector<Weight> w2);

    const Measure& measure() const { return mu_; }
    const std::vector<Weight>& w1() const { return w1_; }
    const std::vector<Weight>& w2() const { return w2_; }
    int p1() const { return static_cast<int>(w1_.size()); }
    int p2() const { return static_cast<int>(w2_.size()); }

    WeightedMeasure with_w1(int a, Weight w) const;
    WeightedMeasure with_w2(int b, Weight w) const;

    // Pole check plus constant sign at every node.
    void validate() const;

private:
    Measure mu_;
    std::vector<Weight> w1_;
    std::vector<Weight> w2_;
};

Real integrate(const RealFn& f, const Measure& mu);
Real integrate(const RealFn& f, const WeightedMeasure& wm);

// exp(sum_{j>=1} t_j z^j) = sum_j S_j z^j, S_0..S_J; t[0] is t_1.
std::vector<Real> elementary_schur(const std::vector<Real>& t, int J);

// Miwa time vector [z^-1]: t_j = z^-j / j, j = 1..count.
std::vector<Real> miwa_times(const Real& z, int count);

enum class HausdorffVerdict { solvable_positive, solvable_negative, fails, inconclusive };
std::string to_string(HausdorffVerdict v);

struct HausdorffReport {
    HausdorffVerdict verdict = HausdorffVerdict::inconclusive;
    // Restricted finiteness heuristic, only set when requested.
    std::optional<bool> restricted_pass;
    // Worst difference with the wrong sign (0 when sign-uniform).
    Real worst_violation = 0;
};

struct HausdorffOptions {
    int window = 32;
    Real cauchy_tol = Real("1e-8");
    // Relative rounding level of the input data.
    Real input_eps = std::numeric_limits<Real>::epsilon() * 64;
};

HausdorffReport hausdorff_check(const std::vector<Real>& c, int Ncap, int Kcap, bool restricted,
                                const HausdorffOptions& opt = {});

// Moments of mu after mapping its support bounds affinely onto [0, 1].
std::vector<Real> unit_interval_moments(const Measure& mu, int count);

// lambda[j][i]: i-th Taylor coefficient of candidate weight j.
using CoefficientTable = std::vector<std::vector<Real>>;

struct NikishinReport {
    bool success = false;
    std::string failure;
    // theta[k][j]: sequence lambda_{., j, k} for j >= k (0-based k, j).
    std::vector<std::vector<std::vector<Real>>> theta;
    Real max_residual = 0;
};

NikishinReport nikishin_inverse(const CoefficientTable& table, const Real& tol,
                                const HausdorffOptions& opt = {});

// w_j = tilde(s_j) for the M-Nikishin system generated by the given measures on [0, 1].
std::vector<Weight> mnikishin_weights(const std::vector<Measure>& generators);
// Taylor coefficients at 0 of the same weights, i.e. the moments of the nested measures.
CoefficientTable mnikishin_coefficients(const std::vector<Measure>& generators, int count);

}  // namespace mixedmop
