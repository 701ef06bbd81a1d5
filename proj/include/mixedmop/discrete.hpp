#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

#include "mixedmop/toda.hpp"

namespace mixedmop {

struct SpectralPoint {
    Real re = 0;
    Real im = 0;
};

// forward[k] = lambda(k+1), backward[k] = lambda(-k). The step s -> s+1 multiplies by (x - lambda(s+1)).
struct LambdaSequence {
    std::vector<SpectralPoint> forward, backward;

    SpectralPoint at(int n) const;
    static LambdaSequence constant(const Real& re, const Real& im = 0);
};

struct ShiftConfig {
    WeightedMeasure base;
    Composition n1, n2;
    int L = 0;  // observed block
    bool binary = false;
    std::vector<LambdaSequence> lambda, lambda_bar;
};

// T_a (bar = false) or Tbar_b (bar = true).
struct Step {
    bool bar = false;
    int channel = 0;
};

int discrete_margin(const ShiftConfig& cfg);

struct ShiftState {
    ShiftConfig cfg;
    std::vector<int> s, sbar;
    WeightedMeasure weights;
    Factorization f;  // at cfg.L + discrete_margin(cfg)

    SpectralPoint next_lambda(const Step& st) const;
};

// Discrete-time weights: w_{1,a} prod (x - lambda_a(n)) and w_{2,b} prod (x - lambdabar_b(n)), inverted for negative s.
WeightedMeasure shifted_weights(const ShiftConfig& cfg, const std::vector<int>& s, const std::vector<int>& sbar);
ShiftState make_state(const ShiftConfig& cfg, const std::vector<int>& s, const std::vector<int>& sbar);
ShiftState shift(const ShiftState& st, const Step& step);

// Memoized states keyed by (s, sbar); concurrent readers, single writer on insertion.
class ShiftLattice {
public:
    explicit ShiftLattice(ShiftConfig cfg) : cfg_(std::move(cfg)) {}
    std::shared_ptr<const ShiftState> get(const std::vector<int>& s, const std::vector<int>& sbar);
    std::size_t size() const;

private:
    ShiftConfig cfg_;
    mutable std::shared_mutex mutex_;
    std::map<std::pair<std::vector<int>, std::vector<int>>, std::shared_ptr<const ShiftState>> cache_;
};

// delta_a = I - C_a (1 + lambda) + L_a, or the binary quadratic version; exact on rows < size - band.
Mat lattice_resolvent(const ShiftState& st, const Step& step);
// (T_a Sbar) Sbar^{-1} or (Tbar_b S) S^{-1} from two factorizations.
Mat omega(const ShiftState& st, const ShiftState& shifted, const Step& step);
// Off-diagonals of omega_a (upper) or omegabar_b^{-1} (lower): N, or 2N in binary mode.
int omega_band(const ShiftConfig& cfg, const Step& step);

struct OmegaReport {
    Mat omega;
    // omega_a, or omegabar_b^{-1} for barred steps: the factor that is banded.
    Mat banded;
    Real lu_plus = 0;   // omega against the upper LU factor of delta
    Real lu_minus = 0;  // the lower factor against the shifted S ratio
    Real shape = 0;     // largest entry outside the predicted band
    Real ul = 0;        // LU to UL permutation
};

// FactorizationMismatch when either LU residual exceeds 1e-7.
OmegaReport omega_factors(const ShiftState& st, const Step& step);

// (T_{s1} omega_{s2}) omega_{s1} - (T_{s2} omega_{s1}) omega_{s2} on the observed block.
Real dzs_residual(ShiftLattice& lattice, const std::vector<int>& s, const std::vector<int>& sbar, const Step& s1,
                  const Step& s2);
// T W = omega W with W = S D_0, plus the dual wave Abar_b times the barred weight factors, at z.
Real discrete_wave_residual(const ShiftState& st, const Step& step, const Real& z);
// T L = omega L omega^{-1} for every Lax matrix.
Real discrete_lax_residual(const ShiftState& st, const Step& step);
// Mixed continuous and discrete compatibility through central differences in t.
Real mixed_zs_residual(const ShiftState& st, const Step& step, const Direction& d, const Real& h);

// max over nodes of |c_a (x - lambda) w(x) - (1 - x / lambda) w(x)| with c_a = (-lambda)^{-1}.
Real miwa_weight_residual(const WeightedMeasure& base, int a, const Real& lambda);
// Coefficient gap between MOPs from the discrete step (scaled by c_a) and from the Miwa-shifted weights.
Real miwa_equivalence_residual(const WeightedMeasure& base, const Composition& n1, const Composition& n2, int L, int a,
                               const Real& lambda);

// gamma_{a,a'}(z) = 1 - [a = a'](1 + lambda - z), |z - lambda|^2 on the shifted channel in binary mode.
Real gamma_factor(const ShiftState& st, const Step& step, int channel, const Real& z);

// (T A_a) gamma = omega A_a and omega^T (T Abar_b) = Abar_b for primal steps;
// Tbar A_a = omegabar A_a and (Tbar Abar_b) gammabar = omegabar^{-T} Abar_b for barred ones.
Real discrete_mop_link_residual(const ShiftState& st, const Step& step, const Real& z);

}  // namespace mixedmop
