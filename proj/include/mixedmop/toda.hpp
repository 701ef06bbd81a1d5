#pragma once

#include <vector>

#include "mixedmop/jacobi.hpp"

namespace mixedmop {

// t[a][j-1] = t_{j,a}, tbar[b][j-1] = tbar_{j,b}.
struct FlowTimes {
    std::vector<std::vector<Real>> t, tbar;

    static FlowTimes zero(int p1, int p2, int jmax);
};

// A single coordinate direction: t_{j,channel} or, when bar is set, tbar_{j,channel}.
struct Direction {
    bool bar = false;
    int j = 1;
    int channel = 0;
};

FlowTimes shifted(const FlowTimes& times, const Direction& d, const Real& h);

// Base data for a flow battery. Factorizations are taken at L + lax_margin and observed on L x L.
struct FlowSetup {
    WeightedMeasure base;
    Composition n1, n2;
    int L = 0;
    int jmax = 1;
};

int lax_margin(const Composition& n1, const Composition& n2, int jmax);

// w_{1,a} exp(sum_j t_{j,a} x^j) and w_{2,b} exp(-sum_j tbar_{j,b} x^j).
WeightedMeasure deform(const WeightedMeasure& base, const FlowTimes& times);

struct FlowState {
    FlowSetup setup;
    FlowTimes times;
    WeightedMeasure deformed;
    Mat g;  // deformed moment matrix at the factorization size
    Factorization f;
};

FlowState evolve(const FlowSetup& setup, const FlowTimes& times);

struct LaxSet {
    int L = 0;  // observed block
    std::vector<Mat> La, Lbar;
    // B[j-1][a] = (L_a^j)_+, Bbar[j-1][b] = (Lbar_b^j)_-
    std::vector<std::vector<Mat>> B, Bbar;
    // powers[j-1][a] = L_a^j, bar_powers[j-1][b] = Lbar_b^j at the factorization size
    std::vector<std::vector<Mat>> powers, bar_powers;
};

LaxSet lax_set(const FlowState& fs, int jmax);

// Psi_a = A_a E_a, PsiBarStar_b = Abar_b / Ebar_b, PsiBar_b and PsiStar_a are Cauchy transforms
// of the evolved forms against the undeformed weights.
enum class WaveKind { psi, psi_bar_star, psi_bar, psi_star };
Real wave_function(const FlowState& fs, WaveKind kind, int channel, int k, const Real& z);
// PsiBar_b = S(t) (W_0 g) chi*_b and PsiStar_a = (Sbar^{-1})^T (g Wbar_0^{-1})^T chi*_a, summed to `terms` orders.
Real wave_cauchy_series(const FlowState& fs, WaveKind kind, int channel, int k, const Real& z, int terms = 120);

// Finite-difference residuals below are divided by max(1, max-norm of the differentiated operator on the block).

// max over the observed block of the four Lax equations for one flow direction.
Real lax_fd_residual(const FlowSetup& setup, const FlowTimes& times, const Direction& d, const Real& h);
// Zakharov-Shabat equation for a pair of directions.
Real zs_fd_residual(const FlowSetup& setup, const FlowTimes& times, const Direction& d1, const Direction& d2,
                    const Real& h);
// (sum_a d/dt_{j,a} + sum_b d/dtbar_{j,b}) on L_a, Lbar_b, S and Sbar^{-1}, each partial by its own central difference.
Real symmetry_invariance_residual(const FlowSetup& setup, const FlowTimes& times, int j, const Real& h);
// dA_{a'}/dt = (B - delta x^j) A_{a'} and the dual systems at sample point x.
Real flow_mop_residual(const FlowSetup& setup, const FlowTimes& times, const Direction& d, const Real& h,
                       const Real& x);
// dPsi_{a'}/dt = B Psi_{a'} at z.
Real wave_flow_residual(const FlowSetup& setup, const FlowTimes& times, const Direction& d, const Real& h,
                        const Real& z);

// J^j against sum_a L_a^j and sum_b Lbar_b^j on the observed block.
Real string_equation_residual(const FlowState& fs, const LaxSet& lax, int j);
// L_a Psi_{a'} = delta z Psi_{a'} on the observed block.
Real lax_eigen_residual(const FlowState& fs, const LaxSet& lax, const Real& z);
// L_a^j by repeated products against S Lambda_a^j S^{-1}.
Real lax_power_consistency(const FlowState& fs, const LaxSet& lax, int j);

}  // namespace mixedmop
