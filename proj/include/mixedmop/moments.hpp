#pragma once

#include "mixedmop/indexing.hpp"
#include "mixedmop/measures.hpp"

namespace mixedmop {

enum class Slice { row, column };

// g^[L] together with W extra rows and columns and the raw moment sequences.
class MomentMatrix {
public:
    // window < 0 selects max(N1, N2) + 1; extra_orders extends the raw moment sequences.
    MomentMatrix(const WeightedMeasure& wm, Composition n1, Composition n2, int L, int window = -1,
                 int extra_orders = 0);

    int size() const { return L_; }
    int window() const { return W_; }
    const Composition& n1() const { return n1_; }
    const Composition& n2() const { return n2_; }
    const WeightedMeasure& source() const { return wm_; }

    const Mat& g() const { return g_; }
    // (L+W) x (L+W)
    const Mat& extended() const { return ext_; }
    Real entry(int i, int j) const;
    // Row or column `index` (< L+W) restricted to the first L entries of the other side.
    Vec extension_block(Slice side, int index) const;

    // int x^n w1_a w2_b dmu
    Real moment(int a, int b, int n) const;
    int max_order() const { return max_order_; }
    // Entry (i, j) for any indices whose moment order is available.
    Real raw_entry(int i, int j) const;

private:
    WeightedMeasure wm_;
    Composition n1_, n2_;
    int L_, W_, max_order_;
    std::vector<std::vector<std::vector<Real>>> mom_;
    Mat g_, ext_;
};

// Max |(Y1 g - g Y2^T)_{ij}| over the entries where both sides are available in the window.
Real hankel_residual(const MomentMatrix& mm);
Real hankel_residual(const Mat& g, const Composition& n1, const Composition& n2);

}  // namespace mixedmop
