#include "mixedmop/moments.hpp"

#include <algorithm>

#include "mixedmop/errors.hpp"

namespace mixedmop {

MomentMatrix::MomentMatrix(const WeightedMeasure& wm, Composition n1, Composition n2, int L, int window,
                           int extra_orders)
    : wm_(wm), n1_(std::move(n1)), n2_(std::move(n2)), L_(L) {
    if (L < 1) throw ConfigError("truncation must be >= 1");
    if (wm.p1() != n1_.p() || wm.p2() != n2_.p())
        throw ConfigError("composition lengths must match the weight counts");
    W_ = window >= 0 ? window : std::max(n1_.bandwidth(), n2_.bandwidth()) + 1;
    const int M = L_ + W_;
    int k1 = 0, k2 = 0;
    for (int i = 0; i < M; ++i) {
        k1 = std::max(k1, local_degree(i, n1_));
        k2 = std::max(k2, local_degree(i, n2_));
    }
    max_order_ = k1 + k2 + n1_.total() + n2_.total() + extra_orders;

    const Measure& mu = wm.measure();
    std::vector<std::vector<Real>> v1(static_cast<std::size_t>(wm.p1())), v2(static_cast<std::size_t>(wm.p2()));
    for (int a = 0; a < wm.p1(); ++a)
        for (const Real& x : mu.nodes()) v1[static_cast<std::size_t>(a)].push_back(wm.w1()[static_cast<std::size_t>(a)](x));
    for (int b = 0; b < wm.p2(); ++b)
        for (const Real& x : mu.nodes()) v2[static_cast<std::size_t>(b)].push_back(wm.w2()[static_cast<std::size_t>(b)](x));

    mom_.assign(static_cast<std::size_t>(wm.p1()),
                std::vector<std::vector<Real>>(static_cast<std::size_t>(wm.p2()),
                                               std::vector<Real>(static_cast<std::size_t>(max_order_ + 1), Real(0))));
    for (int a = 0; a < wm.p1(); ++a) {
        for (int b = 0; b < wm.p2(); ++b) {
            auto& m = mom_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            for (int i = 0; i < mu.size(); ++i) {
                const auto si = static_cast<std::size_t>(i);
                const Real x = mu.nodes()[si];
                Real term = mu.masses()[si] * v1[static_cast<std::size_t>(a)][si] * v2[static_cast<std::size_t>(b)][si];
                if (!isfinite(term)) throw NonFinite("weight product not finite at a node");
                for (int n = 0; n <= max_order_; ++n) {
                    m[static_cast<std::size_t>(n)] += term;
                    term *= x;
                }
            }
        }
    }

    ext_.resize(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) ext_(i, j) = raw_entry(i, j);
    g_ = ext_.topLeftCorner(L_, L_);
}

Real MomentMatrix::moment(int a, int b, int n) const {
    if (n > max_order_) throw WindowExceeded("moment order " + std::to_string(n) + " not available");
    return mom_.at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b))[static_cast<std::size_t>(n)];
}

Real MomentMatrix::raw_entry(int i, int j) const {
    return moment(channel_of(i, n1_), channel_of(j, n2_), local_degree(i, n1_) + local_degree(j, n2_));
}

Real MomentMatrix::entry(int i, int j) const {
    if (i >= L_ + W_ || j >= L_ + W_) throw WindowExceeded("entry beyond L+W");
    return ext_(i, j);
}

Vec MomentMatrix::extension_block(Slice side, int index) const {
    if (index >= L_ + W_) throw WindowExceeded("index " + std::to_string(index) + " beyond L+W");
    if (side == Slice::row) return ext_.row(index).head(L_).transpose();
    return ext_.col(index).head(L_);
}

Real hankel_residual(const Mat& g, const Composition& n1, const Composition& n2) {
    Real r = 0;
    for (int i = 0; i < g.rows(); ++i) {
        const int si = successor(i, n1);
        if (si >= g.rows()) continue;
        for (int j = 0; j < g.cols(); ++j) {
            const int sj = successor(j, n2);
            if (sj >= g.cols()) continue;
            r = std::max(r, Real(abs(g(si, j) - g(i, sj))));
        }
    }
    return r;
}

Real hankel_residual(const MomentMatrix& mm) { return hankel_residual(mm.extended(), mm.n1(), mm.n2()); }

}  // namespace mixedmop
