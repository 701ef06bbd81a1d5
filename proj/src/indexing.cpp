#include "mixedmop/indexing.hpp"

#include <algorithm>

#include "mixedmop/errors.hpp"

namespace mixedmop {

Composition::Composition(std::vector<int> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw ConfigError("composition must have at least one part");
    offsets_.reserve(parts_.size());
    for (int v : parts_) {
        if (v < 1) throw ConfigError("composition parts must be >= 1");
        offsets_.push_back(total_);
        total_ += v;
    }
}

int Composition::bandwidth() const {
    int b = 0;
    for (int a = 0; a < p(); ++a) b = std::max(b, jump(a));
    return b;
}

int DegreeVector::total() const {
    int s = 0;
    for (int v : entries) s += v;
    return s;
}

IndexTriple decompose_index(int i, const Composition& n) {
    IndexTriple t;
    t.q = i / n.total();
    int rest = i % n.total();
    for (int a = 0; a < n.p(); ++a) {
        if (rest < n.part(a)) {
            t.a = a;
            t.r = rest;
            break;
        }
        rest -= n.part(a);
    }
    return t;
}

int channel_of(int i, const Composition& n) { return decompose_index(i, n).a; }

int local_degree(int i, const Composition& n) {
    const IndexTriple t = decompose_index(i, n);
    return t.q * n.part(t.a) + t.r;
}

int compose_index(int k, int a, const Composition& n) {
    return (k / n.part(a)) * (n.total() - n.part(a)) + n.offset(a) + k;
}

int successor(int i, const Composition& n) {
    return compose_index(local_degree(i, n) + 1, channel_of(i, n), n);
}

int associated_integer(int l, int a, Side side, const Composition& n) {
    if (side == Side::plus) {
        for (int i = std::max(l, 0);; ++i)
            if (channel_of(i, n) == a) return i;
    }
    for (int i = l, steps = 0; i >= 0 && steps <= n.total(); --i, ++steps)
        if (channel_of(i, n) == a) return i;
    throw MinusNotFound("no index <= " + std::to_string(l) + " in channel " + std::to_string(a));
}

int degree_count(int l, int a, const Composition& n) {
    if (l < 0) return 0;
    const IndexTriple t = decompose_index(l, n);
    int c = (t.q) * n.part(a);
    if (a < t.a) c += n.part(a);
    else if (a == t.a) c += t.r + 1;
    return c;
}

DegreeVector degree_vector(int l, const Composition& n) {
    DegreeVector d;
    d.level = l;
    for (int a = 0; a < n.p(); ++a) d.entries.push_back(degree_count(l, a, n));
    return d;
}

void BandedOperator::set(int row, int col, int value) {
    if (value == 0) entries_.erase({row, col - row});
    else entries_[{row, col - row}] = value;
}

int BandedOperator::at(int row, int col) const {
    auto it = entries_.find({row, col - row});
    return it == entries_.end() ? 0 : it->second;
}

int BandedOperator::upper_bandwidth() const {
    int b = 0;
    for (const auto& [key, v] : entries_) b = std::max(b, key.second);
    return b;
}

int BandedOperator::lower_bandwidth() const {
    int b = 0;
    for (const auto& [key, v] : entries_) b = std::max(b, -key.second);
    return b;
}

Mat BandedOperator::dense() const {
    Mat m = Mat::Zero(size_, size_);
    for (const auto& [key, v] : entries_) m(key.first, key.first + key.second) = Real(v);
    return m;
}

namespace {

BandedOperator shift_rows(const Composition& n, int L, int only_channel) {
    BandedOperator op(L);
    std::vector<int> full;
    for (int i = 0; i < L; ++i) {
        const int s = successor(i, n);
        if (s < L) full.push_back(i);
        if (only_channel >= 0 && channel_of(i, n) != only_channel) continue;
        if (s < L) op.set(i, s, 1);
    }
    op.set_full_rows(std::move(full));
    return op;
}

}  // namespace

BandedOperator build_upsilon(const Composition& n, int L) { return shift_rows(n, L, -1); }

BandedOperator build_lambda(const Composition& n, int a, int L) { return shift_rows(n, L, a); }

BandedOperator build_projector(const Composition& n, int a, int L) {
    BandedOperator op(L);
    std::vector<int> full;
    for (int i = 0; i < L; ++i) {
        if (channel_of(i, n) == a) op.set(i, i, 1);
        full.push_back(i);
    }
    op.set_full_rows(std::move(full));
    return op;
}

std::vector<int> composition_permutation(const Composition& from, const Composition& to, int count) {
    if (from.p() != to.p()) throw ConfigError("permutation needs equal channel counts");
    std::vector<int> pi(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        pi[static_cast<std::size_t>(i)] = compose_index(local_degree(i, from), channel_of(i, from), to);
    return pi;
}

}  // namespace mixedmop
