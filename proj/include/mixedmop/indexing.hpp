#pragma once

#include <map>
#include <utility>
#include <vector>

#include "mixedmop/real.hpp"

namespace mixedmop {

// Channels are 0-based throughout: a in [0, p).
class Composition {
public:
    Composition() = default;
    explicit Composition(std::vector<int> parts);

    int p() const { return static_cast<int>(parts_.size()); }
    int total() const { return total_; }
    int part(int a) const { return parts_.at(static_cast<std::size_t>(a)); }
    const std::vector<int>& parts() const { return parts_; }
    // n_0 + ... + n_{a-1}
    int offset(int a) const { return offsets_.at(static_cast<std::size_t>(a)); }
    // N_a = |n| - n_a + 1, the jump of the shift at the end of an a-block
    int jump(int a) const { return total_ - part(a) + 1; }
    // max_a N_a, the bandwidth of the shift operator
    int bandwidth() const;

    bool operator==(const Composition& o) const { return parts_ == o.parts_; }

private:
    std::vector<int> parts_;
    std::vector<int> offsets_;
    int total_ = 0;
};

struct IndexTriple {
    int q = 0;
    int a = 0;
    int r = 0;
    bool operator==(const IndexTriple&) const = default;
};

struct DegreeVector {
    int level = 0;
    std::vector<int> entries;
    int total() const;
};

enum class Side { plus, minus };

IndexTriple decompose_index(int i, const Composition& n);
int channel_of(int i, const Composition& n);
int local_degree(int i, const Composition& n);
int compose_index(int k, int a, const Composition& n);
// Index holding degree k+1 in the channel of i; the unit of the shift Y sits at (i, successor(i)).
int successor(int i, const Composition& n);

// l_{+a} (smallest index >= l in channel a) or l_{-a} (largest index <= l in channel a).
int associated_integer(int l, int a, Side side, const Composition& n);

// nu_a(l) = #{ i <= l : a(i) = a }, so |nu(l)| = l + 1.
DegreeVector degree_vector(int l, const Composition& n);
// Same count with l = -1 allowed (all zeros).
int degree_count(int l, int a, const Composition& n);

// Sparse square operator with integer entries, truncated at size L.
class BandedOperator {
public:
    explicit BandedOperator(int size = 0) : size_(size) {}

    int size() const { return size_; }
    void set(int row, int col, int value);
    int at(int row, int col) const;
    // (row, offset) -> value, offset = col - row
    const std::map<std::pair<int, int>, int>& entries() const { return entries_; }
    int upper_bandwidth() const;
    int lower_bandwidth() const;
    Mat dense() const;
    // Rows whose band lies entirely inside the window.
    std::vector<int> full_rows() const { return full_rows_; }
    void set_full_rows(std::vector<int> rows) { full_rows_ = std::move(rows); }

private:
    int size_;
    std::map<std::pair<int, int>, int> entries_;
    std::vector<int> full_rows_;
};

// Y: one unit per row at (i, successor(i)).
BandedOperator build_upsilon(const Composition& n, int L);
// Lambda_a: the part of Y on rows of channel a.
BandedOperator build_lambda(const Composition& n, int a, int L);
// Pi_a: diagonal projector onto channel a.
BandedOperator build_projector(const Composition& n, int a, int L);

// pi[i] = compose_index(local_degree(i), channel_of(i), to) for i < count.
std::vector<int> composition_permutation(const Composition& from, const Composition& to, int count);

}  // namespace mixedmop
