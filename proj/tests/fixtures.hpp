#pragma once

#include <random>

#include "mixedmop/measures.hpp"
#include "mixedmop/moments.hpp"

namespace fixtures {

using namespace mixedmop;

inline WeightedMeasure legendre(int order = 60) {
    return WeightedMeasure(Measure::lebesgue(-1, 1, order), {Weight()}, {Weight()});
}

// Seeded atoms in (-1, 1) with positive masses.
inline Measure random_atoms(int count, unsigned seed = 7) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> pos(-0.95, 0.95), mass(0.5, 1.5);
    std::vector<Real> x, m;
    for (int i = 0; i < count; ++i) {
        // distinct by construction: jitter inside equal cells
        const double cell = 1.9 / count;
        x.push_back(Real(-0.95 + cell * (i + 0.5 + 0.4 * (pos(gen) / 0.95))));
        m.push_back(Real(mass(gen)));
    }
    return Measure::atomic(x, m);
}

// Two exponential weights on each side.
inline WeightedMeasure atomic_mixed(int atoms = 40, unsigned seed = 7) {
    return WeightedMeasure(random_atoms(atoms, seed), {Weight(), Weight::exponential(4)},
                           {Weight(), Weight::exponential(-3)});
}

// Three and two exponential weights with well separated rates on Lebesgue [-1, 1].
inline WeightedMeasure snake_weights(int order = 200) {
    return WeightedMeasure(Measure::lebesgue(-1, 1, order),
                           {Weight::exponential(-8), Weight::exponential(1), Weight::exponential(7)},
                           {Weight::exponential(-5), Weight::exponential(4)});
}

inline bool close(const Real& a, const Real& b, const Real& tol) { return abs(a - b) <= tol; }

}  // namespace fixtures
