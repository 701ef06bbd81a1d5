#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "mixedmop/jacobi.hpp"
#include "mixedmop/tau.hpp"

namespace mixedmop::cli {

template <class T>
class Lazy {
public:
    template <class F>
    const T& get(F&& make) {
        std::call_once(once_, [&] { value_.emplace(make()); });
        return *value_;
    }

private:
    std::once_flag once_;
    std::optional<T> value_;
};

// Shared, lazily built objects for one run. Safe for concurrent checks.
class Context {
public:
    Context(const ExperimentConfig& cfg, unsigned seed) : cfg_(cfg), seed_(seed) {}

    const ExperimentConfig& cfg() const { return cfg_; }
    unsigned seed() const { return seed_; }

    const WeightedMeasure& weights();
    const MomentMatrix& moments();
    const Factorization& factorization();
    // Factorization at L + jacobi_margin and the exact L x L block of J.
    const Factorization& jacobi_factorization();
    const SnakeMatrix& snake();
    ShiftConfig shifts();
    FlowPoint origin() const;

    // Seeded points inside the support interval.
    std::vector<std::pair<Real, Real>> sample_pairs(int count, unsigned salt) const;
    // Points at distance 0.7, 1.3 and 3.1 beyond the support radius, alternating in sign.
    std::vector<Real> off_support();

private:
    const ExperimentConfig& cfg_;
    unsigned seed_;
    Lazy<WeightedMeasure> wm_;
    Lazy<MomentMatrix> mm_;
    Lazy<Factorization> f_, fj_;
    Lazy<SnakeMatrix> snake_;
};

struct CheckDef {
    std::string name;
    std::string command;
    Real tolerance;
    // Empty when the check applies to the configuration, otherwise the reason it does not.
    std::function<std::string(const ExperimentConfig&)> applies;
    std::function<Real(Context&)> run;
};

const std::vector<CheckDef>& check_registry();
const CheckDef* find_check(const std::string& name);

// Commands in display order, verify-all last.
const std::vector<std::string>& command_names();

}  // namespace mixedmop::cli
