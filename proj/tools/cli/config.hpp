#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixedmop/discrete.hpp"

namespace mixedmop::cli {

inline constexpr const char* kSchema = "mixedmop-config/1";

struct MeasureSpec {
    std::string kind;  // lebesgue | atoms | nikishin
    Real lo = -1, hi = 1;
    std::vector<Real> nodes, masses;
    std::vector<Measure> generators;
};

struct WeightSpec {
    std::string kind;  // constant | polynomial | exponential | nikishin
    Real value = 1;
    std::vector<Real> coefficients;
    Real rate = 0;
    int index = 1;  // 1-based generator index for nikishin weights
};

struct TimeSpec {
    int jmax = 2;
    int block = 8;
    std::vector<std::vector<Real>> t, tbar;
};

struct ShiftSpec {
    bool present = false;
    bool binary = false;
    int block = 8;
    std::vector<LambdaSequence> lambda, lambda_bar;
    std::vector<int> s, sbar;
    std::vector<Real> miwa;
};

struct ExperimentConfig {
    nlohmann::json source;
    MeasureSpec measure;
    int quadrature_order = 200;
    std::vector<WeightSpec> w1, w2;
    Composition n1, n2;
    int L = 0;
    TimeSpec times;
    ShiftSpec shifts;
    std::map<std::string, Real> tolerances;
    std::vector<std::string> checks;
};

// ConfigError with the dotted path of the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

WeightedMeasure build_weighted_measure(const ExperimentConfig& cfg);
FlowSetup flow_setup(const ExperimentConfig& cfg, const WeightedMeasure& wm);
FlowTimes flow_times(const ExperimentConfig& cfg);
ShiftConfig shift_config(const ExperimentConfig& cfg, const WeightedMeasure& wm);

// p1 = p2 = 1, unit weights, Lebesgue on [-1, 1].
bool is_legendre(const ExperimentConfig& cfg);

}  // namespace mixedmop::cli
