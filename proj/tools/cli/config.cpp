#include "config.hpp"

#include <fstream>
#include <set>

#include "mixedmop/errors.hpp"

namespace mixedmop::cli {

using nlohmann::json;

namespace {

// Object reader that remembers which keys were consumed so leftovers can be rejected.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    const std::string& path() const { return path_; }
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& get(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(child(key) + ": required field is missing");
        return j_.at(key);
    }
    const json* find(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(child(it.key()) + ": unknown key");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError((path_.empty() ? "config" : path_) + ": " + msg); }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

Real to_real(const json& j, const std::string& path) {
    if (j.is_number()) return Real(j.dump());
    if (j.is_string()) {
        try {
            return Real(j.get<std::string>());
        } catch (const std::exception&) {
        }
    }
    throw ConfigError(path + ": expected a number");
}

int to_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<int>();
}

std::vector<Real> to_reals(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<Real> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_real(j[i], at(path, i)));
    return out;
}

std::vector<int> to_ints(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_int(j[i], at(path, i)));
    return out;
}

Measure atoms_of(Node& n) {
    const auto nodes = to_reals(n.get("nodes"), n.child("nodes"));
    const auto masses = to_reals(n.get("masses"), n.child("masses"));
    if (nodes.empty()) throw ConfigError(n.child("nodes") + ": at least one atom required");
    if (nodes.size() != masses.size()) throw ConfigError(n.child("masses") + ": length differs from nodes");
    for (std::size_t i = 0; i < masses.size(); ++i)
        if (masses[i] <= 0) throw ConfigError(at(n.child("masses"), i) + ": masses must be positive");
    std::set<Real> distinct(nodes.begin(), nodes.end());
    if (distinct.size() != nodes.size()) throw ConfigError(n.child("nodes") + ": nodes must be distinct");
    return Measure::atomic(nodes, masses);
}

MeasureSpec parse_measure(const json& j, const std::string& path) {
    Node n(j, path);
    MeasureSpec m;
    const json& kind = n.get("kind");
    if (!kind.is_string()) throw ConfigError(n.child("kind") + ": expected a string");
    m.kind = kind.get<std::string>();
    if (m.kind == "lebesgue" || m.kind == "nikishin") {
        if (auto* v = n.find("lo")) m.lo = to_real(*v, n.child("lo"));
        if (auto* v = n.find("hi")) m.hi = to_real(*v, n.child("hi"));
        if (!(m.lo < m.hi)) throw ConfigError(n.child("hi") + ": interval must satisfy lo < hi");
        if (m.kind == "nikishin") {
            const json& g = n.get("generators");
            if (!g.is_array() || g.empty())
                throw ConfigError(n.child("generators") + ": expected a non-empty array of atomic measures");
            for (std::size_t i = 0; i < g.size(); ++i) {
                Node gn(g[i], at(n.child("generators"), i));
                Measure mu = atoms_of(gn);
                gn.finish();
                if (mu.lo() < 0 || mu.hi() >= 1)
                    throw ConfigError(gn.child("nodes") + ": generators must live on [0, 1)");
                m.generators.push_back(std::move(mu));
            }
        }
    } else if (m.kind == "atoms") {
        Measure mu = atoms_of(n);
        m.nodes = mu.nodes();
        m.masses = mu.masses();
        m.lo = mu.lo();
        m.hi = mu.hi();
    } else {
        throw ConfigError(n.child("kind") + ": unknown measure kind '" + m.kind + "'");
    }
    n.finish();
    return m;
}

std::vector<WeightSpec> parse_weights(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of weights");
    std::vector<WeightSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        Node n(j[i], at(path, i));
        WeightSpec w;
        const json& kind = n.get("kind");
        if (!kind.is_string()) throw ConfigError(n.child("kind") + ": expected a string");
        w.kind = kind.get<std::string>();
        if (w.kind == "constant") {
            w.value = to_real(n.get("value"), n.child("value"));
            if (w.value == 0) throw ConfigError(n.child("value") + ": a weight cannot vanish");
        } else if (w.kind == "polynomial") {
            w.coefficients = to_reals(n.get("coefficients"), n.child("coefficients"));
            if (w.coefficients.empty()) throw ConfigError(n.child("coefficients") + ": empty polynomial");
        } else if (w.kind == "exponential") {
            w.rate = to_real(n.get("rate"), n.child("rate"));
        } else if (w.kind == "nikishin") {
            w.index = to_int(n.get("index"), n.child("index"));
        } else {
            throw ConfigError(n.child("kind") + ": unknown weight kind '" + w.kind + "'");
        }
        n.finish();
        out.push_back(std::move(w));
    }
    return out;
}

Composition parse_composition(const json& j, const std::string& path) {
    const auto parts = to_ints(j, path);
    if (parts.empty()) throw ConfigError(path + ": composition needs at least one part");
    for (std::size_t i = 0; i < parts.size(); ++i)
        if (parts[i] <= 0) throw ConfigError(at(path, i) + ": composition parts must be positive");
    return Composition(parts);
}

SpectralPoint parse_point(const json& j, const std::string& path) {
    if (j.is_array()) {
        if (j.size() != 2) throw ConfigError(path + ": expected [re, im]");
        return {to_real(j[0], at(path, 0)), to_real(j[1], at(path, 1))};
    }
    return {to_real(j, path), Real(0)};
}

std::vector<LambdaSequence> parse_lambdas(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected one sequence per channel");
    std::vector<LambdaSequence> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        Node n(j[i], at(path, i));
        LambdaSequence s;
        for (const char* side : {"forward", "backward"}) {
            auto* v = n.find(side);
            if (!v) continue;
            if (!v->is_array()) throw ConfigError(n.child(side) + ": expected an array of points");
            auto& dst = std::string(side) == "forward" ? s.forward : s.backward;
            for (std::size_t k = 0; k < v->size(); ++k) dst.push_back(parse_point((*v)[k], at(n.child(side), k)));
        }
        if (s.forward.empty()) throw ConfigError(n.child("forward") + ": at least one point required");
        n.finish();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::vector<Real>> parse_time_rows(const json* j, const std::string& path, int p, int jmax) {
    std::vector<std::vector<Real>> rows(static_cast<std::size_t>(p), std::vector<Real>(static_cast<std::size_t>(jmax)));
    if (!j) return rows;
    if (!j->is_array() || static_cast<int>(j->size()) != p)
        throw ConfigError(path + ": expected " + std::to_string(p) + " rows, one per channel");
    for (std::size_t a = 0; a < j->size(); ++a) {
        const auto row = to_reals((*j)[a], at(path, a));
        if (static_cast<int>(row.size()) > jmax) throw ConfigError(at(path, a) + ": more entries than jmax");
        for (std::size_t k = 0; k < row.size(); ++k) rows[a][k] = row[k];
    }
    return rows;
}

int positive_int(Node& n, const std::string& key, int fallback) {
    const json* v = n.find(key);
    if (!v) return fallback;
    const int x = to_int(*v, n.child(key));
    if (x <= 0) throw ConfigError(n.child(key) + ": must be positive");
    return x;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    cfg.source = j;
    Node root(j, "");
    const json& schema = root.get("schema");
    if (!schema.is_string() || schema.get<std::string>() != kSchema)
        throw ConfigError(std::string("schema: expected \"") + kSchema + "\"");

    cfg.measure = parse_measure(root.get("measure"), "measure");
    cfg.quadrature_order = positive_int(root, "quadrature_order", 200);
    cfg.w1 = parse_weights(root.get("w1"), "w1");
    cfg.w2 = parse_weights(root.get("w2"), "w2");
    cfg.n1 = parse_composition(root.get("n1"), "n1");
    cfg.n2 = parse_composition(root.get("n2"), "n2");
    if (cfg.n1.p() != static_cast<int>(cfg.w1.size()))
        throw ConfigError("n1: has " + std::to_string(cfg.n1.p()) + " parts but w1 lists " +
                          std::to_string(cfg.w1.size()) + " weights");
    if (cfg.n2.p() != static_cast<int>(cfg.w2.size()))
        throw ConfigError("n2: has " + std::to_string(cfg.n2.p()) + " parts but w2 lists " +
                          std::to_string(cfg.w2.size()) + " weights");
    for (const auto* side : {&cfg.w1, &cfg.w2})
        for (std::size_t i = 0; i < side->size(); ++i) {
            const WeightSpec& w = (*side)[i];
            if (w.kind != "nikishin") continue;
            const std::string path = at(side == &cfg.w1 ? "w1" : "w2", i) + ".index";
            if (cfg.measure.kind != "nikishin") throw ConfigError(path + ": nikishin weights need a nikishin measure");
            if (w.index < 1 || w.index > static_cast<int>(cfg.measure.generators.size()))
                throw ConfigError(path + ": no such generator");
        }

    cfg.L = to_int(root.get("L"), "L");
    const int need = std::max(cfg.n1.total(), cfg.n2.total()) + cfg.n1.bandwidth() + cfg.n2.bandwidth();
    if (cfg.L < need) throw ConfigError("L: must be at least max(|n1|,|n2|) + N1 + N2 = " + std::to_string(need));

    if (const json* tj = root.find("times")) {
        Node tn(*tj, "times");
        cfg.times.jmax = positive_int(tn, "jmax", 2);
        cfg.times.block = positive_int(tn, "block", 8);
        cfg.times.t = parse_time_rows(tn.find("t"), "times.t", cfg.n1.p(), cfg.times.jmax);
        cfg.times.tbar = parse_time_rows(tn.find("tbar"), "times.tbar", cfg.n2.p(), cfg.times.jmax);
        tn.finish();
    } else {
        cfg.times.t = parse_time_rows(nullptr, "", cfg.n1.p(), cfg.times.jmax);
        cfg.times.tbar = parse_time_rows(nullptr, "", cfg.n2.p(), cfg.times.jmax);
    }

    ShiftSpec& sh = cfg.shifts;
    sh.s.assign(static_cast<std::size_t>(cfg.n1.p()), 0);
    sh.sbar.assign(static_cast<std::size_t>(cfg.n2.p()), 0);
    if (const json* sj = root.find("shifts")) {
        Node sn(*sj, "shifts");
        sh.present = true;
        if (const json* b = sn.find("binary")) {
            if (!b->is_boolean()) throw ConfigError("shifts.binary: expected true or false");
            sh.binary = b->get<bool>();
        }
        sh.block = positive_int(sn, "block", 8);
        sh.lambda = parse_lambdas(sn.get("lambda"), "shifts.lambda");
        sh.lambda_bar = parse_lambdas(sn.get("lambda_bar"), "shifts.lambda_bar");
        if (static_cast<int>(sh.lambda.size()) != cfg.n1.p())
            throw ConfigError("shifts.lambda: expected one sequence per n1 channel");
        if (static_cast<int>(sh.lambda_bar.size()) != cfg.n2.p())
            throw ConfigError("shifts.lambda_bar: expected one sequence per n2 channel");
        if (const json* v = sn.find("s")) sh.s = to_ints(*v, "shifts.s");
        if (const json* v = sn.find("sbar")) sh.sbar = to_ints(*v, "shifts.sbar");
        if (static_cast<int>(sh.s.size()) != cfg.n1.p()) throw ConfigError("shifts.s: expected one entry per n1 channel");
        if (static_cast<int>(sh.sbar.size()) != cfg.n2.p())
            throw ConfigError("shifts.sbar: expected one entry per n2 channel");
        if (const json* v = sn.find("miwa")) sh.miwa = to_reals(*v, "shifts.miwa");
        for (std::size_t i = 0; i < sh.miwa.size(); ++i)
            if (sh.miwa[i] >= cfg.measure.lo && sh.miwa[i] <= cfg.measure.hi)
                throw ConfigError(at("shifts.miwa", i) + ": Miwa points must lie off the support");
        sn.finish();
    }

    if (const json* tol = root.find("tolerances")) {
        if (!tol->is_object()) throw ConfigError("tolerances: expected an object of name: value");
        for (auto it = tol->begin(); it != tol->end(); ++it) {
            const Real v = to_real(it.value(), "tolerances." + it.key());
            if (v < 0) throw ConfigError("tolerances." + it.key() + ": must be non-negative");
            cfg.tolerances[it.key()] = v;
        }
    }
    if (const json* ch = root.find("checks")) {
        if (!ch->is_array()) throw ConfigError("checks: expected an array of names");
        for (std::size_t i = 0; i < ch->size(); ++i) {
            if (!(*ch)[i].is_string()) throw ConfigError(at("checks", i) + ": expected a string");
            cfg.checks.push_back((*ch)[i].get<std::string>());
        }
    }
    root.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

namespace {

Weight build_weight(const WeightSpec& w, const std::vector<Weight>& nikishin) {
    if (w.kind == "constant") return Weight::constant(w.value);
    if (w.kind == "polynomial") return Weight::polynomial(w.coefficients);
    if (w.kind == "exponential") return Weight::exponential(w.rate);
    return nikishin.at(static_cast<std::size_t>(w.index - 1));
}

}  // namespace

WeightedMeasure build_weighted_measure(const ExperimentConfig& cfg) {
    const MeasureSpec& m = cfg.measure;
    Measure mu = m.kind == "atoms" ? Measure::atomic(m.nodes, m.masses)
                                   : Measure::lebesgue(m.lo, m.hi, cfg.quadrature_order);
    std::vector<Weight> nik;
    if (m.kind == "nikishin") nik = mnikishin_weights(m.generators);
    std::vector<Weight> w1, w2;
    for (const auto& w : cfg.w1) w1.push_back(build_weight(w, nik));
    for (const auto& w : cfg.w2) w2.push_back(build_weight(w, nik));
    WeightedMeasure wm(std::move(mu), std::move(w1), std::move(w2));
    wm.validate();
    return wm;
}

FlowSetup flow_setup(const ExperimentConfig& cfg, const WeightedMeasure& wm) {
    return {wm, cfg.n1, cfg.n2, std::min(cfg.times.block, cfg.L), cfg.times.jmax};
}

FlowTimes flow_times(const ExperimentConfig& cfg) { return {cfg.times.t, cfg.times.tbar}; }

ShiftConfig shift_config(const ExperimentConfig& cfg, const WeightedMeasure& wm) {
    ShiftConfig sc;
    sc.base = wm;
    sc.n1 = cfg.n1;
    sc.n2 = cfg.n2;
    sc.L = std::min(cfg.shifts.block, cfg.L);
    sc.binary = cfg.shifts.binary;
    sc.lambda = cfg.shifts.lambda;
    sc.lambda_bar = cfg.shifts.lambda_bar;
    return sc;
}

bool is_legendre(const ExperimentConfig& cfg) {
    auto unit = [](const std::vector<WeightSpec>& ws) {
        return ws.size() == 1 && ws[0].kind == "constant" && ws[0].value == 1;
    };
    return cfg.measure.kind == "lebesgue" && cfg.measure.lo == -1 && cfg.measure.hi == 1 && unit(cfg.w1) &&
           unit(cfg.w2);
}

}  // namespace mixedmop::cli
