#pragma once

// Shared circuit builders for the test suite: the paper-figure circuits as
// parameterized netlist strings, plus a random generator of connected
// circuits that satisfy the normal-tree conditions by construction.

#include <random>
#include <sstream>
#include <string>

#include "rlcsim/netlist.hpp"

namespace rlcsim::testing {

inline std::string fig1_netlist() {
    return "V1 3 5 V=1.0\n"
           "C1 2 0 C=1e-6\n"
           "C2 3 0 C=1e-6\n"
           "R1 4 2 R=1.0 T=300\n"
           "R2 5 6 R=1.0 T=320\n"
           "R4 1 0 R=1.0 T=310\n"
           "R3 1 5 R=1.0 T=280\n"
           "L1 1 4 L=1e-3\n"
           "I1 6 4 I=0.1\n";
}

struct Fig3Params {
    double R1 = 1.0, R2 = 1.0;
    double C = 1.0, L = 1.0;
    double T1 = 1.0, T2 = 1.0;
    double dC = 0.0;       // drive amplitude (absolute, farad)
    double theta = 0.0;    // phase of the C2 drive
    double wd = 0.0;       // rad/s; required if dC != 0
};

/// Two parallel RC cells coupled by an inductor (the paper's machine circuit),
/// with orientations matching the printed Q_link.
inline std::string fig3_netlist(const Fig3Params& p) {
    std::ostringstream os;
    os.precision(17);
    if (p.wd > 0.0) os << ".drive wd=" << p.wd << "\n";
    os << "C1 1 0 C=" << p.C;
    if (p.dC != 0.0) os << " A1=" << p.dC;
    os << "\n";
    os << "R1 1 0 R=" << p.R1 << " T=" << p.T1 << "\n";
    os << "C2 0 2 C=" << p.C;
    if (p.dC != 0.0) os << " A1=" << p.dC << " P1=" << p.theta;
    os << "\n";
    os << "R2 0 2 R=" << p.R2 << " T=" << p.T2 << "\n";
    os << "L1 2 1 L=" << p.L << "\n";
    return os.str();
}

inline CircuitSpec fig3_spec(const Fig3Params& p) { return parse_netlist(fig3_netlist(p)); }

/// R-L-R-C series loop (heat conduction through an inductor).
inline std::string two_resistor_inductor_loop(double R1, double R2, double L, double C,
                                              double T1, double T2) {
    std::ostringstream os;
    os.precision(17);
    os << "C1 1 2 C=" << C << "\n"
       << "R1 1 3 R=" << R1 << " T=" << T1 << "\n"
       << "L1 3 4 L=" << L << "\n"
       << "R2 4 2 R=" << R2 << " T=" << T2 << "\n";
    return os.str();
}

struct AppGParams {
    double R1 = 1.0, R2 = 2.0;
    double C = 1.0, Cp = 0.5;
    double L = 1e-3;  // stray inductance, circuit (a) only
    double T1 = 1.0, T2 = 2.0;
};

inline std::string appg_a_netlist(const AppGParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "C1 1 0 C=" << p.C << "\n"
       << "L1 1 2 L=" << p.L << "\n"
       << "R1 2 3 R=" << p.R1 << " T=" << p.T1 << "\n"
       << "C2 3 0 C=" << p.Cp << "\n"
       << "R2 3 0 R=" << p.R2 << " T=" << p.T2 << "\n";
    return os.str();
}

inline std::string appg_b_netlist(const AppGParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "C1 1 0 C=" << p.C << "\n"
       << "R1 1 2 R=" << p.R1 << " T=" << p.T1 << "\n"
       << "C2 2 0 C=" << p.Cp << "\n"
       << "R2 2 0 R=" << p.R2 << " T=" << p.T2 << "\n";
    return os.str();
}

struct RandomCircuitOptions {
    int min_nodes = 3, max_nodes = 7;
    int max_extra_edges = 5;
    bool allow_sources = true;
    bool allow_couplings = true;
    bool require_resistor = true;
    bool require_storage = true;
};

/// Random connected circuit satisfying conditions (i)/(ii) by construction:
/// a spanning tree of {V,C,R} edges plus extra {R,L,I} edges. Every CE loop
/// would need a non-tree edge (all R/L/I), and every cut-set contains at
/// least one tree edge (all V/C/R).
inline CircuitSpec random_circuit(std::mt19937_64& rng, const RandomCircuitOptions& opt = {}) {
    for (;;) {
        std::uniform_int_distribution<int> node_count(opt.min_nodes, opt.max_nodes);
        const int n = node_count(rng);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        auto logu = [&](double lo, double hi) {
            return lo * std::pow(hi / lo, unif(rng));
        };

        CircuitSpec spec;
        int counters[5] = {0, 0, 0, 0, 0};
        auto add = [&](ElementKind k, int a, int b) {
            ElementSpec e;
            e.kind = k;
            e.name = std::string(1, kind_letter(k)) + std::to_string(++counters[static_cast<int>(k)]);
            e.node_a = std::to_string(a);
            e.node_b = std::to_string(b);
            switch (k) {
                case ElementKind::resistor:
                    e.value = logu(0.2, 5.0);
                    e.temperature = 100.0 + 400.0 * unif(rng);
                    break;
                case ElementKind::capacitor:
                case ElementKind::inductor:
                    e.value = logu(0.2, 5.0);
                    break;
                case ElementKind::voltage_source:
                case ElementKind::current_source:
                    e.value = 2.0 * unif(rng) - 1.0;
                    break;
            }
            spec.elements.push_back(e);
        };

        // Random spanning tree: node i attaches to a random earlier node.
        for (int i = 1; i < n; ++i) {
            std::uniform_int_distribution<int> earlier(0, i - 1);
            int j = earlier(rng);
            double u = unif(rng);
            ElementKind k = u < 0.45 ? ElementKind::resistor
                          : u < 0.85 ? ElementKind::capacitor
                                     : (opt.allow_sources ? ElementKind::voltage_source
                                                          : ElementKind::capacitor);
            bool flip = unif(rng) < 0.5;
            add(k, flip ? j : i, flip ? i : j);
        }
        std::uniform_int_distribution<int> extra_count(0, opt.max_extra_edges);
        const int extra = extra_count(rng);
        std::uniform_int_distribution<int> node(0, n - 1);
        for (int i = 0; i < extra; ++i) {
            int a = node(rng), b = node(rng);
            if (a == b) continue;
            double u = unif(rng);
            ElementKind k = u < 0.5 ? ElementKind::resistor
                          : u < 0.85 ? ElementKind::inductor
                                     : (opt.allow_sources ? ElementKind::current_source
                                                          : ElementKind::inductor);
            add(k, a, b);
        }
        if (opt.allow_couplings && counters[static_cast<int>(ElementKind::inductor)] >= 2 &&
            unif(rng) < 0.3) {
            int nl = counters[static_cast<int>(ElementKind::inductor)];
            std::uniform_int_distribution<int> pick(1, nl);
            int ia = pick(rng), ib = pick(rng);
            if (ia != ib) {
                const auto* la = spec.find("L" + std::to_string(ia));
                const auto* lb = spec.find("L" + std::to_string(ib));
                MutualCoupling kc;
                kc.name = "K1";
                kc.inductor_a = la->name;
                kc.inductor_b = lb->name;
                kc.mutual = (2.0 * unif(rng) - 1.0) * 0.8 * std::sqrt(la->value * lb->value);
                spec.couplings.push_back(kc);
            }
        }

        int n_res = counters[static_cast<int>(ElementKind::resistor)];
        int n_sto = counters[static_cast<int>(ElementKind::capacitor)] +
                    counters[static_cast<int>(ElementKind::inductor)];
        if (opt.require_resistor && n_res == 0) continue;
        if (opt.require_storage && n_sto == 0) continue;
        try {
            validate_circuit(spec);
        } catch (const ParseError&) {
            continue;  // e.g. isolated duplicate edge made the graph degenerate
        }
        return spec;
    }
}

}  // namespace rlcsim::testing
