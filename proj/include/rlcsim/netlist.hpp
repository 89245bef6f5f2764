#pragma once

// Textual circuit description: grammar, parser and canonical serializer.
//
// Netlist grammar (one element per line):
//   # comment                         -- full-line comments, blank lines ignored
//   .drive wd=<float>                 -- global driving frequency [rad/s]
//   <NAME> <node> <node> <ATTRS>      -- NAME's first letter in {R,C,L,V,I}
//   K <name> <L1> <L2> M=<float>      -- mutual inductance between two L elements
// Attributes:
//   R=/C=/L=/V=/I=<float>   element value (SI units), required, matching the kind
//   T=<float>               temperature [K], resistors only, required
//   A<k>=<float> P<k>=<float>  harmonic k of a parametric drive (C/L) or of a
//                              source waveform (V/I); P defaults to 0
//   Adc=<float>              dc override for V/I waveforms
// Values are plain decimals or scientific notation; no unit suffixes.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rlcsim/errors.hpp"

namespace rlcsim {

enum class ElementKind { resistor, capacitor, inductor, voltage_source, current_source };

inline char kind_letter(ElementKind k) {
    switch (k) {
        case ElementKind::resistor: return 'R';
        case ElementKind::capacitor: return 'C';
        case ElementKind::inductor: return 'L';
        case ElementKind::voltage_source: return 'V';
        case ElementKind::current_source: return 'I';
    }
    return '?';
}

struct Harmonic {
    int k = 1;
    double amplitude = 0.0;
    double phase = 0.0;  // radians
    bool operator==(const Harmonic&) const = default;
};

/// Periodic modulation of a storage element value:
///   value(t) = base + sum_k amplitude_k * cos(k*wd*t + phase_k)
struct DriveSpec {
    double base = 0.0;
    std::vector<Harmonic> harmonics;

    double value(double angle) const {
        double v = base;
        for (const auto& h : harmonics) v += h.amplitude * std::cos(h.k * angle + h.phase);
        return v;
    }
    /// d(value)/dt given the drive frequency wd, with angle = wd*t.
    double derivative(double angle, double wd) const {
        double v = 0.0;
        for (const auto& h : harmonics) v -= h.amplitude * h.k * wd * std::sin(h.k * angle + h.phase);
        return v;
    }
    double min_over_period(int samples = 4096) const {
        double m = value(0.0);
        for (int i = 1; i < samples; ++i)
            m = std::min(m, value(2.0 * M_PI * i / samples));
        return m;
    }
    bool operator==(const DriveSpec&) const = default;
};

/// Source waveform: s(t) = dc + sum_k amplitude_k * cos(k*wd*t + phase_k).
struct WaveformSpec {
    double dc = 0.0;
    std::vector<Harmonic> harmonics;

    double value(double angle) const {
        double v = dc;
        for (const auto& h : harmonics) v += h.amplitude * std::cos(h.k * angle + h.phase);
        return v;
    }
    bool operator==(const WaveformSpec&) const = default;
};

struct ElementSpec {
    std::string name;
    ElementKind kind = ElementKind::resistor;
    std::string node_a, node_b;          // edge oriented node_a -> node_b
    double value = 0.0;                  // ohm / farad / henry / volt / ampere
    double temperature = 0.0;            // kelvin, resistors only
    std::optional<DriveSpec> drive;      // C and L only
    std::optional<WaveformSpec> waveform;  // V and I only
    bool operator==(const ElementSpec&) const = default;
};

/// K line: mutual inductance M between two named inductors.
struct MutualCoupling {
    std::string name;
    std::string inductor_a, inductor_b;
    double mutual = 0.0;  // henry
    bool operator==(const MutualCoupling&) const = default;
};

struct CircuitSpec {
    std::vector<ElementSpec> elements;   // file order; seeds all tie-breaking
    std::vector<MutualCoupling> couplings;
    double drive_frequency = 0.0;        // rad/s; 0 means no .drive directive

    bool has_drive_frequency() const { return drive_frequency > 0.0; }
    bool any_harmonics() const {
        for (const auto& e : elements) {
            if (e.drive && !e.drive->harmonics.empty()) return true;
            if (e.waveform && !e.waveform->harmonics.empty()) return true;
        }
        return false;
    }
    const ElementSpec* find(std::string_view name) const {
        for (const auto& e : elements)
            if (e.name == name) return &e;
        return nullptr;
    }
    bool operator==(const CircuitSpec&) const = default;
};

namespace detail {

inline std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline bool parse_double(std::string_view s, double& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

// Union-find over node indices, used for the connectivity check.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

}  // namespace detail

/// Whole-circuit validation shared by parse_netlist and programmatic
/// construction. Throws ParseError (no source location) on the first
/// violated invariant.
inline void validate_circuit(const CircuitSpec& spec) {
    if (spec.elements.empty()) throw ParseError("netlist contains no elements");

    std::set<std::string> names;
    std::map<std::string, int> node_index;
    auto node_id = [&](const std::string& n) {
        auto [it, _] = node_index.try_emplace(n, static_cast<int>(node_index.size()));
        return it->second;
    };

    for (const auto& e : spec.elements) {
        if (!names.insert(e.name).second) throw ParseError("duplicate element name '" + e.name + "'");
        if (e.node_a == e.node_b)
            throw ParseError("element '" + e.name + "' connects node '" + e.node_a + "' to itself");
        node_id(e.node_a);
        node_id(e.node_b);
        switch (e.kind) {
            case ElementKind::resistor:
                if (!(e.value > 0.0)) throw ParseError("resistor '" + e.name + "' must have R > 0");
                if (!(e.temperature > 0.0))
                    throw ParseError("resistor '" + e.name + "' requires a temperature T > 0");
                break;
            case ElementKind::capacitor:
            case ElementKind::inductor:
                if (!(e.value > 0.0))
                    throw ParseError("element '" + e.name + "' must have a positive value");
                break;
            default:
                break;
        }
        if (e.drive && !e.drive->harmonics.empty()) {
            if (!spec.has_drive_frequency())
                throw ParseError("element '" + e.name +
                                 "' is driven but no '.drive wd=...' directive is present");
            if (e.drive->min_over_period() <= 0.0)
                throw ParseError("drive on '" + e.name + "' makes its value nonpositive during the cycle");
        }
        if (e.waveform && !e.waveform->harmonics.empty() && !spec.has_drive_frequency())
            throw ParseError("source '" + e.name +
                             "' has harmonics but no '.drive wd=...' directive is present");
    }

    for (const auto& k : spec.couplings) {
        if (!names.insert(k.name).second) throw ParseError("duplicate element name '" + k.name + "'");
        for (const std::string* ref : {&k.inductor_a, &k.inductor_b}) {
            const ElementSpec* el = spec.find(*ref);
            if (!el || el->kind != ElementKind::inductor)
                throw ParseError("coupling '" + k.name + "' references unknown inductor '" + *ref + "'");
        }
        if (k.inductor_a == k.inductor_b)
            throw ParseError("coupling '" + k.name + "' must reference two distinct inductors");
    }
    // Positive definiteness of the full inductance matrix (including drives)
    // is re-checked with the drive extrema at assembly; here we bound the
    // static couplings: |M| < sqrt(La*Lb).
    for (const auto& k : spec.couplings) {
        const double la = spec.find(k.inductor_a)->value;
        const double lb = spec.find(k.inductor_b)->value;
        if (!(std::abs(k.mutual) < std::sqrt(la * lb)))
            throw ParseError("coupling '" + k.name + "' violates |M| < sqrt(L1*L2)");
    }

    detail::UnionFind uf(static_cast<int>(node_index.size()));
    int components = static_cast<int>(node_index.size());
    for (const auto& e : spec.elements)
        if (uf.unite(node_index[e.node_a], node_index[e.node_b])) --components;
    if (components != 1) throw ParseError("circuit graph is not connected");
}

/// Parse a netlist in the grammar above into a validated CircuitSpec.
inline CircuitSpec parse_netlist(std::string_view text) {
    CircuitSpec spec;
    bool drive_seen = false;

    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++lineno;

        // Tokenize; remember 1-based column of each token for diagnostics.
        std::vector<std::pair<std::string_view, int>> tok;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i > start) tok.emplace_back(line.substr(start, i - start), static_cast<int>(start) + 1);
        }
        if (tok.empty() || tok[0].first.front() == '#') continue;

        auto err = [&](const std::string& msg, int col) -> ParseError { return {msg, lineno, col}; };
        auto need_value = [&](std::string_view s, int col) {
            double v;
            if (!detail::parse_double(s, v)) throw err("expected a number, got '" + std::string(s) + "'", col);
            return v;
        };

        if (tok[0].first == ".drive") {
            if (drive_seen) throw err("duplicate .drive directive", tok[0].second);
            if (tok.size() != 2 || !tok[1].first.starts_with("wd="))
                throw err("usage: .drive wd=<rad/s>", tok[0].second);
            spec.drive_frequency = need_value(tok[1].first.substr(3), tok[1].second);
            if (!(spec.drive_frequency > 0.0)) throw err("driving frequency must be > 0", tok[1].second);
            drive_seen = true;
            continue;
        }
        if (tok[0].first.front() == '.') throw err("unknown directive", tok[0].second);

        if (tok[0].first == "K") {
            if (tok.size() != 5) throw err("usage: K <name> <L1> <L2> M=<henry>", tok[0].second);
            MutualCoupling k;
            k.name = std::string(tok[1].first);
            k.inductor_a = std::string(tok[2].first);
            k.inductor_b = std::string(tok[3].first);
            if (!tok[4].first.starts_with("M=")) throw err("K line requires M=<henry>", tok[4].second);
            k.mutual = need_value(tok[4].first.substr(2), tok[4].second);
            spec.couplings.push_back(std::move(k));
            continue;
        }

        if (tok.size() < 4) throw err("element line needs <NAME> <node> <node> <ATTRS>", tok[0].second);
        ElementSpec e;
        e.name = std::string(tok[0].first);
        switch (std::toupper(static_cast<unsigned char>(e.name.front()))) {
            case 'R': e.kind = ElementKind::resistor; break;
            case 'C': e.kind = ElementKind::capacitor; break;
            case 'L': e.kind = ElementKind::inductor; break;
            case 'V': e.kind = ElementKind::voltage_source; break;
            case 'I': e.kind = ElementKind::current_source; break;
            default:
                throw err("element name must start with one of R,C,L,V,I", tok[0].second);
        }
        e.node_a = std::string(tok[1].first);
        e.node_b = std::string(tok[2].first);
        if (e.node_a.find('=') != std::string::npos || e.node_b.find('=') != std::string::npos)
            throw err("missing node names before attributes", tok[1].second);

        bool have_value = false;
        bool have_temperature = false;
        std::optional<double> adc;
        std::map<int, Harmonic> harmonics;  // by k, amplitude/phase filled independently
        std::set<std::string> seen_keys;

        for (std::size_t t = 3; t < tok.size(); ++t) {
            auto [attr, col] = tok[t];
            auto eq = attr.find('=');
            if (eq == std::string_view::npos) throw err("expected key=value attribute", col);
            std::string key(attr.substr(0, eq));
            double v = need_value(attr.substr(eq + 1), col);
            if (!seen_keys.insert(key).second) throw err("duplicate attribute '" + key + "'", col);

            if (key.size() == 1 && key[0] == kind_letter(e.kind)) {
                e.value = v;
                have_value = true;
            } else if (key == "T") {
                if (e.kind != ElementKind::resistor)
                    throw err("temperature is only valid on resistors", col);
                e.temperature = v;
                have_temperature = true;
            } else if (key == "Adc") {
                if (e.kind != ElementKind::voltage_source && e.kind != ElementKind::current_source)
                    throw err("Adc is only valid on V/I sources", col);
                adc = v;
            } else if ((key[0] == 'A' || key[0] == 'P') && key.size() > 1) {
                int k;
                auto [p, ec] = std::from_chars(key.data() + 1, key.data() + key.size(), k);
                if (ec != std::errc() || p != key.data() + key.size() || k < 1)
                    throw err("unknown attribute '" + key + "'", col);
                if (e.kind == ElementKind::resistor)
                    throw err("harmonics are not valid on resistors", col);
                auto& h = harmonics[k];
                h.k = k;
                (key[0] == 'A' ? h.amplitude : h.phase) = v;
            } else {
                throw err("unknown attribute '" + key + "'", col);
            }
        }
        if (!have_value)
            throw err(std::string("missing ") + kind_letter(e.kind) + "=<value> attribute", tok[0].second);
        if (e.kind == ElementKind::resistor && !have_temperature)
            throw err("resistor '" + e.name + "' requires T=<kelvin>", tok[0].second);

        if (!harmonics.empty()) {
            std::vector<Harmonic> hs;
            for (auto& [k, h] : harmonics) hs.push_back(h);
            if (e.kind == ElementKind::capacitor || e.kind == ElementKind::inductor) {
                e.drive = DriveSpec{e.value, std::move(hs)};
            } else {
                e.waveform = WaveformSpec{adc.value_or(e.value), std::move(hs)};
            }
        } else if (adc) {
            e.waveform = WaveformSpec{*adc, {}};
        }
        spec.elements.push_back(std::move(e));
    }

    validate_circuit(spec);
    return spec;
}

/// Canonical text form; parse_netlist(serialize_netlist(s)) == s structurally.
inline std::string serialize_netlist(const CircuitSpec& spec) {
    validate_circuit(spec);
    std::string out;
    if (spec.has_drive_frequency())
        out += ".drive wd=" + detail::fmt_g17(spec.drive_frequency) + "\n";
    for (const auto& e : spec.elements) {
        out += e.name + " " + e.node_a + " " + e.node_b + " ";
        out += std::string(1, kind_letter(e.kind)) + "=" + detail::fmt_g17(e.value);
        if (e.kind == ElementKind::resistor) out += " T=" + detail::fmt_g17(e.temperature);
        const std::vector<Harmonic>* hs = nullptr;
        if (e.drive) hs = &e.drive->harmonics;
        if (e.waveform) {
            hs = &e.waveform->harmonics;
            if (e.waveform->dc != e.value) out += " Adc=" + detail::fmt_g17(e.waveform->dc);
        }
        if (hs)
            for (const auto& h : *hs) {
                out += " A" + std::to_string(h.k) + "=" + detail::fmt_g17(h.amplitude);
                out += " P" + std::to_string(h.k) + "=" + detail::fmt_g17(h.phase);
            }
        out += "\n";
    }
    for (const auto& k : spec.couplings)
        out += "K " + k.name + " " + k.inductor_a + " " + k.inductor_b + " M=" +
               detail::fmt_g17(k.mutual) + "\n";
    return out;
}

}  // namespace rlcsim
