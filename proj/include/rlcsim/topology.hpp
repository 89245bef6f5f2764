#pragma once

// Graph-theoretic layer: circuit graph, normal tree selection, fundamental
// loop/cutset matrices and their block partition, and the topological
// condition (Q_RR = 0) under which white-noise local heat currents are finite.

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "rlcsim/errors.hpp"
#include "rlcsim/netlist.hpp"

namespace rlcsim {

struct CircuitGraph {
    struct Edge {
        int a = -1, b = -1;          // oriented a -> b (node indices)
        ElementKind kind = ElementKind::resistor;
        int element_index = -1;      // index into CircuitSpec::elements
        std::string name;
    };
    std::vector<std::string> nodes;  // index -> node id, in order of first appearance
    std::vector<Edge> edges;         // one per element, file order (K lines add none)

    int n() const { return static_cast<int>(nodes.size()); }
    int b() const { return static_cast<int>(edges.size()); }
};

/// Twig/link split of the edges with the canonical ordering
/// twigs = (E, C, R_t), links = (R_l, L, I); within a group, file order.
struct NormalTreeDecomposition {
    std::vector<int> twigs;  // edge indices, b_t = n-1 of them
    std::vector<int> links;  // edge indices, b_l = b-n+1 of them

    int b_t() const { return static_cast<int>(twigs.size()); }
    int b_l() const { return static_cast<int>(links.size()); }
};

struct LoopCutsetMatrices {
    // Canonical edge ordering for columns: twigs first, then links.
    Eigen::MatrixXi B;       // b_l x b, fundamental loops, B = [B_twig | I]
    Eigen::MatrixXi Q;       // b_t x b, fundamental cutsets, Q = [I | Q_link]
    Eigen::MatrixXi B_twig;  // b_l x b_t
    Eigen::MatrixXi Q_link;  // b_t x b_l

    // Counts of each kind inside the twig/link groups (canonical order).
    int n_E = 0, n_C = 0, n_Rt = 0;  // twigs: E, C, R_t
    int n_Rl = 0, n_L = 0, n_I = 0;  // links: R_l, L, I

    // The nine blocks of Q_link; rows (E,C,R_t) x cols (R_l,L,I).
    Eigen::MatrixXi Q_ER, Q_EL, Q_EI;
    Eigen::MatrixXi Q_CR, Q_CL, Q_CI;
    Eigen::MatrixXi Q_RR, Q_RL, Q_RI;

    bool qrr_zero() const { return Q_RR.size() == 0 || Q_RR.isZero(); }
};

inline CircuitGraph build_graph(const CircuitSpec& spec) {
    validate_circuit(spec);  // includes connectivity
    CircuitGraph g;
    std::map<std::string, int> index;
    auto node_id = [&](const std::string& n) {
        auto it = index.find(n);
        if (it != index.end()) return it->second;
        index.emplace(n, g.n());
        g.nodes.push_back(n);
        return g.n() - 1;
    };
    for (std::size_t i = 0; i < spec.elements.size(); ++i) {
        const auto& e = spec.elements[i];
        g.edges.push_back({node_id(e.node_a), node_id(e.node_b), e.kind, static_cast<int>(i), e.name});
    }
    return g;
}

namespace detail {

inline int tree_priority(ElementKind k) {
    switch (k) {
        case ElementKind::voltage_source: return 4;
        case ElementKind::capacitor: return 3;
        case ElementKind::resistor: return 2;
        case ElementKind::inductor: return 1;
        case ElementKind::current_source: return 0;
    }
    return -1;
}

}  // namespace detail

/// Maximum-priority spanning tree (Kruskal) with priorities E > C > R > L > I
/// and ties broken by element order (earlier wins); then verified to be a
/// normal tree: every E/C edge inside, every L/I edge outside.
inline NormalTreeDecomposition find_normal_tree(const CircuitGraph& g) {
    std::vector<int> order(g.b());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return detail::tree_priority(g.edges[x].kind) > detail::tree_priority(g.edges[y].kind);
    });

    rlcsim::detail::UnionFind uf(g.n());
    std::vector<char> in_tree(g.b(), 0);
    int taken = 0;
    for (int e : order) {
        if (taken == g.n() - 1) break;
        if (uf.unite(g.edges[e].a, g.edges[e].b)) {
            in_tree[e] = 1;
            ++taken;
        }
    }
    if (taken != g.n() - 1) throw ModelError("circuit graph is not connected");

    for (int e = 0; e < g.b(); ++e) {
        ElementKind k = g.edges[e].kind;
        if (!in_tree[e] && (k == ElementKind::voltage_source || k == ElementKind::capacitor))
            throw ConditionViolation(1, "edge '" + g.edges[e].name +
                                            "' lies on a loop of capacitors and voltage sources");
        if (in_tree[e] && (k == ElementKind::inductor || k == ElementKind::current_source))
            throw ConditionViolation(2, "edge '" + g.edges[e].name +
                                            "' lies on a cut-set of inductors and current sources");
    }

    NormalTreeDecomposition t;
    auto collect = [&](bool tree_side, std::initializer_list<ElementKind> kinds, std::vector<int>& out) {
        for (ElementKind k : kinds)
            for (int e = 0; e < g.b(); ++e)
                if (static_cast<bool>(in_tree[e]) == tree_side && g.edges[e].kind == k) out.push_back(e);
    };
    collect(true, {ElementKind::voltage_source, ElementKind::capacitor, ElementKind::resistor}, t.twigs);
    collect(false, {ElementKind::resistor, ElementKind::inductor, ElementKind::current_source}, t.links);
    return t;
}

/// Fundamental loops (add one link, loop oriented as the link) and fundamental
/// cut-sets (remove one twig, cut-set oriented as the twig). Exact integer
/// arithmetic; the identities B = [B_twig | I], Q = [I | Q_link],
/// B*Q^T = 0 and B_twig = -Q_link^T hold by construction.
inline LoopCutsetMatrices build_matrices(const CircuitGraph& g, const NormalTreeDecomposition& t) {
    const int bt = t.b_t(), bl = t.b_l(), b = g.b();

    // Tree adjacency: node -> (neighbour, twig position, +1 if edge leaves node).
    struct Arc { int to, twig, sign; };
    std::vector<std::vector<Arc>> adj(g.n());
    for (int i = 0; i < bt; ++i) {
        const auto& e = g.edges[t.twigs[i]];
        adj[e.a].push_back({e.b, i, +1});
        adj[e.b].push_back({e.a, i, -1});
    }

    // B_twig row per link: walk the tree path head -> tail; a twig traversed
    // along its own orientation closes the loop in the link's direction.
    Eigen::MatrixXi B_twig = Eigen::MatrixXi::Zero(bl, bt);
    std::vector<int> prev_node(g.n()), prev_arc_twig(g.n()), prev_arc_sign(g.n());
    for (int l = 0; l < bl; ++l) {
        const auto& e = g.edges[t.links[l]];
        std::fill(prev_node.begin(), prev_node.end(), -2);
        std::queue<int> q;
        q.push(e.b);
        prev_node[e.b] = -1;
        while (!q.empty() && prev_node[e.a] == -2) {
            int u = q.front();
            q.pop();
            for (const auto& arc : adj[u])
                if (prev_node[arc.to] == -2) {
                    prev_node[arc.to] = u;
                    prev_arc_twig[arc.to] = arc.twig;
                    prev_arc_sign[arc.to] = arc.sign;
                    q.push(arc.to);
                }
        }
        for (int v = e.a; prev_node[v] != -1; v = prev_node[v])
            B_twig(l, prev_arc_twig[v]) = prev_arc_sign[v];
    }

    LoopCutsetMatrices m;
    m.B_twig = B_twig;
    m.Q_link = -B_twig.transpose();
    m.B.resize(bl, b);
    m.B << B_twig, Eigen::MatrixXi::Identity(bl, bl);
    m.Q.resize(bt, b);
    m.Q << Eigen::MatrixXi::Identity(bt, bt), m.Q_link;

    auto count = [&](const std::vector<int>& edges, ElementKind k) {
        return static_cast<int>(std::count_if(edges.begin(), edges.end(),
                                              [&](int e) { return g.edges[e].kind == k; }));
    };
    m.n_E = count(t.twigs, ElementKind::voltage_source);
    m.n_C = count(t.twigs, ElementKind::capacitor);
    m.n_Rt = count(t.twigs, ElementKind::resistor);
    m.n_Rl = count(t.links, ElementKind::resistor);
    m.n_L = count(t.links, ElementKind::inductor);
    m.n_I = count(t.links, ElementKind::current_source);

    auto blk = [&](int r0, int nr, int c0, int nc) { return m.Q_link.block(r0, c0, nr, nc); };
    const int rE = 0, rC = m.n_E, rR = m.n_E + m.n_C;
    const int cR = 0, cL = m.n_Rl, cI = m.n_Rl + m.n_L;
    m.Q_ER = blk(rE, m.n_E, cR, m.n_Rl);
    m.Q_EL = blk(rE, m.n_E, cL, m.n_L);
    m.Q_EI = blk(rE, m.n_E, cI, m.n_I);
    m.Q_CR = blk(rC, m.n_C, cR, m.n_Rl);
    m.Q_CL = blk(rC, m.n_C, cL, m.n_L);
    m.Q_CI = blk(rC, m.n_C, cI, m.n_I);
    m.Q_RR = blk(rR, m.n_Rt, cR, m.n_Rl);
    m.Q_RL = blk(rR, m.n_Rt, cL, m.n_L);
    m.Q_RI = blk(rR, m.n_Rt, cI, m.n_I);
    return m;
}

/// Result of the thermodynamic-consistency check. The two branches are
/// equivalent; both are reported so tests can assert (a) <=> (b).
struct ThermoConsistencyReport {
    bool qrr_zero = false;             // (a) Q_RR = 0 for the chosen normal tree
    bool contraction_acyclic = false;  // (b) tree-free condition
    std::string detail;
    bool consistent() const { return qrr_zero; }
};

/// Tree-free algorithm: delete I and L edges, contract every connected
/// component of E/C edges to a single node (dropping edges internal to a
/// component), and test the remaining all-R multigraph for acyclicity.
inline ThermoConsistencyReport check_thermo_consistency(const CircuitGraph& g,
                                                        const LoopCutsetMatrices& m) {
    ThermoConsistencyReport rep;
    rep.qrr_zero = m.qrr_zero();

    detail::UnionFind comp(g.n());
    for (const auto& e : g.edges)
        if (e.kind == ElementKind::voltage_source || e.kind == ElementKind::capacitor)
            comp.unite(e.a, e.b);

    detail::UnionFind rnet(g.n());
    rep.contraction_acyclic = true;
    for (const auto& e : g.edges) {
        if (e.kind != ElementKind::resistor) continue;
        int a = comp.find(e.a), b = comp.find(e.b);
        if (a == b) continue;  // internal to an E/C component: removed by the contraction
        if (!rnet.unite(a, b)) {
            rep.contraction_acyclic = false;
            rep.detail = "resistor '" + e.name + "' closes an R-cycle after contraction;"
                         " local white-noise heat currents would diverge";
            break;
        }
    }
    if (rep.qrr_zero != rep.contraction_acyclic)
        throw ModelError("internal error: Q_RR test and contraction test disagree");
    if (rep.consistent()) rep.detail = "Q_RR = 0; local heat currents are well defined";
    return rep;
}

/// Convenience bundle: the full topological analysis of a circuit.
struct Topology {
    CircuitGraph graph;
    NormalTreeDecomposition tree;
    LoopCutsetMatrices matrices;
    ThermoConsistencyReport thermo;
};

inline Topology analyze_topology(const CircuitSpec& spec) {
    Topology t;
    t.graph = build_graph(spec);
    t.tree = find_normal_tree(t.graph);
    t.matrices = build_matrices(t.graph, t.tree);
    t.thermo = check_thermo_consistency(t.graph, t.matrices);
    return t;
}

}  // namespace rlcsim
