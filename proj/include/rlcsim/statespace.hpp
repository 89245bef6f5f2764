#pragma once

// Assembly of the dynamical core from topology and element values:
// the energy matrix H(t), drift A, source coupling B, the resistive response
// alpha, per-resistor noise vectors c_r (D_r = c_r c_r^T) and temperatures.
//
// State vector x = (q_1..q_NC, phi_1..phi_NL): capacitor charges then inductor
// fluxes, each group in netlist file order. Resistor "ports" are ordered link
// resistors first, then twig resistors (the (j_Rl, v_Rt) layout); public
// results are reported per resistor element instead, which is tree independent.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlcsim/constants.hpp"
#include "rlcsim/errors.hpp"
#include "rlcsim/netlist.hpp"
#include "rlcsim/topology.hpp"

namespace rlcsim {

struct StateSpaceModel {
    PhysicalConstants consts;
    double drive_frequency = 0.0;  // rad/s, 0 if undriven

    int n_C = 0, n_L = 0, n_R = 0, n_E = 0, n_I = 0, n_Rt = 0, n_Rl = 0;
    int n() const { return n_C + n_L; }
    int n_sources() const { return n_E + n_I; }

    // Storage element values; capacitance matrix is diagonal, the inductance
    // matrix carries K couplings off the diagonal.
    Eigen::VectorXd cap_base;
    Eigen::MatrixXd ind_base;
    std::vector<std::optional<DriveSpec>> cap_drive;  // per capacitor
    std::vector<std::optional<DriveSpec>> ind_drive;  // per inductor (diagonal)
    bool driven = false;

    // Constant structure matrices (resistances are time independent).
    Eigen::MatrixXd Mc, Ms, Md, Msd;
    Eigen::MatrixXd alpha;        // n_R x n_R resistive response
    Eigen::MatrixXd A, B;         // drift and source coupling
    Eigen::VectorXd Rdiag;        // diag of R = diag(R_l, R_t^{-1}), port order
    Eigen::MatrixXd noise_cols;   // n x n_R; column r is c_r, D_r = c_r c_r^T
    Eigen::MatrixXd diffusion;    // sum_r 2 kb T_r D_r
    Eigen::VectorXd temperatures; // per port
    bool qrr_zero = false;

    // Bookkeeping between ports/states and netlist elements.
    std::vector<int> port_element;            // port -> element index
    std::vector<int> resistor_ports;          // resistor (file order) -> port
    std::vector<std::string> resistor_names;  // file order among resistors
    std::vector<int> state_element;           // state -> element index
    std::vector<WaveformSpec> source_waveforms;  // per source, E's then I's

    Eigen::VectorXd capacitances(double t) const {
        Eigen::VectorXd c = cap_base;
        if (driven) {
            const double angle = drive_frequency * t;
            for (int i = 0; i < n_C; ++i)
                if (cap_drive[i]) c(i) = cap_drive[i]->value(angle);
        }
        return c;
    }

    Eigen::MatrixXd inductances(double t) const {
        Eigen::MatrixXd l = ind_base;
        if (driven) {
            const double angle = drive_frequency * t;
            for (int i = 0; i < n_L; ++i)
                if (ind_drive[i]) l(i, i) = ind_drive[i]->value(angle);
        }
        return l;
    }

    /// H(t) = diag(C(t), L(t))^{-1}; throws ModelError if the drive makes the
    /// storage matrices nonpositive.
    Eigen::MatrixXd hamiltonian_at(double t) const {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n(), n());
        const Eigen::VectorXd c = capacitances(t);
        for (int i = 0; i < n_C; ++i) {
            if (!(c(i) > 0.0)) throw ModelError("capacitance nonpositive at t=" + std::to_string(t));
            h(i, i) = 1.0 / c(i);
        }
        if (n_L > 0) {
            const Eigen::MatrixXd l = inductances(t);
            Eigen::LLT<Eigen::MatrixXd> llt(l);
            if (llt.info() != Eigen::Success)
                throw ModelError("inductance matrix not positive definite at t=" + std::to_string(t));
            h.bottomRightCorner(n_L, n_L) = llt.solve(Eigen::MatrixXd::Identity(n_L, n_L));
        }
        return h;
    }

    /// dH/dt, analytic from the drive harmonics.
    Eigen::MatrixXd hamiltonian_dot_at(double t) const {
        Eigen::MatrixXd hdot = Eigen::MatrixXd::Zero(n(), n());
        if (!driven) return hdot;
        const double angle = drive_frequency * t;
        const Eigen::VectorXd c = capacitances(t);
        for (int i = 0; i < n_C; ++i)
            if (cap_drive[i]) {
                const double cdot = cap_drive[i]->derivative(angle, drive_frequency);
                hdot(i, i) = -cdot / (c(i) * c(i));
            }
        if (n_L > 0) {
            Eigen::MatrixXd ldot = Eigen::MatrixXd::Zero(n_L, n_L);
            bool any = false;
            for (int i = 0; i < n_L; ++i)
                if (ind_drive[i]) {
                    ldot(i, i) = ind_drive[i]->derivative(angle, drive_frequency);
                    any = true;
                }
            if (any) {
                const Eigen::MatrixXd linv =
                    inductances(t).llt().solve(Eigen::MatrixXd::Identity(n_L, n_L));
                hdot.bottomRightCorner(n_L, n_L) = -linv * ldot * linv;
            }
        }
        return hdot;
    }

    /// Source vector s(t) = (v_E^T, j_I^T)^T.
    Eigen::VectorXd source_at(double t) const {
        Eigen::VectorXd s(n_sources());
        const double angle = drive_frequency * t;
        for (int i = 0; i < n_sources(); ++i) s(i) = source_waveforms[i].value(angle);
        return s;
    }

    bool has_sources() const {
        for (const auto& w : source_waveforms)
            if (w.dc != 0.0 || !w.harmonics.empty()) return true;
        return false;
    }

    /// Stored energy E(x,t) = x^T H(t) x / 2.
    double energy(const Eigen::VectorXd& x, double t) const {
        return 0.5 * x.dot(hamiltonian_at(t) * x);
    }

    Eigen::VectorXd c_r(int port) const { return noise_cols.col(port); }
};

/// Deterministic resistive port variables (j_Rl, v_Rt): the solution of
/// alpha^{-1} * port = -Msd*s - Md*H(t)*x.
inline Eigen::VectorXd resistor_port_solve(const StateSpaceModel& m, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& s, double t) {
    if (m.n_R == 0) return Eigen::VectorXd();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m.n_R);
    if (m.n_sources() > 0) rhs -= m.Msd * s;
    if (m.n() > 0) rhs -= m.Md * (m.hamiltonian_at(t) * x);
    return m.alpha * rhs;
}

inline Eigen::VectorXd resistor_port_solve(const StateSpaceModel& m, const Eigen::VectorXd& x,
                                           double t) {
    return resistor_port_solve(m, x, m.source_at(t), t);
}

/// Build the state-space model from a circuit and its topological analysis.
/// All structural identities (alpha symmetry, FD relation, block structure of
/// A) are verified to 1e-12 relative tolerance before returning.
inline StateSpaceModel assemble(const CircuitSpec& spec, const Topology& topo,
                                const PhysicalConstants& consts = PhysicalConstants::si()) {
    const auto& g = topo.graph;
    const auto& t = topo.tree;
    const auto& mm = topo.matrices;

    StateSpaceModel m;
    m.consts = consts;
    m.drive_frequency = spec.drive_frequency;
    m.n_E = mm.n_E;
    m.n_C = mm.n_C;
    m.n_Rt = mm.n_Rt;
    m.n_Rl = mm.n_Rl;
    m.n_L = mm.n_L;
    m.n_I = mm.n_I;
    m.n_R = mm.n_Rt + mm.n_Rl;
    m.qrr_zero = mm.qrr_zero();

    // State bookkeeping: twig capacitors then link inductors, in tree order
    // (which preserves file order within each kind).
    std::vector<int> cap_edges, ind_edges;
    for (int e : t.twigs)
        if (g.edges[e].kind == ElementKind::capacitor) cap_edges.push_back(e);
    for (int e : t.links)
        if (g.edges[e].kind == ElementKind::inductor) ind_edges.push_back(e);

    m.cap_base.resize(m.n_C);
    m.cap_drive.resize(m.n_C);
    for (int i = 0; i < m.n_C; ++i) {
        const auto& el = spec.elements[g.edges[cap_edges[i]].element_index];
        m.cap_base(i) = el.value;
        m.cap_drive[i] = el.drive;
        m.state_element.push_back(g.edges[cap_edges[i]].element_index);
    }
    m.ind_base = Eigen::MatrixXd::Zero(m.n_L, m.n_L);
    m.ind_drive.resize(m.n_L);
    std::map<std::string, int> ind_pos;
    for (int i = 0; i < m.n_L; ++i) {
        const auto& el = spec.elements[g.edges[ind_edges[i]].element_index];
        m.ind_base(i, i) = el.value;
        m.ind_drive[i] = el.drive;
        ind_pos[el.name] = i;
        m.state_element.push_back(g.edges[ind_edges[i]].element_index);
    }
    for (const auto& k : spec.couplings) {
        const int i = ind_pos.at(k.inductor_a), j = ind_pos.at(k.inductor_b);
        m.ind_base(i, j) += k.mutual;
        m.ind_base(j, i) += k.mutual;
    }
    for (int i = 0; i < m.n_C; ++i) m.driven |= m.cap_drive[i].has_value();
    for (int i = 0; i < m.n_L; ++i) m.driven |= m.ind_drive[i].has_value();

    // Resistor ports: link resistors then twig resistors.
    Eigen::VectorXd r_link(m.n_Rl), r_twig(m.n_Rt);
    {
        int il = 0, it = 0;
        for (int e : t.links)
            if (g.edges[e].kind == ElementKind::resistor) {
                const auto& el = spec.elements[g.edges[e].element_index];
                r_link(il++) = el.value;
                m.port_element.push_back(g.edges[e].element_index);
            }
        for (int e : t.twigs)
            if (g.edges[e].kind == ElementKind::resistor) {
                const auto& el = spec.elements[g.edges[e].element_index];
                r_twig(it++) = el.value;
                m.port_element.push_back(g.edges[e].element_index);
            }
    }
    m.Rdiag.resize(m.n_R);
    m.Rdiag.head(m.n_Rl) = r_link;
    for (int i = 0; i < m.n_Rt; ++i) m.Rdiag(m.n_Rl + i) = 1.0 / r_twig(i);
    m.temperatures.resize(m.n_R);
    for (int r = 0; r < m.n_R; ++r)
        m.temperatures(r) = spec.elements[m.port_element[r]].temperature;

    // Element-order view of the ports.
    for (std::size_t ei = 0; ei < spec.elements.size(); ++ei) {
        if (spec.elements[ei].kind != ElementKind::resistor) continue;
        for (int r = 0; r < m.n_R; ++r)
            if (m.port_element[r] == static_cast<int>(ei)) m.resistor_ports.push_back(r);
        m.resistor_names.push_back(spec.elements[ei].name);
    }

    const Eigen::MatrixXd Q_CL = mm.Q_CL.cast<double>(), Q_CI = mm.Q_CI.cast<double>(),
                          Q_EL = mm.Q_EL.cast<double>(), Q_CR = mm.Q_CR.cast<double>(),
                          Q_RL = mm.Q_RL.cast<double>(), Q_ER = mm.Q_ER.cast<double>(),
                          Q_RI = mm.Q_RI.cast<double>(), Q_RR = mm.Q_RR.cast<double>();

    const int n = m.n(), nR = m.n_R, nS = m.n_sources();
    m.Mc = Eigen::MatrixXd::Zero(n, n);
    m.Mc.topRightCorner(m.n_C, m.n_L) = -Q_CL;
    m.Mc.bottomLeftCorner(m.n_L, m.n_C) = Q_CL.transpose();
    m.Ms = Eigen::MatrixXd::Zero(n, nS);
    m.Ms.topRightCorner(m.n_C, m.n_I) = -Q_CI;
    m.Ms.bottomLeftCorner(m.n_L, m.n_E) = Q_EL.transpose();
    m.Md = Eigen::MatrixXd::Zero(nR, n);
    m.Md.topLeftCorner(m.n_Rl, m.n_C) = -Q_CR.transpose();
    m.Md.bottomRightCorner(m.n_Rt, m.n_L) = Q_RL;
    m.Msd = Eigen::MatrixXd::Zero(nR, nS);
    m.Msd.topLeftCorner(m.n_Rl, m.n_E) = -Q_ER.transpose();
    m.Msd.bottomRightCorner(m.n_Rt, m.n_I) = Q_RI;

    if (m.qrr_zero) {
        m.alpha = m.Rdiag.cwiseInverse().asDiagonal();
    } else {
        Eigen::MatrixXd alpha_inv(nR, nR);
        alpha_inv.setZero();
        alpha_inv.topLeftCorner(m.n_Rl, m.n_Rl) = r_link.asDiagonal();
        alpha_inv.bottomRightCorner(m.n_Rt, m.n_Rt) =
            r_twig.cwiseInverse().asDiagonal();
        alpha_inv.topRightCorner(m.n_Rl, m.n_Rt) = -Q_RR.transpose();
        alpha_inv.bottomLeftCorner(m.n_Rt, m.n_Rl) = Q_RR;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(alpha_inv);
        m.alpha = lu.solve(Eigen::MatrixXd::Identity(nR, nR));
        if (!m.alpha.allFinite()) throw ModelError("singular resistive response system");
    }

    m.A = m.Mc - m.Md.transpose() * m.alpha * m.Md;
    m.B = m.Ms - m.Md.transpose() * m.alpha * m.Msd;
    m.noise_cols = m.Md.transpose() * m.alpha * m.Rdiag.cwiseSqrt().asDiagonal();

    m.diffusion = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < nR; ++r)
        m.diffusion += 2.0 * consts.kb * m.temperatures(r) * m.noise_cols.col(r) *
                       m.noise_cols.col(r).transpose();

    // Source waveforms in port order (E twigs then I links).
    for (int e : t.twigs)
        if (g.edges[e].kind == ElementKind::voltage_source) {
            const auto& el = spec.elements[g.edges[e].element_index];
            m.source_waveforms.push_back(el.waveform.value_or(WaveformSpec{el.value, {}}));
        }
    for (int e : t.links)
        if (g.edges[e].kind == ElementKind::current_source) {
            const auto& el = spec.elements[g.edges[e].element_index];
            m.source_waveforms.push_back(el.waveform.value_or(WaveformSpec{el.value, {}}));
        }

    // Structural identities, exact up to roundoff.
    const double scale = std::max(1.0, m.alpha.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd alpha_s = 0.5 * (m.alpha + m.alpha.transpose());
    if ((m.alpha * m.Rdiag.asDiagonal() * m.alpha.transpose() - alpha_s).cwiseAbs().maxCoeff() >
        1e-12 * scale)
        throw ModelError("internal error: alpha*R*alpha^T != (alpha)_s");
    const Eigen::MatrixXd A_s = 0.5 * (m.A + m.A.transpose());
    Eigen::MatrixXd d_sum = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < nR; ++r)
        d_sum += m.noise_cols.col(r) * m.noise_cols.col(r).transpose();
    const double ascale = std::max(1.0, m.A.cwiseAbs().maxCoeff());
    if ((d_sum + A_s).cwiseAbs().maxCoeff() > 1e-12 * ascale)
        throw ModelError("internal error: fluctuation-dissipation relation violated");
    if (n > 0) {
        if ((m.A.topLeftCorner(m.n_C, m.n_C) - m.A.topLeftCorner(m.n_C, m.n_C).transpose())
                    .cwiseAbs()
                    .maxCoeff() > 1e-12 * ascale ||
            (m.A.bottomRightCorner(m.n_L, m.n_L) -
             m.A.bottomRightCorner(m.n_L, m.n_L).transpose())
                    .cwiseAbs()
                    .maxCoeff() > 1e-12 * ascale ||
            (m.A.topRightCorner(m.n_C, m.n_L) + m.A.bottomLeftCorner(m.n_L, m.n_C).transpose())
                    .cwiseAbs()
                    .maxCoeff() > 1e-12 * ascale)
            throw ModelError("internal error: A lacks the symplectic block structure");
    }

    // Fail early if a drive ever makes the storage matrices nonpositive.
    if (m.driven) {
        for (int i = 0; i < 512; ++i)
            m.hamiltonian_at(2.0 * M_PI * i / (512.0 * m.drive_frequency));
    } else if (n > 0) {
        m.hamiltonian_at(0.0);
    }
    return m;
}

inline StateSpaceModel build_model(const CircuitSpec& spec,
                                   const PhysicalConstants& consts = PhysicalConstants::si()) {
    return assemble(spec, analyze_topology(spec), consts);
}

}  // namespace rlcsim
