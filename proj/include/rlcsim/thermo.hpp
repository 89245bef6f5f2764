#pragma once

// Thermodynamic bookkeeping on top of the dynamics: per-resistor heat
// currents, total heat rate, source/driving work rates, energy rate, entropy
// production and its adiabatic/non-adiabatic decomposition in Gaussian closed
// form. Sign convention: Qdot_r > 0 means energy flows into resistor r, so
// dE/dt = -Qdot + Wdot_s + Wdot_d and "cooling resistor 1" reads Qdot_1 < 0.

#include <Eigen/Dense>
#include <optional>

#include "rlcsim/dynamics.hpp"
#include "rlcsim/statespace.hpp"

namespace rlcsim {

namespace detail {

/// d(sigma)/dt from the covariance ODE at the given state.
inline Eigen::MatrixXd sigma_dot(const StateSpaceModel& m, const Eigen::MatrixXd& sigma,
                                 double t) {
    const Eigen::MatrixXd ah = m.A * m.hamiltonian_at(t);
    return ah * sigma + sigma * ah.transpose() + m.diffusion;
}

/// Per-port deterministic Joule rates <j_r><v_r> = Rdiag_r * port_r^2.
inline Eigen::VectorXd port_joule(const StateSpaceModel& m, const Eigen::VectorXd& mean,
                                  const Eigen::VectorXd& s, double t) {
    if (m.n_R == 0) return Eigen::VectorXd();
    const Eigen::VectorXd port = resistor_port_solve(m, mean, s, t);
    return m.Rdiag.cwiseProduct(port.cwiseProduct(port));
}

inline Eigen::VectorXd ports_to_elements(const StateSpaceModel& m, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(m.n_R);
    for (int i = 0; i < m.n_R; ++i) out(i) = v(m.resistor_ports[i]);
    return out;
}

}  // namespace detail

/// Local heat currents <Qdot_r> = <j_r><v_r> + Tr[(H sigma H - k_b T_r H) D_r],
/// reported per resistor in netlist order. Requires Q_RR = 0.
inline Eigen::VectorXd heat_current_classical(const StateSpaceModel& m,
                                              const Eigen::VectorXd& mean,
                                              const Eigen::MatrixXd& sigma, double t) {
    if (!m.qrr_zero)
        throw ModelError(
            "local heat is ill defined (Q_RR != 0); see check_thermo_consistency");
    const Eigen::MatrixXd h = m.hamiltonian_at(t);
    Eigen::VectorXd q = detail::port_joule(m, mean, m.source_at(t), t);
    const Eigen::MatrixXd hsh = h * sigma * h;
    for (int r = 0; r < m.n_R; ++r) {
        const Eigen::VectorXd& c = m.noise_cols.col(r);
        q(r) += c.dot(hsh * c) - m.consts.kb * m.temperatures(r) * c.dot(h * c);
    }
    return detail::ports_to_elements(m, q);
}

/// Total heat rate <Qdot> = Qdot(<x>,t) - Tr[H dsigma/dt]/2. Well defined for
/// any topology, including Q_RR != 0.
inline double total_heat_rate(const StateSpaceModel& m, const Eigen::VectorXd& mean,
                              const Eigen::MatrixXd& sigma, double t) {
    const Eigen::VectorXd jv = detail::port_joule(m, mean, m.source_at(t), t);
    double q = jv.sum();
    if (m.n() > 0)
        q -= 0.5 * (m.hamiltonian_at(t) * detail::sigma_dot(m, sigma, t)).trace();
    return q;
}

struct WorkRates {
    double sources = 0.0;  // Wdot_s
    double driving = 0.0;  // Wdot_d
};

/// Work rates: Wdot_s from the sources (deterministic in the means) and
/// Wdot_d = dE/dt|_explicit = <x>^T Hdot <x>/2 + Tr[Hdot sigma]/2.
inline WorkRates work_rates(const StateSpaceModel& m, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& sigma, double t) {
    WorkRates w;
    if (m.driven && m.n() > 0) {
        const Eigen::MatrixXd hdot = m.hamiltonian_dot_at(t);
        w.driving = 0.5 * mean.dot(hdot * mean) + 0.5 * (hdot * sigma).trace();
    }
    if (m.n_sources() > 0) {
        const Eigen::VectorXd s = m.source_at(t);
        const Eigen::VectorXd grad = m.n() > 0
                                         ? Eigen::VectorXd(m.hamiltonian_at(t) * mean)
                                         : Eigen::VectorXd();
        const Eigen::MatrixXd alpha_s = 0.5 * (m.alpha + m.alpha.transpose());
        Eigen::VectorXd u = m.Msd * s;
        if (m.n() > 0) u += 2.0 * m.Md * grad;
        w.sources = u.dot(alpha_s * (m.Msd * s));
        if (m.n() > 0) w.sources += grad.dot(m.B * s);
    }
    return w;
}

/// Mean stored energy <E> = E(<x>,t) + Tr[H sigma]/2.
inline double mean_energy(const StateSpaceModel& m, const Eigen::VectorXd& mean,
                          const Eigen::MatrixXd& sigma, double t) {
    if (m.n() == 0) return 0.0;
    const Eigen::MatrixXd h = m.hamiltonian_at(t);
    return 0.5 * mean.dot(h * mean) + 0.5 * (h * sigma).trace();
}

/// d<E>/dt computed analytically from the mean/covariance ODE right-hand
/// sides (not by finite differences).
inline double mean_energy_rate(const StateSpaceModel& m, const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& sigma, double t) {
    if (m.n() == 0) return 0.0;
    const Eigen::MatrixXd h = m.hamiltonian_at(t);
    Eigen::VectorXd xdot = m.A * (h * mean);
    if (m.n_sources() > 0) xdot += m.B * m.source_at(t);
    double e = mean.dot(h * xdot);
    e += 0.5 * (h * detail::sigma_dot(m, sigma, t)).trace();
    if (m.driven) {
        const Eigen::MatrixXd hdot = m.hamiltonian_dot_at(t);
        e += 0.5 * mean.dot(hdot * mean) + 0.5 * (hdot * sigma).trace();
    }
    return e;
}

/// Gaussian entropy rate dS/dt = k_b Tr[sigma^{-1} dsigma/dt]/2.
inline double entropy_rate(const StateSpaceModel& m, const Eigen::MatrixXd& sigma, double t) {
    if (m.n() == 0) return 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw ModelError("entropy rate needs a positive definite covariance");
    return 0.5 * m.consts.kb * llt.solve(detail::sigma_dot(m, sigma, t)).trace();
}

/// Temperature of the i-th resistor in netlist order.
inline double resistor_temperature(const StateSpaceModel& m, int resistor_index) {
    return m.temperatures(m.resistor_ports[resistor_index]);
}

/// Total entropy production rate Sigma_dot = dS/dt + sum_r <Qdot_r>/T_r >= 0.
inline double entropy_production(const StateSpaceModel& m, const Eigen::VectorXd& mean,
                                 const Eigen::MatrixXd& sigma, double t) {
    const Eigen::VectorXd q = heat_current_classical(m, mean, sigma, t);
    double s = entropy_rate(m, sigma, t);
    for (int i = 0; i < m.n_R; ++i)
        s += q(i) / resistor_temperature(m, i);
    return s;
}

struct EntropyDecomposition {
    bool defined = false;   // frozen stationary state exists and s(t) = 0
    double adiabatic = 0.0;          // >= 0
    double nonadiabatic = 0.0;       // >= 0
    double circulation = 0.0;        // the indefinite underdamped term
    double total() const { return adiabatic + nonadiabatic + circulation; }
};

/// Adiabatic/non-adiabatic split of Sigma_dot for Gaussian states, relative
/// to the stationary state of the frozen H(t). All phase-space integrals
/// reduce to traces over sigma, sigma_st, H and D_r. The circulation term is
/// the exact remainder Sigma_dot - Sigma_ad - Sigma_nad; it vanishes in
/// isothermal conditions and for circuits with no capacitors or no inductors.
inline EntropyDecomposition entropy_decomposition(const StateSpaceModel& m,
                                                  const Eigen::VectorXd& mean,
                                                  const Eigen::MatrixXd& sigma, double t) {
    EntropyDecomposition out;
    if (m.n() == 0) return out;
    if (m.n_sources() > 0 && m.source_at(t).cwiseAbs().maxCoeff() > 0.0) return out;

    const Eigen::MatrixXd h = m.hamiltonian_at(t);
    const Eigen::MatrixXd ah = m.A * h;
    if (!is_hurwitz(ah)) return out;  // frozen stationary state undefined at t
    Eigen::MatrixXd sigma_st;
    try {
        sigma_st = lyapunov_vectorized(ah, m.diffusion);
    } catch (const NumericError&) {
        return out;
    }

    Eigen::LLT<Eigen::MatrixXd> llt(sigma), llt_st(sigma_st);
    if (llt.info() != Eigen::Success || llt_st.info() != Eigen::Success) return out;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m.n(), m.n());
    const Eigen::MatrixXd sigma_inv = llt.solve(id);
    const Eigen::MatrixXd sigma_st_inv = llt_st.solve(id);

    const double kb = m.consts.kb;
    double cross = 0.0;
    for (int r = 0; r < m.n_R; ++r) {
        const double tr = m.temperatures(r);
        const Eigen::VectorXd& c = m.noise_cols.col(r);
        // j_r^st(x) = G_r x ; Delta j_r(x) = K_r x + d_r (both symmetric G,K).
        const Eigen::MatrixXd g = h - kb * tr * sigma_st_inv;
        const Eigen::MatrixXd k = kb * tr * (sigma_st_inv - sigma_inv);
        const Eigen::VectorXd d = kb * tr * (sigma_inv * mean);
        const Eigen::VectorXd gc = g * c;
        const Eigen::VectorXd kc = k * c;
        const double mg = c.dot(g * mean);             // c^T G mu
        const double mk = c.dot(k * mean) + c.dot(d);  // c^T (K mu + d)
        out.adiabatic += (gc.dot(sigma * gc) + mg * mg) / tr;
        out.nonadiabatic += (kc.dot(sigma * kc) + mk * mk) / tr;
        cross += (gc.dot(sigma * kc) + mg * mk) / tr;
    }
    out.circulation = 2.0 * cross;
    out.defined = true;
    return out;
}

struct ThermoSample {
    double t = 0.0;
    Eigen::VectorXd qdot;        // watt, per resistor (netlist order)
    double wdot_s = 0.0;         // watt
    double wdot_d = 0.0;         // watt
    double edot = 0.0;           // watt
    double energy = 0.0;         // joule
    double sigma_dot = 0.0;      // watt/kelvin
    EntropyDecomposition decomposition;
};

/// One full bookkeeping record at (mean, sigma, t); sigma must be positive
/// definite for the entropy pieces.
inline ThermoSample thermo_sample(const StateSpaceModel& m, const Eigen::VectorXd& mean,
                                  const Eigen::MatrixXd& sigma, double t) {
    ThermoSample s;
    s.t = t;
    s.qdot = heat_current_classical(m, mean, sigma, t);
    const WorkRates w = work_rates(m, mean, sigma, t);
    s.wdot_s = w.sources;
    s.wdot_d = w.driving;
    s.edot = mean_energy_rate(m, mean, sigma, t);
    s.energy = mean_energy(m, mean, sigma, t);
    s.sigma_dot = entropy_production(m, mean, sigma, t);
    s.decomposition = entropy_decomposition(m, mean, sigma, t);
    return s;
}

/// Single-RC relaxation form of the heat current,
/// [<q^2>/(2C) - k_b T/2] / (R C / 2); independent cross-check for the
/// two-RC circuit.
inline double parallel_rc_heat_rate(double q_second_moment, double cap, double res,
                                    double temperature, double kb) {
    return (q_second_moment / (2.0 * cap) - 0.5 * kb * temperature) / (0.5 * res * cap);
}

}  // namespace rlcsim
