#pragma once

// Time evolution: deterministic means (RK4), covariance matrix ODE (RK4 with
// re-symmetrization), stationary Lyapunov solve, Euler-Maruyama trajectory
// sampling with per-resistor heat counters, and Floquet stability analysis.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cstdint>
#include <vector>

#include "rlcsim/linalg.hpp"
#include "rlcsim/statespace.hpp"

namespace rlcsim {

/// Square root of the smallest positive representable growth before the
/// integrators declare a blow-up.
inline constexpr double kBlowupNorm = 1e120;

/// Characteristic timescales / 200: resolves every declared rate, oscillation
/// period and the driving period.
inline double default_timestep(const StateSpaceModel& m) {
    double tmin = std::numeric_limits<double>::infinity();
    if (m.n() > 0) {
        Eigen::MatrixXd ah = m.A * m.hamiltonian_at(0.0);
        Eigen::EigenSolver<Eigen::MatrixXd> es(ah, false);
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            const auto ev = es.eigenvalues()(i);
            if (std::abs(ev.real()) > 1e-300) tmin = std::min(tmin, 1.0 / std::abs(ev.real()));
            if (std::abs(ev.imag()) > 1e-300) tmin = std::min(tmin, 2.0 * M_PI / std::abs(ev.imag()));
        }
    }
    if (m.drive_frequency > 0.0) tmin = std::min(tmin, 2.0 * M_PI / m.drive_frequency);
    if (!std::isfinite(tmin)) tmin = 1.0;
    return tmin / 200.0;
}

struct MeanTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
};

/// Classical RK4 fixed-step integration of d<x>/dt = A H(t) <x> + B s(t).
inline MeanTrajectory integrate_mean(const StateSpaceModel& m, const Eigen::VectorXd& x0,
                                     double t0, double t1, double dt, int store_every = 1) {
    if (!(dt > 0.0)) throw NumericError("dt must be positive");
    auto rhs = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd f = m.A * (m.hamiltonian_at(t) * x);
        if (m.n_sources() > 0) f += m.B * m.source_at(t);
        return f;
    };
    MeanTrajectory out;
    Eigen::VectorXd x = x0;
    const long nsteps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-12));
    out.times.push_back(t0);
    out.states.push_back(x);
    for (long i = 0; i < nsteps; ++i) {
        const double t = t0 + i * dt;
        const double h = std::min(dt, t1 - t);
        const Eigen::VectorXd k1 = rhs(t, x);
        const Eigen::VectorXd k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
        const Eigen::VectorXd k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
        const Eigen::VectorXd k4 = rhs(t + h, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite() || x.norm() > kBlowupNorm)
            throw NumericError("mean trajectory diverged at t=" + std::to_string(t + h));
        if ((i + 1) % store_every == 0 || i + 1 == nsteps) {
            out.times.push_back(t + h);
            out.states.push_back(x);
        }
    }
    return out;
}

struct CovarianceSolution {
    enum class Kind { transient, stationary, floquet };
    Kind kind = Kind::transient;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> mean;    // empty if not co-integrated
    std::vector<Eigen::MatrixXd> sigma;
};

/// RK4 on dsigma/dt = A H(t) sigma + sigma H(t) A^T + sum_r 2 k_b T_r D_r,
/// re-symmetrizing after every step. Independent of the sources by
/// construction.
inline CovarianceSolution integrate_covariance(const StateSpaceModel& m,
                                               const Eigen::MatrixXd& sigma0, double t0,
                                               double t1, double dt, int store_every = 1) {
    if (!(dt > 0.0)) throw NumericError("dt must be positive");
    if (sigma0.rows() != m.n() || sigma0.cols() != m.n())
        throw ModelError("sigma0 has wrong dimensions");
    auto rhs = [&](double t, const Eigen::MatrixXd& s) -> Eigen::MatrixXd {
        const Eigen::MatrixXd ah = m.A * m.hamiltonian_at(t);
        return ah * s + s * ah.transpose() + m.diffusion;
    };
    CovarianceSolution out;
    Eigen::MatrixXd s = 0.5 * (sigma0 + sigma0.transpose());
    const long nsteps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-12));
    out.times.push_back(t0);
    out.sigma.push_back(s);
    for (long i = 0; i < nsteps; ++i) {
        const double t = t0 + i * dt;
        const double h = std::min(dt, t1 - t);
        const Eigen::MatrixXd k1 = rhs(t, s);
        const Eigen::MatrixXd k2 = rhs(t + 0.5 * h, s + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = rhs(t + 0.5 * h, s + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = rhs(t + h, s + h * k3);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s = 0.5 * (s + s.transpose());
        if (!s.allFinite() || s.norm() > kBlowupNorm)
            throw NumericError("covariance diverged at t=" + std::to_string(t + h) +
                               " (parametric resonance?)");
        if ((i + 1) % store_every == 0 || i + 1 == nsteps) {
            out.times.push_back(t + h);
            out.sigma.push_back(s);
        }
    }
    return out;
}

/// Stationary covariance from the algebraic Lyapunov equation
/// 0 = A H sigma + sigma H A^T + sum_r 2 k_b T_r D_r (undriven circuits),
/// solved by dense vectorization. Throws NoStationaryState if A H is not
/// Hurwitz; the residual is checked to 1e-10 relative.
inline Eigen::MatrixXd solve_stationary_lyapunov(const StateSpaceModel& m) {
    if (m.n() == 0) return Eigen::MatrixXd();
    const Eigen::MatrixXd ah = m.A * m.hamiltonian_at(0.0);
    if (!is_hurwitz(ah)) throw NoStationaryState("A*H has a non-negative eigenvalue real part");
    Eigen::MatrixXd sigma = lyapunov_vectorized(ah, m.diffusion);
    const double dscale = m.diffusion.norm();
    if (dscale > 0.0) {
        const double res = (ah * sigma + sigma * ah.transpose() + m.diffusion).norm() / dscale;
        if (res > 1e-10) throw NumericError("Lyapunov residual too large: " + std::to_string(res));
    }
    return sigma;
}

struct FloquetStability {
    bool stable = false;
    Eigen::VectorXcd multipliers;
};

/// Monodromy matrix of dy/dt = A H(t) y over one driving period, by RK4;
/// stable iff every Floquet multiplier has modulus < 1 - 1e-9.
inline FloquetStability floquet_stability(const StateSpaceModel& m, double wd) {
    if (!(wd > 0.0)) throw ModelError("floquet_stability requires a positive frequency");
    const double period = 2.0 * M_PI / wd;
    const double dt0 = default_timestep(m);
    const long nsteps = std::max<long>(256, static_cast<long>(std::ceil(period / dt0)));
    const double h = period / static_cast<double>(nsteps);
    Eigen::MatrixXd y = Eigen::MatrixXd::Identity(m.n(), m.n());
    auto rhs = [&](double t, const Eigen::MatrixXd& v) -> Eigen::MatrixXd {
        return m.A * (m.hamiltonian_at(t) * v);
    };
    for (long i = 0; i < nsteps; ++i) {
        const double t = i * h;
        const Eigen::MatrixXd k1 = rhs(t, y);
        const Eigen::MatrixXd k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = rhs(t + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    FloquetStability out;
    Eigen::EigenSolver<Eigen::MatrixXd> es(y, false);
    out.multipliers = es.eigenvalues();
    out.stable = true;
    for (int i = 0; i < out.multipliers.size(); ++i)
        if (std::abs(out.multipliers(i)) >= 1.0 - 1e-9) out.stable = false;
    return out;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Deterministic per-trajectory Gaussian stream: an xoshiro-free Box-Muller
/// over splitmix64 output, bit-reproducible across platforms.
class GaussianStream {
  public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed;
        (void)splitmix64(s);
        s ^= 0x5851F42D4C957F2Dull * (stream + 1);
        state_ = splitmix64(s) ^ (splitmix64(s) << 1);
        if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;
    }
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0,1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    double uniform() { return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53; }
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace detail

struct LangevinOptions {
    double burnin_fraction = 0.25;  // start of the estimator window
    int store_points = 128;         // stored ensemble-mean samples
};

struct TrajectoryEnsemble {
    std::uint64_t seed = 0;
    int n_traj = 0;
    double dt = 0.0;

    // Ensemble-mean curves on a coarse stored grid.
    std::vector<double> times;
    std::vector<Eigen::VectorXd> mean_x;
    std::vector<Eigen::MatrixXd> mean_xx;
    std::vector<Eigen::VectorXd> mean_heat;  // cumulative, per resistor (element order)

    // Stationary-window estimators (time averages over [t_burn, t1]).
    Eigen::MatrixXd second_moment, second_moment_stderr;  // <x x^T>
    Eigen::VectorXd qdot, qdot_stderr;                    // per resistor (element order)
    std::vector<std::string> resistor_names;
};

/// Euler-Maruyama sampling of the coupled Ito equations for x and the heats
/// Q_r, with the Wiener increments shared between the x-update and the
/// Q_r-update within a step. Refuses circuits with Q_RR != 0.
inline TrajectoryEnsemble sample_langevin(const StateSpaceModel& m, const Eigen::VectorXd& x0,
                                          double t0, double t1, double dt, int n_traj,
                                          std::uint64_t seed, const LangevinOptions& opt = {}) {
    if (!m.qrr_zero)
        throw ModelError(
            "local heat is ill defined (Q_RR != 0); see check_thermo_consistency");
    if (!(dt > 0.0) || n_traj < 1) throw NumericError("invalid dt or n_traj");
    const int n = m.n(), nR = m.n_R;
    const long nsteps = static_cast<long>(std::llround((t1 - t0) / dt));
    if (nsteps < 4) throw NumericError("time span too short for the given dt");

    const double kb = m.consts.kb;
    // Noise injection: x += noise_scale * xi * sqrt(dt); heat couplings below.
    Eigen::MatrixXd noise_scale(n, nR);
    Eigen::VectorXd sqrt2kT(nR), inv_sqrtR(nR), invR(nR), ito_const(nR);
    for (int r = 0; r < nR; ++r) {
        sqrt2kT(r) = std::sqrt(2.0 * kb * m.temperatures(r));
        noise_scale.col(r) = sqrt2kT(r) * m.noise_cols.col(r);
        inv_sqrtR(r) = 1.0 / std::sqrt(m.Rdiag(r));
        invR(r) = 1.0 / m.Rdiag(r);
    }

    const bool driven = m.driven;
    const bool sources = m.n_sources() > 0;
    const Eigen::MatrixXd h0 = m.hamiltonian_at(t0);
    const Eigen::MatrixXd ah0 = m.A * h0;
    const Eigen::MatrixXd mdh0 = m.Md * h0;
    for (int r = 0; r < nR; ++r)
        ito_const(r) = kb * m.temperatures(r) * m.noise_cols.col(r).dot(h0 * m.noise_cols.col(r));

    const long burn_steps = static_cast<long>(nsteps * opt.burnin_fraction);
    const double t_meas = (nsteps - burn_steps) * dt;
    const int n_store = std::min<long>(opt.store_points, nsteps);
    const long store_stride = std::max<long>(1, nsteps / n_store);

    std::vector<long> store_steps;
    for (long s = store_stride; s <= nsteps; s += store_stride) store_steps.push_back(s);

    TrajectoryEnsemble out;
    out.seed = seed;
    out.n_traj = n_traj;
    out.dt = dt;
    out.resistor_names = m.resistor_names;
    const std::size_t ns = store_steps.size();
    out.times.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) out.times[i] = t0 + store_steps[i] * dt;
    out.mean_x.assign(ns, Eigen::VectorXd::Zero(n));
    out.mean_xx.assign(ns, Eigen::MatrixXd::Zero(n, n));
    out.mean_heat.assign(ns, Eigen::VectorXd::Zero(nR));

    Eigen::MatrixXd sm_sum = Eigen::MatrixXd::Zero(n, n), sm_sq = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd qd_sum = Eigen::VectorXd::Zero(nR), qd_sq = Eigen::VectorXd::Zero(nR);

    Eigen::VectorXd x(n), q(nR), w(nR), xi(nR), qburn(nR), drift(n);
    Eigen::MatrixXd xx_acc(n, n);

    for (int traj = 0; traj < n_traj; ++traj) {
        detail::GaussianStream rng(seed, static_cast<std::uint64_t>(traj));
        x = x0;
        q.setZero();
        qburn.setZero();
        xx_acc.setZero();
        const double sqdt = std::sqrt(dt);
        std::size_t next_store = 0;

        for (long step = 0; step < nsteps; ++step) {
            const double t = t0 + step * dt;
            Eigen::VectorXd s;
            if (sources) s = m.source_at(t);

            if (driven) {
                const Eigen::MatrixXd h = m.hamiltonian_at(t);
                drift.noalias() = m.A * (h * x);
                w.noalias() = m.Md * (h * x);
                for (int r = 0; r < nR; ++r)
                    ito_const(r) =
                        kb * m.temperatures(r) * m.noise_cols.col(r).dot(h * m.noise_cols.col(r));
            } else {
                drift.noalias() = ah0 * x;
                w.noalias() = mdh0 * x;
            }
            if (sources) {
                drift.noalias() += m.B * s;
                w.noalias() += m.Msd * s;
            }
            for (int r = 0; r < nR; ++r) xi(r) = rng.normal();

            // Heat increments before updating x (Ito: evaluate at the left point).
            for (int r = 0; r < nR; ++r) {
                const double coupling = w(r) * inv_sqrtR(r);
                q(r) += (w(r) * w(r) * invR(r) - ito_const(r)) * dt -
                        sqrt2kT(r) * coupling * xi(r) * sqdt;
            }
            x.noalias() += drift * dt + noise_scale * (xi * sqdt);
            if (step + 1 == burn_steps) qburn = q;

            if (step >= burn_steps) xx_acc.noalias() += x * x.transpose();

            if (next_store < ns && step + 1 == store_steps[next_store]) {
                out.mean_x[next_store] += x;
                out.mean_xx[next_store] += x * x.transpose();
                out.mean_heat[next_store] += q;
                ++next_store;
            }
            if (!x.allFinite())
                throw NumericError("Langevin trajectory diverged at t=" + std::to_string(t));
        }

        const Eigen::MatrixXd sm = xx_acc / static_cast<double>(nsteps - burn_steps);
        const Eigen::VectorXd qr = (q - qburn) / t_meas;
        sm_sum += sm;
        sm_sq += sm.cwiseProduct(sm);
        qd_sum += qr;
        qd_sq += qr.cwiseProduct(qr);
    }

    const double inv_n = 1.0 / n_traj;
    for (std::size_t i = 0; i < ns; ++i) {
        out.mean_x[i] *= inv_n;
        out.mean_xx[i] *= inv_n;
        out.mean_heat[i] *= inv_n;
    }
    auto stderr_of = [&](const auto& sum, const auto& sq) {
        auto mean = (sum * inv_n).eval();
        auto var = ((sq * inv_n) - mean.cwiseProduct(mean)).cwiseMax(0.0).eval();
        return (var / std::max(1, n_traj - 1)).cwiseSqrt().eval();
    };
    out.second_moment = sm_sum * inv_n;
    out.second_moment_stderr = stderr_of(sm_sum, sm_sq);

    // Report heats in resistor element order.
    out.qdot.resize(nR);
    out.qdot_stderr.resize(nR);
    const Eigen::VectorXd qd_mean = qd_sum * inv_n;
    const Eigen::VectorXd qd_se = stderr_of(qd_sum, qd_sq);
    for (int i = 0; i < nR; ++i) {
        out.qdot(i) = qd_mean(m.resistor_ports[i]);
        out.qdot_stderr(i) = qd_se(m.resistor_ports[i]);
    }
    // Heat curves are also re-ordered to element order.
    for (std::size_t i = 0; i < ns; ++i) {
        Eigen::VectorXd h(nR);
        for (int r = 0; r < nR; ++r) h(r) = out.mean_heat[i](m.resistor_ports[r]);
        out.mean_heat[i] = h;
    }
    return out;
}

}  // namespace rlcsim
