#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ercav/errors.hpp"

namespace ercav {

struct Populations {
    double n1; // pumped ground Zeeman level
    double n2; // target ground Zeeman level
    double ne; // optical excited state
};

/// Three-level Zeeman pumping rate model:
///   dne/dt = R (n1 - ne) - gamma ne
///   dn2/dt = gamma (1 - p) ne - W (n2 - n1),  W = 1/(2 T_Z)
///   dn1/dt = -(dne/dt + dn2/dt)
/// Spin relaxation drives the ground populations toward equality (their
/// difference decays at 1/T_Z); p is the probability of decaying back to the
/// pumped level.
struct PumpModel {
    double gamma_opt;  // excited-state total decay rate, Hz
    double t_zeeman;   // Zeeman population lifetime, s
    double p_return;   // branching back to the pumped level, [0, 1]
    double pump_rate = 0.0; // stimulated rate on |1> <-> |e>, Hz
    Populations populations{0.5, 0.5, 0.0};

    double spin_relaxation_rate() const { return 1.0 / (2.0 * t_zeeman); }

    void validate() const {
        if (!(gamma_opt > 0) || !(t_zeeman > 0))
            throw std::domain_error("decay rate and Zeeman lifetime must be positive");
        if (!(p_return >= 0) || !(p_return <= 1))
            throw std::domain_error("return branching must lie in [0, 1]");
        if (!(pump_rate >= 0))
            throw std::domain_error("pump rate must be nonnegative");
        const double sum = populations.n1 + populations.n2 + populations.ne;
        if (std::abs(sum - 1.0) > 1e-9 || populations.n1 < 0 || populations.n2 < 0 ||
            populations.ne < 0)
            throw std::domain_error("populations must be nonnegative and sum to 1");
    }
};

/// R/gamma used to realize the strong-pump limit with the ordinary
/// steady-state path; the error against the symbolic limit is below 1e-5.
inline constexpr double kStrongPumpRatio = 1e6;

/// Exact algebraic steady state. The initialization efficiency is n2.
inline Populations steady_state(const PumpModel& m) {
    m.validate();
    const double w = m.spin_relaxation_rate();
    const double r = m.pump_rate > 0 ? m.pump_rate / (m.pump_rate + m.gamma_opt) : 0.0;
    const double x = r * m.gamma_opt * (1.0 - m.p_return) / w;
    const double n1 = 1.0 / (2.0 + x + r);
    return {n1, n1 * (1.0 + x), n1 * r};
}

struct PumpTrajectory {
    std::vector<double> time;
    std::vector<Populations> states;
};

namespace detail {

inline Populations pump_derivs(const PumpModel& m, const Populations& s) {
    const double w = m.spin_relaxation_rate();
    const double dne = m.pump_rate * (s.n1 - s.ne) - m.gamma_opt * s.ne;
    const double dn2 = m.gamma_opt * (1.0 - m.p_return) * s.ne - w * (s.n2 - s.n1);
    return {-(dne + dn2), dn2, dne};
}

}  // namespace detail

/// Classic fixed-step RK4 on the rate equations, recording every step.
/// Requires dt < min(1/R, 1/gamma, T_Z)/10.
inline PumpTrajectory integrate(const PumpModel& m, double duration, double dt) {
    m.validate();
    if (!(duration >= 0))
        throw std::domain_error("duration must be nonnegative");
    if (!(dt > 0))
        throw config_error("step size must be positive");
    double shortest = std::min(1.0 / m.gamma_opt, m.t_zeeman);
    if (m.pump_rate > 0)
        shortest = std::min(shortest, 1.0 / m.pump_rate);
    if (!(dt < shortest / 10.0))
        throw config_error("unstable step size: dt must be below a tenth of the fastest time scale");

    PumpTrajectory out;
    Populations s = m.populations;
    double t = 0.0;
    out.time.push_back(t);
    out.states.push_back(s);
    auto step = [&](double h) {
        const Populations k1 = detail::pump_derivs(m, s);
        const Populations s2{s.n1 + 0.5 * h * k1.n1, s.n2 + 0.5 * h * k1.n2,
                             s.ne + 0.5 * h * k1.ne};
        const Populations k2 = detail::pump_derivs(m, s2);
        const Populations s3{s.n1 + 0.5 * h * k2.n1, s.n2 + 0.5 * h * k2.n2,
                             s.ne + 0.5 * h * k2.ne};
        const Populations k3 = detail::pump_derivs(m, s3);
        const Populations s4{s.n1 + h * k3.n1, s.n2 + h * k3.n2, s.ne + h * k3.ne};
        const Populations k4 = detail::pump_derivs(m, s4);
        s.n1 += h / 6.0 * (k1.n1 + 2.0 * k2.n1 + 2.0 * k3.n1 + k4.n1);
        s.n2 += h / 6.0 * (k1.n2 + 2.0 * k2.n2 + 2.0 * k3.n2 + k4.n2);
        s.ne += h / 6.0 * (k1.ne + 2.0 * k2.ne + 2.0 * k3.ne + k4.ne);
    };
    while (t + dt <= duration * (1.0 + 1e-12)) {
        step(dt);
        t += dt;
        out.time.push_back(t);
        out.states.push_back(s);
    }
    const double rest = duration - t;
    if (rest > dt * 1e-9) {
        step(rest);
        out.time.push_back(duration);
        out.states.push_back(s);
    }
    return out;
}

/// Solves the strong-pump steady-state efficiency for the return branching by
/// bisection (eta is monotone decreasing in p). Tolerance 1e-9 on p.
inline double calibrate_return_branching(double eta_target, double gamma_opt, double t_zeeman) {
    PumpModel m{};
    m.gamma_opt = gamma_opt;
    m.t_zeeman = t_zeeman;
    m.pump_rate = kStrongPumpRatio * gamma_opt;
    auto eta = [&](double p) {
        m.p_return = p;
        return steady_state(m).n2;
    };
    const double eta_hi = eta(0.0);
    const double eta_lo = eta(1.0);
    if (!(eta_target >= eta_lo - 1e-12) || !(eta_target <= eta_hi + 1e-12))
        throw std::domain_error("efficiency target " + std::to_string(eta_target) +
                                " is outside the achievable range [" + std::to_string(eta_lo) +
                                ", " + std::to_string(eta_hi) + "]");
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (eta(mid) > eta_target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Strong-pump initialization efficiency as the optical decay rate is scaled
/// by each reduction factor (>= 1); monotone nondecreasing in the factor.
inline std::vector<double> efficiency_vs_purcell(const PumpModel& model,
                                                 std::span<const double> reduction_factors) {
    model.validate();
    std::vector<double> etas;
    etas.reserve(reduction_factors.size());
    for (double k : reduction_factors) {
        if (!(k >= 1.0))
            throw std::domain_error("reduction factors must be >= 1");
        PumpModel m = model;
        m.gamma_opt = k * model.gamma_opt;
        m.pump_rate = kStrongPumpRatio * m.gamma_opt;
        etas.push_back(steady_state(m).n2);
    }
    return etas;
}

}  // namespace ercav
