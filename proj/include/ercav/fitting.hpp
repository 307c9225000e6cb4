#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ercav/ensemble.hpp"

namespace ercav {

/// Frequency-sampled transmission measurement.
struct Spectrum {
    std::vector<double> nu;           // Hz, strictly ascending
    std::vector<double> transmission; // >= 0
    std::vector<double> sigma;        // optional per-point uncertainty (empty = none)

    void validate() const {
        if (nu.size() != transmission.size())
            throw std::domain_error("frequency and transmission arrays differ in length");
        if (!sigma.empty() && sigma.size() != nu.size())
            throw std::domain_error("sigma array length mismatch");
        if (nu.size() < 5)
            throw std::domain_error("a spectrum needs at least 5 points to fit");
        for (std::size_t i = 0; i < nu.size(); ++i) {
            if (i > 0 && !(nu[i] > nu[i - 1]))
                throw std::domain_error("frequencies must be strictly ascending");
            if (!(transmission[i] >= 0))
                throw std::domain_error("transmission must be nonnegative");
            if (!sigma.empty() && !(sigma[i] > 0))
                throw std::domain_error("sigma values must be positive");
        }
    }
};

struct FitResult {
    std::vector<std::string> param_names;
    std::vector<double> params;
    std::vector<double> param_stderr;
    double rss = 0.0;
    int n_iter = 0;
    bool converged = false;
    std::vector<std::string> warnings;
    std::vector<double> rss_trace; // rss after each accepted step, nonincreasing

    double param(std::string_view name) const { return params[find(name)]; }
    double stderr_of(std::string_view name) const { return param_stderr[find(name)]; }

private:
    std::size_t find(std::string_view name) const {
        for (std::size_t i = 0; i < param_names.size(); ++i)
            if (param_names[i] == name)
                return i;
        throw std::domain_error("no fit parameter named '" + std::string(name) + "'");
    }
};

using ModelFunc = std::function<double(double, std::span<const double>)>;

struct FitSetup {
    std::vector<std::string> param_names; // optional, defaults to p0, p1, ...
    std::vector<double> init;
    std::vector<double> lower; // optional bounds
    std::vector<double> upper;
    std::vector<std::uint8_t> fixed; // optional mask; 1 = frozen at init
};

struct NllsOptions {
    int max_iter = 500;
    double rel_rss_tol = 1e-10; // relative rss decrease per accepted step
    double grad_tol = 1e-8;     // max-norm of the weighted gradient
    double step_tol = 1e-12;    // relative step size that counts as stationary
    double lambda_init = 1e-3;  // damping: x10 on reject, /10 on accept
    double lambda_max = 1e12;
};

namespace detail {

// Gaussian elimination with partial pivoting; returns false when singular.
inline bool solve_linear(std::vector<double> a, std::vector<double> b, std::size_t k,
                         std::vector<double>& out) {
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < k; ++row)
            if (std::abs(a[row * k + col]) > std::abs(a[pivot * k + col]))
                pivot = row;
        const double pv = a[pivot * k + col];
        if (!std::isfinite(pv) || std::abs(pv) < 1e-300)
            return false;
        if (pivot != col) {
            for (std::size_t c = col; c < k; ++c)
                std::swap(a[col * k + c], a[pivot * k + c]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t row = col + 1; row < k; ++row) {
            const double factor = a[row * k + col] / a[col * k + col];
            for (std::size_t c = col; c < k; ++c)
                a[row * k + c] -= factor * a[col * k + c];
            b[row] -= factor * b[col];
        }
    }
    out.assign(k, 0.0);
    for (std::size_t row = k; row-- > 0;) {
        double v = b[row];
        for (std::size_t c = row + 1; c < k; ++c)
            v -= a[row * k + c] * out[c];
        out[row] = v / a[row * k + row];
        if (!std::isfinite(out[row]))
            return false;
    }
    return true;
}

inline bool invert_spd(const std::vector<double>& a, std::size_t k, std::vector<double>& inv) {
    inv.assign(k * k, 0.0);
    for (std::size_t col = 0; col < k; ++col) {
        std::vector<double> e(k, 0.0);
        e[col] = 1.0;
        std::vector<double> x;
        if (!solve_linear(a, e, k, x))
            return false;
        for (std::size_t row = 0; row < k; ++row)
            inv[row * k + col] = x[row];
    }
    return true;
}

}  // namespace detail

/// Damped (Levenberg-Marquardt) weighted least squares with box bounds and a
/// freeze mask. Deterministic; never throws on numerical breakdown -- a
/// singular step escalates the damping and, if nothing improves, the result
/// comes back with converged = false.
inline FitResult nlls_fit(const ModelFunc& model, std::span<const double> x,
                          std::span<const double> y, std::span<const double> sigma,
                          FitSetup setup, const NllsOptions& opts = {}) {
    const std::size_t m = x.size();
    const std::size_t k = setup.init.size();
    if (y.size() != m)
        throw std::domain_error("x and y differ in length");
    if (!sigma.empty() && sigma.size() != m)
        throw std::domain_error("sigma length mismatch");
    if (k == 0)
        throw std::domain_error("no parameters to fit");
    if (!setup.lower.empty() && setup.lower.size() != k)
        throw std::domain_error("lower bounds length mismatch");
    if (!setup.upper.empty() && setup.upper.size() != k)
        throw std::domain_error("upper bounds length mismatch");
    if (!setup.fixed.empty() && setup.fixed.size() != k)
        throw std::domain_error("fixed mask length mismatch");
    if (setup.param_names.empty()) {
        for (std::size_t j = 0; j < k; ++j)
            setup.param_names.push_back("p" + std::to_string(j));
    }

    auto lower_of = [&](std::size_t j) {
        return setup.lower.empty() ? -std::numeric_limits<double>::infinity() : setup.lower[j];
    };
    auto upper_of = [&](std::size_t j) {
        return setup.upper.empty() ? std::numeric_limits<double>::infinity() : setup.upper[j];
    };
    for (std::size_t j = 0; j < k; ++j)
        if (setup.init[j] < lower_of(j) || setup.init[j] > upper_of(j))
            throw std::domain_error("initial guess violates the bounds");

    std::vector<std::size_t> free_idx;
    for (std::size_t j = 0; j < k; ++j)
        if (setup.fixed.empty() || !setup.fixed[j])
            free_idx.push_back(j);
    const std::size_t kf = free_idx.size();

    std::vector<double> weight(m, 1.0);
    for (std::size_t i = 0; i < m && !sigma.empty(); ++i) {
        if (!(sigma[i] > 0))
            throw std::domain_error("sigma values must be positive");
        weight[i] = 1.0 / sigma[i];
    }

    std::vector<double> p = setup.init;
    auto residuals = [&](const std::vector<double>& params, std::vector<double>& r) {
        r.resize(m);
        double rss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            r[i] = (y[i] - model(x[i], params)) * weight[i];
            rss += r[i] * r[i];
        }
        return rss;
    };

    FitResult result;
    result.param_names = setup.param_names;
    std::vector<double> r;
    double rss = residuals(p, r);
    result.rss_trace.push_back(rss);

    if (kf == 0) {
        result.params = p;
        result.param_stderr.assign(k, 0.0);
        result.rss = rss;
        result.converged = true;
        return result;
    }

    // J_ij = d r_i / d p_j by central differences over the free parameters.
    std::vector<double> jac(m * kf);
    auto jacobian = [&]() {
        std::vector<double> pj = p;
        for (std::size_t jj = 0; jj < kf; ++jj) {
            const std::size_t j = free_idx[jj];
            const double h = p[j] != 0.0 ? 1e-6 * std::abs(p[j]) : 1e-6;
            pj[j] = p[j] + h;
            for (std::size_t i = 0; i < m; ++i)
                jac[i * kf + jj] = model(x[i], pj);
            pj[j] = p[j] - h;
            for (std::size_t i = 0; i < m; ++i) {
                const double fm = model(x[i], pj);
                jac[i * kf + jj] = -weight[i] * (jac[i * kf + jj] - fm) / (2.0 * h);
            }
            pj[j] = p[j];
        }
    };

    double lambda = opts.lambda_init;
    const double tiny = std::numeric_limits<double>::min();
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        jacobian();
        std::vector<double> g(kf, 0.0);
        std::vector<double> a(kf * kf, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t jj = 0; jj < kf; ++jj) {
                g[jj] += jac[i * kf + jj] * r[i];
                for (std::size_t ll = jj; ll < kf; ++ll)
                    a[jj * kf + ll] += jac[i * kf + jj] * jac[i * kf + ll];
            }
        }
        for (std::size_t jj = 0; jj < kf; ++jj)
            for (std::size_t ll = 0; ll < jj; ++ll)
                a[jj * kf + ll] = a[ll * kf + jj];

        double gmax = 0.0;
        for (double v : g)
            gmax = std::max(gmax, std::abs(v));
        if (gmax < opts.grad_tol) {
            result.converged = true;
            break;
        }

        bool moved = false;
        while (lambda <= opts.lambda_max) {
            std::vector<double> damped = a;
            for (std::size_t jj = 0; jj < kf; ++jj)
                damped[jj * kf + jj] += lambda * std::max(a[jj * kf + jj], tiny);
            std::vector<double> neg_g(kf);
            for (std::size_t jj = 0; jj < kf; ++jj)
                neg_g[jj] = -g[jj];
            std::vector<double> delta;
            if (detail::solve_linear(damped, neg_g, kf, delta)) {
                // stationary to working precision when even the proposed step
                // cannot move the parameters
                bool small = true;
                for (std::size_t jj = 0; jj < kf && small; ++jj)
                    small = std::abs(delta[jj]) <=
                            opts.step_tol * (std::abs(p[free_idx[jj]]) + opts.step_tol);
                if (small) {
                    result.converged = true;
                    break;
                }
                std::vector<double> trial = p;
                for (std::size_t jj = 0; jj < kf; ++jj) {
                    const std::size_t j = free_idx[jj];
                    trial[j] = std::clamp(trial[j] + delta[jj], lower_of(j), upper_of(j));
                }
                std::vector<double> r_trial;
                const double rss_trial = residuals(trial, r_trial);
                if (std::isfinite(rss_trial) && rss_trial < rss) {
                    const double drop = (rss - rss_trial) / std::max(rss, tiny);
                    p = std::move(trial);
                    r = std::move(r_trial);
                    rss = rss_trial;
                    result.rss_trace.push_back(rss);
                    result.n_iter = iter + 1;
                    lambda = std::max(lambda * 0.1, 1e-15);
                    moved = true;
                    if (drop < opts.rel_rss_tol)
                        result.converged = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!moved || result.converged)
            break;
    }

    result.params = p;
    result.rss = rss;

    // Standard errors from (J^T J)^-1 at the solution; scaled by the reduced
    // rss when no absolute uncertainties were given.
    jacobian();
    std::vector<double> a(kf * kf, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t jj = 0; jj < kf; ++jj)
            for (std::size_t ll = jj; ll < kf; ++ll)
                a[jj * kf + ll] += jac[i * kf + jj] * jac[i * kf + ll];
    for (std::size_t jj = 0; jj < kf; ++jj)
        for (std::size_t ll = 0; ll < jj; ++ll)
            a[jj * kf + ll] = a[ll * kf + jj];
    result.param_stderr.assign(k, 0.0);
    std::vector<double> cov;
    if (detail::invert_spd(a, kf, cov)) {
        const double scale =
            sigma.empty() ? rss / static_cast<double>(std::max<std::size_t>(m - kf, 1)) : 1.0;
        for (std::size_t jj = 0; jj < kf; ++jj)
            result.param_stderr[free_idx[jj]] =
                std::sqrt(std::max(cov[jj * kf + jj], 0.0) * scale);
    } else {
        result.warnings.push_back("covariance singular; standard errors unavailable");
    }
    return result;
}

/// Lorentzian transmission fit with parameters {nu0, fwhm, amplitude,
/// baseline}; initialization from the peak position and half-maximum width.
/// The quality factor is nu0 / fwhm (see lorentzian_q).
inline FitResult fit_lorentzian(const Spectrum& spec, const NllsOptions& opts = {}) {
    spec.validate();
    const auto& nu = spec.nu;
    const auto& tr = spec.transmission;
    const std::size_t m = nu.size();

    std::size_t imax = 0;
    double tmin = tr[0], tmax = tr[0];
    for (std::size_t i = 0; i < m; ++i) {
        if (tr[i] > tmax) {
            tmax = tr[i];
            imax = i;
        }
        tmin = std::min(tmin, tr[i]);
    }
    const double baseline0 = tmin;
    const double amplitude0 = tmax - tmin;
    const double half = baseline0 + 0.5 * amplitude0;
    double left = nu.front(), right = nu.back();
    for (std::size_t i = imax; i-- > 0;) {
        if (tr[i] < half) {
            const double frac = (half - tr[i]) / (tr[i + 1] - tr[i]);
            left = nu[i] + frac * (nu[i + 1] - nu[i]);
            break;
        }
    }
    for (std::size_t i = imax + 1; i < m; ++i) {
        if (tr[i] < half) {
            const double frac = (tr[i - 1] - half) / (tr[i - 1] - tr[i]);
            right = nu[i - 1] + frac * (nu[i] - nu[i - 1]);
            break;
        }
    }
    double fwhm0 = right - left;
    if (!(fwhm0 > 0))
        fwhm0 = (nu.back() - nu.front()) / 4.0;

    const ModelFunc model = [](double v, std::span<const double> p) {
        const double half_w = p[1] / 2.0;
        const double d = v - p[0];
        return p[3] + p[2] * half_w * half_w / (d * d + half_w * half_w);
    };

    FitSetup setup;
    setup.param_names = {"nu0", "fwhm", "amplitude", "baseline"};
    setup.init = {nu[imax], fwhm0, amplitude0, baseline0};
    setup.lower = {nu.front(), (nu[1] - nu[0]) * 1e-3, -std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
    setup.upper = {nu.back(), (nu.back() - nu.front()) * 100.0,
                   std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};
    FitResult result = nlls_fit(model, nu, tr, spec.sigma, std::move(setup), opts);

    const double amp = result.param("amplitude");
    const double amp_err = result.stderr_of("amplitude");
    if (!(amp > 0.0) || amp < 2.0 * amp_err) {
        result.converged = false;
        result.warnings.push_back("no identifiable peak: amplitude consistent with zero");
    }
    return result;
}

inline double lorentzian_q(const FitResult& fit) {
    return fit.param("nu0") / std::abs(fit.param("fwhm"));
}

/// Multi-exponential decay fit, counts(t) = sum_i A_i exp(-t/tau_i) + background,
/// with Poisson weights sqrt(max(counts, 1)). One or two components; tau1 (the
/// slow component) can be frozen, as can the background. Initialization is a
/// log-linear fit on the tail for the slow component and on the early residual
/// for the fast one.
inline FitResult fit_decay(const DecayTrace& trace, int n_components,
                           std::optional<double> fixed_tau1 = std::nullopt,
                           bool freeze_background = false, const NllsOptions& opts = {}) {
    trace.validate();
    if (n_components != 1 && n_components != 2)
        throw std::domain_error("n_components must be 1 or 2");
    if (fixed_tau1 && !(*fixed_tau1 > 0))
        throw std::domain_error("fixed tau1 must be positive");
    const std::size_t m = trace.counts.size();
    if (m < 10)
        throw std::domain_error("decay fit needs at least 10 bins");

    std::vector<double> t(m), y(m), sig(m);
    for (std::size_t i = 0; i < m; ++i) {
        t[i] = trace.t0 + (static_cast<double>(i) + 0.5) * trace.bin_width;
        y[i] = trace.counts[i];
        sig[i] = std::sqrt(std::max(y[i], 1.0));
    }
    const double span_t = t.back() - t.front();

    double bg0 = 0.0;
    if (!freeze_background) {
        const std::size_t ntail = std::max<std::size_t>(3, m / 20);
        for (std::size_t i = m - ntail; i < m; ++i)
            bg0 += y[i];
        bg0 /= static_cast<double>(ntail);
    }

    // Log-linear estimate of one exponential over [begin, end).
    auto log_linear = [&](std::size_t begin, std::size_t end, const std::vector<double>& values,
                          double floor, double& amp, double& tau) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t count = 0;
        for (std::size_t i = begin; i < end; ++i) {
            if (!(values[i] > floor))
                continue;
            const double ly = std::log(values[i]);
            sx += t[i];
            sy += ly;
            sxx += t[i] * t[i];
            sxy += t[i] * ly;
            ++count;
        }
        if (count < 3)
            return false;
        const double denom = static_cast<double>(count) * sxx - sx * sx;
        if (denom == 0.0)
            return false;
        const double slope = (static_cast<double>(count) * sxy - sx * sy) / denom;
        const double intercept = (sy - slope * sx) / static_cast<double>(count);
        if (!(slope < 0))
            return false;
        tau = -1.0 / slope;
        amp = std::exp(intercept);
        return true;
    };

    std::vector<double> net(m);
    for (std::size_t i = 0; i < m; ++i)
        net[i] = y[i] - bg0;
    const double noise_floor = std::max(1.0, 3.0 * std::sqrt(bg0 + 1.0));

    double a_slow = std::max(net[0], 1.0), tau_slow = span_t / 3.0;
    if (!log_linear(m / 2, m, net, noise_floor, a_slow, tau_slow))
        log_linear(0, m, net, noise_floor, a_slow, tau_slow);
    if (fixed_tau1)
        tau_slow = *fixed_tau1;

    FitSetup setup;
    const double inf = std::numeric_limits<double>::infinity();
    if (n_components == 1) {
        setup.param_names = {"A1", "tau1", "background"};
        setup.init = {a_slow, tau_slow, bg0};
        setup.lower = {-inf, 1e-12, -inf};
        setup.upper = {inf, inf, inf};
        setup.fixed = {0, static_cast<std::uint8_t>(fixed_tau1 ? 1 : 0),
                       static_cast<std::uint8_t>(freeze_background ? 1 : 0)};
    } else {
        std::vector<double> resid(m);
        for (std::size_t i = 0; i < m; ++i)
            resid[i] = net[i] - a_slow * std::exp(-t[i] / tau_slow);
        double a_fast = std::max(resid[0], a_slow * 0.1);
        double tau_fast = tau_slow / 6.0;
        log_linear(0, m / 2, resid, noise_floor, a_fast, tau_fast);
        setup.param_names = {"A1", "tau1", "A2", "tau2", "background"};
        setup.init = {a_slow, tau_slow, a_fast, tau_fast, bg0};
        setup.lower = {-inf, 1e-12, -inf, 1e-12, -inf};
        setup.upper = {inf, inf, inf, inf, inf};
        setup.fixed = {0, static_cast<std::uint8_t>(fixed_tau1 ? 1 : 0), 0, 0,
                       static_cast<std::uint8_t>(freeze_background ? 1 : 0)};
    }

    const ModelFunc model = [n_components](double time, std::span<const double> p) {
        double v = p[0] * std::exp(-time / p[1]);
        if (n_components == 2)
            v += p[2] * std::exp(-time / p[3]);
        return v + p.back();
    };

    FitResult result = nlls_fit(model, t, y, sig, std::move(setup), opts);
    if (n_components == 2) {
        // keep tau1 the slow component when both were free
        if (!fixed_tau1 && result.params[1] < result.params[3]) {
            std::swap(result.params[0], result.params[2]);
            std::swap(result.params[1], result.params[3]);
            std::swap(result.param_stderr[0], result.param_stderr[2]);
            std::swap(result.param_stderr[1], result.param_stderr[3]);
        }
        const double t1 = result.param("tau1");
        const double t2 = result.param("tau2");
        const double ratio = std::max(t1, t2) / std::min(t1, t2);
        if (ratio < 1.05)
            result.warnings.push_back("degenerate time constants: ratio below 1.05");
        if (std::max(t1, t2) > 10.0 * span_t)
            result.warnings.push_back("slow time constant unresolved by the trace window");
    }
    return result;
}

}  // namespace ercav
