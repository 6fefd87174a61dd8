#ifndef HOMSIM_FITTING_HPP
#define HOMSIM_FITTING_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "homsim/engine.hpp"
#include "homsim/grid.hpp"
#include "homsim/medium.hpp"

namespace homsim {

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

struct LMOptions {
    std::size_t max_iterations = 500;
    double rel_cost_tol = 1e-10;
    double gradient_tol = 1e-10;
    double fd_rel_step = 1e-6;
    double initial_damping = 1e-3;
    double max_damping = 1e12;
};

struct LMOutcome {
    std::vector<double> x;
    double cost = 0.0;
    std::size_t n_iterations = 0;
    bool converged = false;
    std::vector<std::vector<double>> jacobian; // at the optimum, row-major [point][param]
    std::vector<double> residuals;             // at the optimum
};

namespace linalg {

// Gaussian elimination with partial pivoting; returns false when singular.
inline bool solve(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= m * a[col][c];
            b[r] -= m * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri][c] * x[c];
        x[ri] = s / a[ri][ri];
    }
    return true;
}

// Cyclic Jacobi eigen-decomposition of a symmetric matrix: A = V diag(w) V^T.
inline void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& w,
                         std::vector<std::vector<double>>& v) {
    const std::size_t n = a.size();
    v.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    w.resize(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = a[i][i];
}

} // namespace linalg

namespace detail {

inline double fd_step(double x, double lower, double upper, double rel) {
    double scale = std::abs(x);
    if (std::isfinite(lower) && std::isfinite(upper))
        scale = std::max(scale, 1e-2 * (upper - lower));
    else
        scale = std::max(scale, 1.0);
    return rel * scale;
}

inline double cost_of(const std::vector<double>& r) {
    double c = 0.0;
    for (double v : r) c += v * v;
    return c;
}

} // namespace detail

// Damped least squares with central finite-difference Jacobians and
// simple bound clamping on the step.
inline LMOutcome levenberg_marquardt(const ResidualFn& fn, std::vector<double> x,
                                     std::vector<double> lower, std::vector<double> upper,
                                     const LMOptions& opts = {}) {
    const std::size_t p = x.size();
    if (lower.empty()) lower.assign(p, -std::numeric_limits<double>::infinity());
    if (upper.empty()) upper.assign(p, std::numeric_limits<double>::infinity());
    if (lower.size() != p || upper.size() != p)
        throw std::invalid_argument("levenberg_marquardt: bounds size mismatch");
    for (std::size_t j = 0; j < p; ++j)
        if (x[j] < lower[j] || x[j] > upper[j])
            throw std::invalid_argument("levenberg_marquardt: initial point out of bounds");

    LMOutcome out;
    out.residuals = fn(x);
    out.cost = detail::cost_of(out.residuals);
    const std::size_t m = out.residuals.size();

    auto jacobian = [&](const std::vector<double>& at) {
        std::vector<std::vector<double>> jac(m, std::vector<double>(p, 0.0));
        for (std::size_t j = 0; j < p; ++j) {
            const double h = detail::fd_step(at[j], lower[j], upper[j], opts.fd_rel_step);
            std::vector<double> xp = at, xm = at;
            xp[j] = std::min(at[j] + h, upper[j]);
            xm[j] = std::max(at[j] - h, lower[j]);
            const double span = xp[j] - xm[j];
            const std::vector<double> rp = fn(xp), rm = fn(xm);
            for (std::size_t i = 0; i < m; ++i) jac[i][j] = (rp[i] - rm[i]) / span;
        }
        return jac;
    };

    double damping = opts.initial_damping;
    out.jacobian = jacobian(x);

    for (out.n_iterations = 0; out.n_iterations < opts.max_iterations; ++out.n_iterations) {
        // normal equations
        std::vector<std::vector<double>> jtj(p, std::vector<double>(p, 0.0));
        std::vector<double> g(p, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                g[j] += out.jacobian[i][j] * out.residuals[i];
                for (std::size_t k = j; k < p; ++k)
                    jtj[j][k] += out.jacobian[i][j] * out.jacobian[i][k];
            }
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < j; ++k) jtj[j][k] = jtj[k][j];

        double gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::abs(v));
        if (gnorm < opts.gradient_tol) {
            out.converged = true;
            break;
        }

        bool accepted = false;
        bool any_solved = false;
        while (damping <= opts.max_damping) {
            std::vector<std::vector<double>> a = jtj;
            for (std::size_t j = 0; j < p; ++j)
                a[j][j] += damping * std::max(jtj[j][j], 1e-300);
            std::vector<double> neg_g(p), step;
            for (std::size_t j = 0; j < p; ++j) neg_g[j] = -g[j];
            if (!linalg::solve(a, neg_g, step)) {
                damping *= 10.0;
                continue;
            }
            any_solved = true;
            std::vector<double> trial = x;
            for (std::size_t j = 0; j < p; ++j)
                trial[j] = std::min(std::max(trial[j] + step[j], lower[j]), upper[j]);
            const std::vector<double> r_trial = fn(trial);
            const double cost_trial = detail::cost_of(r_trial);
            if (cost_trial <= out.cost) {
                const double rel_drop =
                    (out.cost - cost_trial) / std::max(out.cost, 1e-300);
                x = trial;
                out.residuals = r_trial;
                const double prev = out.cost;
                out.cost = cost_trial;
                damping = std::max(damping / 3.0, 1e-12);
                accepted = true;
                if (rel_drop < opts.rel_cost_tol || prev == 0.0) out.converged = true;
                break;
            }
            damping *= 3.0;
        }
        if (!accepted) {
            // no descent direction improves the cost: at the optimum within the
            // finite-difference resolution, unless the normal equations stayed
            // singular all the way to max damping
            out.converged = any_solved;
            break;
        }
        if (out.converged) break;
        out.jacobian = jacobian(x);
    }

    out.x = x;
    out.jacobian = jacobian(x);
    return out;
}

inline double r_squared(const std::vector<double>& predicted,
                        const std::vector<double>& observed) {
    if (predicted.size() != observed.size() || observed.size() < 2)
        throw std::invalid_argument("r_squared: need equal-length vectors of size >= 2");
    double mean = 0.0;
    for (double v : observed) mean += v;
    mean /= static_cast<double>(observed.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
        ss_tot += (observed[i] - mean) * (observed[i] - mean);
    }
    if (ss_tot == 0.0)
        throw std::domain_error("r_squared: observed values are all equal");
    return 1.0 - ss_res / ss_tot;
}

// sigma_j = sqrt(s^2 [(J^T J)^{-1}]_jj), s^2 = cost / (n - p).
// Ill-conditioned J^T J falls back to an eigen pseudo-inverse.
inline std::vector<double> param_uncertainties(const std::vector<std::vector<double>>& jac,
                                               const std::vector<double>& residuals) {
    const std::size_t m = jac.size();
    const std::size_t p = m == 0 ? 0 : jac[0].size();
    if (m <= p)
        throw std::domain_error("param_uncertainties: more parameters than points");
    std::vector<std::vector<double>> jtj(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < p; ++k) jtj[j][k] += jac[i][j] * jac[i][k];
    const double s2 = detail::cost_of(residuals) / static_cast<double>(m - p);

    std::vector<double> w;
    std::vector<std::vector<double>> v;
    linalg::jacobi_eigen(jtj, w, v);
    double wmax = 0.0;
    for (double e : w) wmax = std::max(wmax, e);
    std::vector<double> sigma(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double cjj = 0.0;
        for (std::size_t k = 0; k < p; ++k)
            if (w[k] > 1e-12 * wmax) cjj += v[j][k] * v[j][k] / w[k];
        sigma[j] = std::sqrt(std::max(s2 * cjj, 0.0));
    }
    return sigma;
}

// ---------------------------------------------------------------------------
// HOM dip fit model
// ---------------------------------------------------------------------------

struct FitParameter {
    std::string name;
    double value = 0.0;
    bool free = false;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

struct LineFreedom {
    bool detuning = false;
    bool optical_thickness = false;
    bool t2 = true;
};

struct FitModel {
    const ComplexSpectrum* field = nullptr; // fixed
    std::vector<LorentzLine> lines;
    std::vector<LineFreedom> freedom; // per line; defaults applied when empty
    double detuning_sign = +1.0;

    FitParameter amplitude{"amplitude", 1.0, true, 0.0,
                           std::numeric_limits<double>::infinity()};
    FitParameter baseline{"baseline", 0.0, true};
    FitParameter visibility{"visibility", 0.92, true, 0.0, 1.0};
    FitParameter tau_offset{"tau_offset", 0.0, true, -2e-12, 2e-12};

    // bounds for free line parameters
    double t2_lower = 1e-15, t2_upper = 1e-11;
    double detuning_bound_nm = 20.0;
    double alpha_upper = 50.0;

    bool poisson_weights = false;

    std::vector<FitParameter> build_parameters() const {
        if (field == nullptr)
            throw std::invalid_argument("FitModel: field not set");
        if (!freedom.empty() && freedom.size() != lines.size())
            throw std::invalid_argument("FitModel: freedom list length mismatch");
        std::vector<FitParameter> params{amplitude, baseline, visibility, tau_offset};
        for (std::size_t k = 0; k < lines.size(); ++k) {
            const LineFreedom fr = freedom.empty() ? LineFreedom{} : freedom[k];
            const std::string tag = std::to_string(k + 1);
            params.push_back({"omega_" + tag + "_nm", lines[k].detuning_nm, fr.detuning,
                              lines[k].detuning_nm - detuning_bound_nm,
                              lines[k].detuning_nm + detuning_bound_nm});
            params.push_back({"alpha_l_" + tag, lines[k].optical_thickness,
                              fr.optical_thickness, 0.0, alpha_upper});
            params.push_back({"t2_" + tag, lines[k].t2, fr.t2, t2_lower, t2_upper});
        }
        bool any_free = false;
        for (const auto& q : params) any_free = any_free || q.free;
        if (!any_free) throw std::invalid_argument("FitModel: no free parameters");
        return params;
    }
};

struct FitResult {
    std::vector<FitParameter> parameters; // estimates, with free flags
    std::vector<double> sigmas;           // aligned with parameters (0 for fixed)
    double r_squared = 0.0;
    double cost = 0.0;
    std::size_t n_iterations = 0;
    bool converged = false;
    std::vector<double> best_fit; // model counts at the data delays
};

namespace detail {

class DipModelEval {
public:
    DipModelEval(const FitModel& model, const std::vector<double>& delays)
        : model_(model), delays_(delays), eval_(*model.field) {}

    // full parameter vector (fixed + free) -> predicted counts
    std::vector<double> predict(const std::vector<double>& full) {
        LorentzianMedium medium;
        medium.detuning_sign = model_.detuning_sign;
        for (std::size_t k = 0; k < model_.lines.size(); ++k)
            medium.lines.push_back({full[4 + 3 * k], full[5 + 3 * k], full[6 + 3 * k]});
        Medium m;
        if (medium.lines.empty())
            m = IdentityMedium{};
        else
            m = medium;
        eval_.set_transfer(transfer_function(m, *model_.field->grid));
        const double inv_base = 1.0 / eval_.baseline();
        std::vector<double> out(delays_.size());
        for (std::size_t i = 0; i < delays_.size(); ++i)
            out[i] = full[0] * inv_base * eval_.rate(delays_[i], full[2], full[3]) + full[1];
        return out;
    }

private:
    const FitModel& model_;
    std::vector<double> delays_;
    DipEvaluator eval_;
};

} // namespace detail

inline std::vector<double> fit_residuals(const FitModel& model,
                                         const std::vector<double>& full_params,
                                         const CountTrace& data) {
    detail::DipModelEval eval(model, data.delays);
    const std::vector<double> pred = eval.predict(full_params);
    std::vector<double> r(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        r[i] = static_cast<double>(data.counts[i]) - pred[i];
        if (model.poisson_weights)
            r[i] /= std::sqrt(std::max<double>(static_cast<double>(data.counts[i]), 1.0));
    }
    return r;
}

inline FitResult fit_dip(const FitModel& model, const CountTrace& data,
                         const LMOptions& opts = {}) {
    const std::vector<FitParameter> params = model.build_parameters();
    std::vector<std::size_t> free_idx;
    for (std::size_t j = 0; j < params.size(); ++j)
        if (params[j].free) free_idx.push_back(j);

    std::vector<double> full(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) full[j] = params[j].value;

    detail::DipModelEval eval(model, data.delays);
    auto fn = [&](const std::vector<double>& x) {
        std::vector<double> f = full;
        for (std::size_t j = 0; j < free_idx.size(); ++j) f[free_idx[j]] = x[j];
        const std::vector<double> pred = eval.predict(f);
        std::vector<double> r(pred.size());
        for (std::size_t i = 0; i < pred.size(); ++i) {
            r[i] = static_cast<double>(data.counts[i]) - pred[i];
            if (model.poisson_weights)
                r[i] /=
                    std::sqrt(std::max<double>(static_cast<double>(data.counts[i]), 1.0));
        }
        return r;
    };

    std::vector<double> x0, lo, hi;
    for (std::size_t j : free_idx) {
        x0.push_back(params[j].value);
        lo.push_back(params[j].lower);
        hi.push_back(params[j].upper);
    }
    const LMOutcome lm = levenberg_marquardt(fn, x0, lo, hi, opts);

    FitResult result;
    result.parameters = params;
    for (std::size_t j = 0; j < free_idx.size(); ++j)
        result.parameters[free_idx[j]].value = lm.x[j];
    result.cost = lm.cost;
    result.n_iterations = lm.n_iterations;
    result.converged = lm.converged;

    std::vector<double> full_best = full;
    for (std::size_t j = 0; j < free_idx.size(); ++j) full_best[free_idx[j]] = lm.x[j];
    result.best_fit = eval.predict(full_best);

    std::vector<double> observed(data.counts.size());
    for (std::size_t i = 0; i < observed.size(); ++i)
        observed[i] = static_cast<double>(data.counts[i]);
    result.r_squared = r_squared(result.best_fit, observed);

    result.sigmas.assign(params.size(), 0.0);
    if (data.counts.size() > free_idx.size()) {
        const std::vector<double> free_sigma = param_uncertainties(lm.jacobian, lm.residuals);
        for (std::size_t j = 0; j < free_idx.size(); ++j)
            result.sigmas[free_idx[j]] = free_sigma[j];
    }
    return result;
}

} // namespace homsim

#endif
