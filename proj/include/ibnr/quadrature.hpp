#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ibnr/errors.hpp"

namespace ibnr::quad {

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_panels = 200;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> nodes{};
    std::array<double, N> log_weights{};

    GaussLegendre() {
        const double pi = std::acos(-1.0);
        for (std::size_t k = 0; k < N; ++k) {
            double x = std::cos(pi * (static_cast<double>(k) + 0.75) / (static_cast<double>(N) + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = x;
                for (std::size_t m = 2; m <= N; ++m) {
                    const double pm = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / static_cast<double>(m);
                    p0 = p1;
                    p1 = pm;
                }
                dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) {
                    break;
                }
            }
            nodes[k] = x;
            log_weights[k] = std::log(2.0 / ((1.0 - x * x) * dp * dp));
        }
    }

    static const GaussLegendre& instance() {
        static const GaussLegendre rule;
        return rule;
    }
};

inline double log_sum_exp(double a, double b) noexcept {
    if (a == -std::numeric_limits<double>::infinity()) {
        return b;
    }
    if (b == -std::numeric_limits<double>::infinity()) {
        return a;
    }
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

namespace detail {

inline constexpr std::size_t kRuleSize = 10;

/// Log of the Gauss-Legendre estimate of the integral of exp(log_f) over [a, b].
template <class LogF>
double log_panel(const LogF& log_f, double a, double b) {
    const auto& rule = GaussLegendre<kRuleSize>::instance();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    std::array<double, kRuleSize> terms{};
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < kRuleSize; ++k) {
        terms[k] = rule.log_weights[k] + log_f(mid + half * rule.nodes[k]);
        if (std::isnan(terms[k])) {
            return terms[k];
        }
        m = std::max(m, terms[k]);
    }
    if (m == -std::numeric_limits<double>::infinity()) {
        return m;
    }
    double s = 0.0;
    for (double t : terms) {
        s += std::exp(t - m);
    }
    return m + std::log(s) + std::log(half);
}

struct Panel {
    double a;
    double b;
    double log_coarse;  // single rule over [a, b]
    double log_left;    // rule over [a, mid]
    double log_right;   // rule over [mid, b]

    [[nodiscard]] double log_fine() const noexcept { return log_sum_exp(log_left, log_right); }
};

inline double rel_diff(double log_x, double log_y, double log_ref) noexcept {
    const double x = log_x == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(log_x - log_ref);
    const double y = log_y == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(log_y - log_ref);
    return std::abs(x - y);
}

template <class LogF>
Panel make_panel(const LogF& log_f, double a, double b, double log_coarse) {
    const double mid = 0.5 * (a + b);
    return Panel{a, b, log_coarse, log_panel(log_f, a, mid), log_panel(log_f, mid, b)};
}

}  // namespace detail

/**
 * Adaptive integration of a nonnegative function given through its logarithm.
 *
 * Returns log(int exp(log_f(x)) dx) over [breaks.front(), breaks.back()]. The
 * integration starts from one panel per pair of consecutive breakpoints; each panel is
 * estimated with a 10-point Gauss-Legendre rule and with the same rule on its two
 * halves, and the difference is the panel's error. The panel with the largest error is
 * bisected until the summed error is within max(rel_tol * I, abs_tol). Panel values are
 * combined by log-sum-exp, so integrands far below the double range are fine. The rule
 * never samples the endpoints, which makes integrable endpoint singularities safe.
 *
 * Breakpoints let callers place features the initial panels would otherwise step over:
 * a narrow peak that no node of a wide panel lands on makes the coarse and fine
 * estimates agree on the wrong value.
 *
 * Throws QuadratureError when max_panels is reached first, or on a NaN integrand.
 */
template <class LogF>
double log_integrate(const LogF& log_f, const std::vector<double>& breaks, const QuadratureOptions& opts = {}) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (breaks.size() < 2) {
        throw DomainError("log_integrate: need at least two breakpoints");
    }
    const double a = breaks.front();
    const double b = breaks.back();
    if (!(b > a)) {
        if (a == b) {
            return kNegInf;
        }
        throw DomainError("log_integrate: reversed interval");
    }
    std::vector<detail::Panel> panels;
    panels.reserve(static_cast<std::size_t>(std::max(opts.max_panels, static_cast<int>(breaks.size()))));
    for (std::size_t k = 1; k < breaks.size(); ++k) {
        if (!(breaks[k] >= breaks[k - 1])) {
            throw DomainError("log_integrate: breakpoints must be nondecreasing");
        }
        if (breaks[k] > breaks[k - 1]) {
            panels.push_back(detail::make_panel(log_f, breaks[k - 1], breaks[k],
                                                detail::log_panel(log_f, breaks[k - 1], breaks[k])));
        }
    }

    const double log_abs_tol = opts.abs_tol > 0.0 ? std::log(opts.abs_tol) : kNegInf;
    std::vector<double> errors;
    while (true) {
        double log_total = kNegInf;
        for (const auto& p : panels) {
            log_total = log_sum_exp(log_total, p.log_fine());
        }
        if (std::isnan(log_total)) {
            throw QuadratureError("log_integrate: NaN integrand on [" + std::to_string(a) + ", " + std::to_string(b) +
                                  "]");
        }
        if (log_total == kNegInf) {
            return kNegInf;
        }
        errors.resize(panels.size());
        double err = 0.0;  // relative to exp(log_total)
        std::size_t worst = 0;
        for (std::size_t k = 0; k < panels.size(); ++k) {
            errors[k] = detail::rel_diff(panels[k].log_coarse, panels[k].log_fine(), log_total);
            err += errors[k];
            if (errors[k] > errors[worst]) {
                worst = k;
            }
        }
        if (!std::isfinite(err)) {
            throw QuadratureError("log_integrate: non-finite integrand on [" + std::to_string(a) + ", " +
                                  std::to_string(b) + "]");
        }
        if (err <= opts.rel_tol || std::log(err) + log_total <= log_abs_tol) {
            return log_total;
        }
        if (static_cast<int>(panels.size()) >= opts.max_panels) {
            std::ostringstream msg;
            msg << "adaptive quadrature on [" << a << ", " << b << "] reached " << opts.max_panels
                << " panels with relative error " << err << " (tolerance " << opts.rel_tol << ")";
            throw QuadratureError(msg.str());
        }
        const detail::Panel split = panels[worst];
        const double mid = 0.5 * (split.a + split.b);
        panels[worst] = detail::make_panel(log_f, split.a, mid, split.log_left);
        panels.push_back(detail::make_panel(log_f, mid, split.b, split.log_right));
    }
}

/// log_integrate over the single interval [a, b].
template <class LogF>
double log_integrate(const LogF& log_f, double a, double b, const QuadratureOptions& opts = {}) {
    if (a == b) {
        return -std::numeric_limits<double>::infinity();
    }
    return log_integrate(log_f, std::vector<double>{a, b}, opts);
}

/// Linear-space convenience wrapper for nonnegative integrands.
template <class F>
double integrate(const F& f, double a, double b, const QuadratureOptions& opts = {}) {
    return std::exp(log_integrate([&](double x) { return std::log(f(x)); }, a, b, opts));
}

}  // namespace ibnr::quad
