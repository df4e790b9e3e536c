#pragma once

#include <span>
#include <utility>

namespace ibnr::copula {

/// Below this value the Clayton parameter is treated as the independence copula.
inline constexpr double kIndependenceThreshold = 1e-6;

/**
 * Dependence parameter of the Clayton copula, theta >= 0.
 *
 * Values at or below kIndependenceThreshold are "effectively independent": every
 * function in this namespace then routes to the analytic independence formulas,
 * since the theta -> 0 limit of the Clayton expressions is removable but suffers
 * catastrophic cancellation when evaluated directly.
 */
class ClaytonTheta {
public:
    /// Throws DomainError for negative or non-finite values.
    explicit ClaytonTheta(double theta);

    [[nodiscard]] double value() const noexcept { return theta_; }
    [[nodiscard]] bool independent() const noexcept { return theta_ <= kIndependenceThreshold; }

    friend bool operator==(ClaytonTheta, ClaytonTheta) = default;

private:
    double theta_;
};

/// A point of the closed unit square.
class UnitPair {
public:
    /// Throws DomainError when either coordinate lies outside [0, 1].
    UnitPair(double u, double v);

    [[nodiscard]] double u() const noexcept { return u_; }
    [[nodiscard]] double v() const noexcept { return v_; }

private:
    double u_;
    double v_;
};

/// phi(t) = (t^-theta - 1) / theta, or -ln t in the independence limit. Requires 0 < t <= 1.
double generator(double t, ClaytonTheta theta);

/// phi^[-1](z) = (1 + theta z)^(-1/theta), or exp(-z) in the independence limit. Requires z >= 0.
double generator_pseudo_inverse(double z, ClaytonTheta theta);

/// C(u, v) = (u^-theta + v^-theta - 1)^(-1/theta) with the uniform-margin boundary conventions.
double clayton_cdf(UnitPair p, ClaytonTheta theta);

/// Copula density c(u, v). Both coordinates must be strictly inside (0, 1).
double clayton_density(UnitPair p, ClaytonTheta theta);

/// log c(u, v), computed term by term without leaving log space.
double log_clayton_density(UnitPair p, ClaytonTheta theta);

/**
 * log c(u, v) from log u and log v.
 *
 * This is the form used by the likelihood code: margins such as 1 - exp(-beta w) round to
 * exactly 1 for long delays, while log1p(-exp(-beta w)) stays representable.
 * Requires log_u < 0 and log_v < 0; no validation is performed.
 */
double log_clayton_density_from_logs(double log_u, double log_v, ClaytonTheta theta) noexcept;

/**
 * Conditional density of V given U = u on the uniform scale.
 *
 * With uniform margins this equals c(u, v), so for fixed u it integrates to one over v.
 */
double conditional_v_given_u(double u, double v, ClaytonTheta theta);

/**
 * h(v | u) = dC(u, v)/du, the conditional distribution function of V given U = u.
 *
 * Takes logs for the same reason as log_clayton_density_from_logs and returns log h.
 * log_v == 0 (v = 1) gives 0; log_v == -inf (v = 0) gives -inf.
 */
double log_conditional_cdf_from_logs(double log_u, double log_v, ClaytonTheta theta) noexcept;

/// Kendall's tau of the Clayton copula, theta / (theta + 2).
double tau_from_theta(ClaytonTheta theta) noexcept;

/// Inverse of tau_from_theta: 2 tau / (1 - tau). Requires 0 <= tau < 1.
ClaytonTheta theta_from_tau(double tau);

/**
 * Sample Kendall tau-a: (concordant - discordant) / (n choose 2).
 *
 * Pairs tied in either coordinate count as neither concordant nor discordant.
 * Requires at least two pairs.
 */
double empirical_kendall_tau(std::span<const std::pair<double, double>> pairs);

}  // namespace ibnr::copula
