#include "ibnr/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ibnr/errors.hpp"

namespace ibnr::copula {

namespace {

// log(u^-theta + v^-theta - 1) given log u, log v <= 0.
double log_clayton_sum(double log_u, double log_v, double theta) noexcept {
    const double a = -theta * log_u;
    const double b = -theta * log_v;
    const double m = std::max(a, b);
    if (m < 0.5) {
        return std::log1p(std::expm1(a) + std::expm1(b));
    }
    return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

void require_interior(double x, const char* name) {
    if (!(x > 0.0 && x < 1.0)) {
        throw DomainError(std::string(name) + " must lie strictly inside (0,1), got " + std::to_string(x));
    }
}

}  // namespace

ClaytonTheta::ClaytonTheta(double theta) : theta_(theta) {
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
        throw DomainError("Clayton theta must be finite and >= 0, got " + std::to_string(theta));
    }
}

UnitPair::UnitPair(double u, double v) : u_(u), v_(v) {
    if (!(u >= 0.0 && u <= 1.0) || !(v >= 0.0 && v <= 1.0)) {
        throw DomainError("unit pair outside [0,1]^2: (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
}

double generator(double t, ClaytonTheta theta) {
    if (!(t > 0.0 && t <= 1.0)) {
        throw DomainError("generator argument must lie in (0,1], got " + std::to_string(t));
    }
    if (theta.independent()) {
        return -std::log(t);
    }
    return std::expm1(-theta.value() * std::log(t)) / theta.value();
}

double generator_pseudo_inverse(double z, ClaytonTheta theta) {
    if (!(z >= 0.0)) {
        throw DomainError("generator inverse argument must be >= 0, got " + std::to_string(z));
    }
    if (theta.independent()) {
        return std::exp(-z);
    }
    // phi(0) = +inf for theta >= 0, so the pseudo-inverse is the ordinary inverse.
    return std::exp(-std::log1p(theta.value() * z) / theta.value());
}

double clayton_cdf(UnitPair p, ClaytonTheta theta) {
    const double u = p.u();
    const double v = p.v();
    if (u == 0.0 || v == 0.0) {
        return 0.0;
    }
    if (u == 1.0) {
        return v;
    }
    if (v == 1.0) {
        return u;
    }
    if (theta.independent()) {
        return u * v;
    }
    return std::exp(-log_clayton_sum(std::log(u), std::log(v), theta.value()) / theta.value());
}

double log_clayton_density_from_logs(double log_u, double log_v, ClaytonTheta theta) noexcept {
    if (theta.independent()) {
        return 0.0;
    }
    const double th = theta.value();
    return std::log1p(th) - (th + 1.0) * (log_u + log_v) - (2.0 + 1.0 / th) * log_clayton_sum(log_u, log_v, th);
}

double log_clayton_density(UnitPair p, ClaytonTheta theta) {
    require_interior(p.u(), "u");
    require_interior(p.v(), "v");
    return log_clayton_density_from_logs(std::log(p.u()), std::log(p.v()), theta);
}

double clayton_density(UnitPair p, ClaytonTheta theta) {
    return std::exp(log_clayton_density(p, theta));
}

double conditional_v_given_u(double u, double v, ClaytonTheta theta) {
    require_interior(u, "u");
    require_interior(v, "v");
    return clayton_density(UnitPair(u, v), theta);
}

double log_conditional_cdf_from_logs(double log_u, double log_v, ClaytonTheta theta) noexcept {
    if (log_v == -std::numeric_limits<double>::infinity()) {
        return log_v;
    }
    if (theta.independent()) {
        return log_v;
    }
    const double th = theta.value();
    return -(th + 1.0) * log_u - (1.0 / th + 1.0) * log_clayton_sum(log_u, log_v, th);
}

double tau_from_theta(ClaytonTheta theta) noexcept {
    return theta.value() / (theta.value() + 2.0);
}

ClaytonTheta theta_from_tau(double tau) {
    if (!(tau >= 0.0 && tau < 1.0)) {
        throw DomainError("Clayton copula needs 0 <= tau < 1, got " + std::to_string(tau));
    }
    return ClaytonTheta(2.0 * tau / (1.0 - tau));
}

double empirical_kendall_tau(std::span<const std::pair<double, double>> pairs) {
    const std::size_t n = pairs.size();
    if (n < 2) {
        throw ValidationError("Kendall tau needs at least 2 pairs");
    }
    long long score = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto [xi, yi] = pairs[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = pairs[j].first - xi;
            const double dy = pairs[j].second - yi;
            const int sx = (dx > 0.0) - (dx < 0.0);
            const int sy = (dy > 0.0) - (dy < 0.0);
            score += sx * sy;
        }
    }
    const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return static_cast<double>(score) / total;
}

}  // namespace ibnr::copula
