#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ibnr/claims_model.hpp"
#include "ibnr/errors.hpp"

namespace ibnr::model {

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) {
        return 1.0;
    }
    // The alternating series converges slowly for small lambda; the equivalent
    // Jacobi-theta form of the same distribution function is used there.
    if (lambda < 1.18) {
        const double pi = std::acos(-1.0);
        const double y = -pi * pi / (8.0 * lambda * lambda);
        double cdf = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double odd = 2.0 * k - 1.0;
            cdf += std::exp(odd * odd * y);
        }
        cdf *= std::sqrt(2.0 * pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1) ? term : -term;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

void check_sample(std::span<const double> sample) {
    if (sample.empty()) {
        throw ValidationError("KS test needs at least one observation");
    }
    for (double x : sample) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw DomainError("KS exponential test needs positive observations, got " + std::to_string(x));
        }
    }
}

}  // namespace

KsResult ks_exponential(std::span<const double> sample, double rate) {
    check_sample(sample);
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw DomainError("KS exponential test needs a positive rate");
    }
    const double n = static_cast<double>(sample.size());
    const double d = ks_statistic(std::vector<double>(sample.begin(), sample.end()),
                                  [rate](double x) { return -std::expm1(-rate * x); });
    return KsResult{d, kolmogorov_survival(std::sqrt(n) * d), rate};
}

KsResult ks_exponential(std::span<const double> sample) {
    check_sample(sample);
    const double n = static_cast<double>(sample.size());
    return ks_exponential(sample, n / std::accumulate(sample.begin(), sample.end(), 0.0));
}

}  // namespace ibnr::model
