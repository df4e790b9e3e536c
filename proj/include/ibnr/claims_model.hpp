#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ibnr/copula.hpp"
#include "ibnr/quadrature.hpp"

namespace ibnr::model {

using copula::ClaytonTheta;

/// Exponential rates (per year) of the inter-arrival time and the reporting delay, plus the
/// Clayton parameter coupling them.
struct ModelParams {
    double beta1;
    double beta2;
    ClaytonTheta theta;

    /// Throws DomainError unless both rates are finite and positive.
    ModelParams(double beta1, double beta2, ClaytonTheta theta);
    ModelParams(double beta1, double beta2, double theta) : ModelParams(beta1, beta2, ClaytonTheta(theta)) {}

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// One claim: 1-based event order, occurrence time t and report time s, in years.
struct EventRecord {
    int index;
    double t;
    double s;

    [[nodiscard]] double delay() const noexcept { return s - t; }

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/**
 * Claims ordered by occurrence time with consecutive 1-based indices.
 *
 * The inter-arrival sequence is t*_i = t_i - t_{i-1} (with t_0 = 0) and the delays are
 * w_i = s_i - t_i.
 */
class EventLog {
public:
    EventLog() = default;

    /// Validates ordering, indexing and s >= t; throws ValidationError naming the offending record.
    explicit EventLog(std::vector<EventRecord> records);

    /// Sorts (occurrence, report) pairs by occurrence time and assigns indices 1..n.
    static EventLog from_times(std::vector<std::pair<double, double>> times);

    [[nodiscard]] const std::vector<EventRecord>& records() const noexcept { return records_; }
    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
    [[nodiscard]] const EventRecord& operator[](std::size_t k) const { return records_.at(k); }

    [[nodiscard]] std::vector<double> inter_arrivals() const;
    [[nodiscard]] std::vector<double> delays() const;

    friend bool operator==(const EventLog&, const EventLog&) = default;

private:
    std::vector<EventRecord> records_;
};

struct FitResult {
    ModelParams params;
    double loglik;
    bool converged;
    int iterations;
    int evaluations;
    int restarts;
    ModelParams init;
};

/// p[j-1][l]: probability that an event occurring in calendar year I_j = [j-1, j) is reported
/// in I_{j+l}, for l = 0 .. horizon - j.
struct DelayProbabilityTable {
    int event_index;
    int horizon;
    std::vector<std::vector<double>> p;
};

/// counts[j-1][l]: expected number of claims occurring in year j and reported in year j + l.
struct IbnrForecast {
    int horizon = 0;
    std::vector<std::vector<double>> counts;
};

struct OptimizerOptions {
    double tol = 1e-8;       // simplex diameter in log-parameter space
    int max_iter = 500;      // per simplex run; one restart on non-convergence
    double initial_step = 0.25;
    quad::QuadratureOptions quadrature{};
};

// --- densities -----------------------------------------------------------------------------

/// log f(t*) f(w) c(F(t*), F(w)) with exponential margins. Requires t_star > 0 and w > 0.
double log_joint_density_tw(double t_star, double w, const ModelParams& params);
double joint_density_tw(double t_star, double w, const ModelParams& params);

/**
 * Joint density of the i-th occurrence time and its report time.
 *
 * For i >= 2 the last inter-arrival r = t - T_{i-1} is integrated out against the
 * Gamma(i-1, beta1) law of T_{i-1}:
 *   f(t, s) = int_0^t f_{T*,W}(r, s - t) g_{i-1}(t - r) dr,
 * with the exponential factors pulled out of the integral so that the adaptive rule
 * only sees (t - r)^(i-2) c(F1(r), F2(s - t)). For i = 1 there is nothing to integrate
 * (T_1 = T*_1) and the result is log_joint_density_tw(t, s - t).
 *
 * Requires i >= 1 and 0 < t < s; s == t is a DomainError because the delay density is
 * evaluated at w = 0.
 */
double log_joint_density_ts(int i, double t, double s, const ModelParams& params,
                            const quad::QuadratureOptions& opts = {});
double joint_density_ts(int i, double t, double s, const ModelParams& params,
                        const quad::QuadratureOptions& opts = {});

// --- likelihood and fitting -----------------------------------------------------------------

/// Sum of log_joint_density_ts over the log. Returns -infinity when any density is zero.
double log_likelihood(const EventLog& log, const ModelParams& params, const quad::QuadratureOptions& opts = {});

/// Moment starting point: rates 1/mean of the inter-arrivals and delays, theta from the
/// empirical Kendall tau clamped to [0, 0.95] (tau <= 0 maps to the independence threshold).
ModelParams initial_params(const EventLog& log);

/// Maximizes log_likelihood over (beta1, beta2, theta) with a Nelder-Mead simplex on the
/// log-parameters. Non-convergence is reported in the result, not thrown.
FitResult fit_mle(const EventLog& log, std::optional<ModelParams> init = std::nullopt,
                  const OptimizerOptions& opts = {});

// --- delay probabilities and IBNR counts ----------------------------------------------------

/// P(S_i in I_{j+l} | T_i in I_j) with I_k = [k-1, k). Requires i, j >= 1, l >= 0, j + l <= horizon.
double delay_probability(int i, int j, int l, const ModelParams& params, int horizon,
                         const quad::QuadratureOptions& opts = {});

/// All p[j][l] for one event order i; j = 1..horizon.
DelayProbabilityTable delay_probability_table(int i, const ModelParams& params, int horizon,
                                              const quad::QuadratureOptions& opts = {});

/// N[j][l] = sum over the logged events occurring in I_j of delay_probability(k, j, l).
/// Events occurring at or after the horizon are ignored.
IbnrForecast predict_ibnr(const EventLog& log, const ModelParams& params, int horizon,
                          const quad::QuadratureOptions& opts = {});

/// Same, over any subset of records; each record keeps its own event order. The forecast is
/// a per-event sum, so forecasts of disjoint subsets add up to the forecast of their union.
IbnrForecast predict_ibnr(std::span<const EventRecord> events, const ModelParams& params, int horizon,
                          const quad::QuadratureOptions& opts = {});

// --- goodness of fit ------------------------------------------------------------------------

struct KsResult {
    double statistic;
    double p_value;
    double rate;
};

/// sup |F_n(x) - cdf(x)| for a continuous cdf.
template <class Cdf>
double ks_statistic(std::vector<double> sample, const Cdf& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sample.size(); ++k) {
        const double f = cdf(sample[k]);
        d = std::max({d, (static_cast<double>(k) + 1.0) / n - f, f - static_cast<double>(k) / n});
    }
    return d;
}

/// Asymptotic Kolmogorov survival function P(K > lambda), 100-term alternating series.
double kolmogorov_survival(double lambda);

/// One-sample KS test against Exponential(1 / mean). All observations must be positive.
KsResult ks_exponential(std::span<const double> sample);

/// Same test against a known rate, e.g. the nominal rate of a simulated margin.
KsResult ks_exponential(std::span<const double> sample, double rate);

}  // namespace ibnr::model
