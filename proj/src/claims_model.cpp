#include "ibnr/claims_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ibnr/errors.hpp"
#include "ibnr/nelder_mead.hpp"

namespace ibnr::model {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log F(x) for the exponential cdf 1 - exp(-rate x), x > 0.
double log_exp_cdf(double rate, double x) noexcept {
    return std::log(-std::expm1(-rate * x));
}

// log(exp(a) - exp(b)) for a >= b.
double log_diff_exp(double a, double b) noexcept {
    if (b == kNegInf) {
        return a;
    }
    if (b >= a) {
        return kNegInf;
    }
    return a + std::log(-std::expm1(b - a));
}

void check_record_order(const EventRecord& r, std::size_t pos) {
    if (r.index != static_cast<int>(pos) + 1) {
        throw ValidationError("event log index " + std::to_string(r.index) + " at position " +
                              std::to_string(pos + 1) + " is not consecutive from 1");
    }
    if (!(r.t >= 0.0) || !std::isfinite(r.t) || !std::isfinite(r.s)) {
        throw ValidationError("event " + std::to_string(r.index) + " has an invalid occurrence time");
    }
    if (!(r.s >= r.t)) {
        throw ValidationError("event " + std::to_string(r.index) + " is reported before it occurs");
    }
}

// Initial breakpoints on [0, t] for integrals over the last inter-arrival r. The weight
// (1 - r/t)^(i-2) decays on the scale t/(i-2), which is tiny next to t for large i, and
// the copula factor peaks where F1(r) = F2(w), i.e. at r = beta2 w / beta1.
std::vector<double> convolution_breaks(double t, int i, std::initializer_list<double> peaks) {
    std::vector<double> b{0.0, t};
    auto add = [&](double x) {
        if (x > 0.0 && x < t) {
            b.push_back(x);
        }
    };
    if (i >= 3) {
        const double scale = t / static_cast<double>(i - 2);
        for (double m : {0.25, 1.0, 4.0, 16.0, 64.0}) {
            add(m * scale);
        }
    }
    for (double p : peaks) {
        for (double m : {0.25, 1.0, 4.0}) {
            add(m * p);
        }
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

quad::QuadratureOptions tighter(quad::QuadratureOptions opts) {
    opts.rel_tol *= 0.1;
    opts.abs_tol *= 0.1;
    return opts;
}

}  // namespace

ModelParams::ModelParams(double beta1_, double beta2_, ClaytonTheta theta_) : beta1(beta1_), beta2(beta2_), theta(theta_) {
    if (!(beta1 > 0.0) || !std::isfinite(beta1) || !(beta2 > 0.0) || !std::isfinite(beta2)) {
        throw DomainError("exponential rates must be finite and positive, got beta1=" + std::to_string(beta1) +
                          " beta2=" + std::to_string(beta2));
    }
}

EventLog::EventLog(std::vector<EventRecord> records) : records_(std::move(records)) {
    for (std::size_t k = 0; k < records_.size(); ++k) {
        check_record_order(records_[k], k);
        if (k > 0 && records_[k].t < records_[k - 1].t) {
            throw ValidationError("event " + std::to_string(records_[k].index) + " occurs before event " +
                                  std::to_string(records_[k - 1].index));
        }
    }
}

EventLog EventLog::from_times(std::vector<std::pair<double, double>> times) {
    std::stable_sort(times.begin(), times.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<EventRecord> records;
    records.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        records.push_back({static_cast<int>(k) + 1, times[k].first, times[k].second});
    }
    return EventLog(std::move(records));
}

std::vector<double> EventLog::inter_arrivals() const {
    std::vector<double> out;
    out.reserve(records_.size());
    double prev = 0.0;
    for (const auto& r : records_) {
        out.push_back(r.t - prev);
        prev = r.t;
    }
    return out;
}

std::vector<double> EventLog::delays() const {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
        out.push_back(r.delay());
    }
    return out;
}

double log_joint_density_tw(double t_star, double w, const ModelParams& params) {
    if (!(t_star > 0.0) || !(w > 0.0)) {
        throw DomainError("joint density of (T*, W) needs t* > 0 and w > 0");
    }
    const double b1 = params.beta1;
    const double b2 = params.beta2;
    return std::log(b1) - b1 * t_star + std::log(b2) - b2 * w +
           copula::log_clayton_density_from_logs(log_exp_cdf(b1, t_star), log_exp_cdf(b2, w), params.theta);
}

double joint_density_tw(double t_star, double w, const ModelParams& params) {
    return std::exp(log_joint_density_tw(t_star, w, params));
}

double log_joint_density_ts(int i, double t, double s, const ModelParams& params, const quad::QuadratureOptions& opts) {
    if (i < 1) {
        throw DomainError("event order must be >= 1");
    }
    if (!(t > 0.0) || !std::isfinite(t) || !std::isfinite(s)) {
        throw DomainError("occurrence time must be positive and finite");
    }
    if (!(s > t)) {
        throw DomainError("joint density of (T_i, S_i) needs s > t (w = 0 is a boundary)");
    }
    const double w = s - t;
    if (i == 1) {
        return log_joint_density_tw(t, w, params);
    }
    const double b1 = params.beta1;
    const double b2 = params.beta2;
    const double log_v = log_exp_cdf(b2, w);
    const double shape = static_cast<double>(i - 2);
    const ClaytonTheta theta = params.theta;
    auto log_integrand = [&](double r) {
        return shape * std::log1p(-r / t) + copula::log_clayton_density_from_logs(log_exp_cdf(b1, r), log_v, theta);
    };
    const double log_inner = quad::log_integrate(log_integrand, convolution_breaks(t, i, {b2 * w / b1}), opts);
    return static_cast<double>(i) * std::log(b1) + std::log(b2) - b1 * t - b2 * w - std::lgamma(static_cast<double>(i - 1)) +
           shape * std::log(t) + log_inner;
}

double joint_density_ts(int i, double t, double s, const ModelParams& params, const quad::QuadratureOptions& opts) {
    return std::exp(log_joint_density_ts(i, t, s, params, opts));
}

double log_likelihood(const EventLog& log, const ModelParams& params, const quad::QuadratureOptions& opts) {
    double total = 0.0;
    for (const auto& r : log.records()) {
        if (!(r.s > r.t) || !(r.t > 0.0)) {
            throw ValidationError("event " + std::to_string(r.index) + " needs 0 < t < s for the likelihood");
        }
        const double term = log_joint_density_ts(r.index, r.t, r.s, params, opts);
        if (term == kNegInf) {
            return kNegInf;
        }
        total += term;
    }
    return total;
}

ModelParams initial_params(const EventLog& log) {
    if (log.size() < 2) {
        throw ValidationError("initial parameters need at least 2 events");
    }
    const auto gaps = log.inter_arrivals();
    const auto delays = log.delays();
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(gaps.size());
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        if (!(gaps[k] > 0.0)) {
            throw ValidationError("inter-arrival time of event " + std::to_string(k + 1) + " is not positive");
        }
        if (!(delays[k] >= 0.0)) {
            throw ValidationError("delay of event " + std::to_string(k + 1) + " is negative");
        }
        pairs.emplace_back(gaps[k], delays[k]);
    }
    const double n = static_cast<double>(gaps.size());
    const double mean_gap = std::accumulate(gaps.begin(), gaps.end(), 0.0) / n;
    const double mean_delay = std::accumulate(delays.begin(), delays.end(), 0.0) / n;

    const double tau = std::clamp(copula::empirical_kendall_tau(pairs), 0.0, 0.95);
    const ClaytonTheta theta = tau > 0.0 ? copula::theta_from_tau(tau) : ClaytonTheta(copula::kIndependenceThreshold);
    return ModelParams(1.0 / mean_gap, 1.0 / mean_delay, theta);
}

FitResult fit_mle(const EventLog& log, std::optional<ModelParams> init, const OptimizerOptions& opts) {
    if (log.size() < 3) {
        throw ValidationError("maximum likelihood fit needs at least 3 events");
    }
    const ModelParams start = init ? *init : initial_params(log);

    // Keeps trial points inside a box where the quadrature is meaningful.
    constexpr double kLogBound = 14.0;
    auto objective = [&](const std::array<double, 3>& x) {
        for (double c : x) {
            if (!(std::abs(c) <= kLogBound)) {
                return std::numeric_limits<double>::infinity();
            }
        }
        const ModelParams p(std::exp(x[0]), std::exp(x[1]), ClaytonTheta(std::exp(x[2])));
        return -log_likelihood(log, p, opts.quadrature);
    };

    const std::array<double, 3> x0{std::log(start.beta1), std::log(start.beta2),
                                   std::log(std::max(start.theta.value(), copula::kIndependenceThreshold))};
    auto run = optim::nelder_mead<3>(objective, x0, opts.initial_step, opts.tol, opts.max_iter);
    int iterations = run.iterations;
    int evaluations = run.evaluations;
    int restarts = 0;
    if (!run.converged) {
        ++restarts;
        auto again = optim::nelder_mead<3>(objective, run.x, 0.5 * opts.initial_step, opts.tol, opts.max_iter);
        iterations += again.iterations;
        evaluations += again.evaluations;
        if (again.fx <= run.fx || again.converged) {
            run = again;
        }
    }

    const ModelParams fitted(std::exp(run.x[0]), std::exp(run.x[1]), ClaytonTheta(std::exp(run.x[2])));
    const double loglik = -run.fx;
    return FitResult{fitted, loglik, run.converged && std::isfinite(loglik), iterations, evaluations, restarts, start};
}

namespace {

// log P(T_i in [j-1, j)) for T_i ~ Gamma(i, beta1).
double log_occurrence_probability(int i, int j, double b1, const quad::QuadratureOptions& opts) {
    const double shape = static_cast<double>(i);
    const double log_norm = shape * std::log(b1) - std::lgamma(shape);
    auto log_gamma_pdf = [&](double t) { return log_norm + (shape - 1.0) * std::log(t) - b1 * t; };
    return quad::log_integrate(log_gamma_pdf, static_cast<double>(j - 1), static_cast<double>(j), opts);
}

// log P(T_i in I_j, S_i in I_{j+l}).
double log_joint_interval_probability(int i, int j, int l, const ModelParams& params,
                                      const quad::QuadratureOptions& opts) {
    const double b1 = params.beta1;
    const double b2 = params.beta2;
    const ClaytonTheta theta = params.theta;
    const double report_end = static_cast<double>(j + l);
    const quad::QuadratureOptions inner_opts = tighter(opts);

    // log of h(F2(w_hi) | u) - h(F2(w_lo) | u) for the delay window [w_lo, w_hi).
    auto log_window = [&](double log_u, double w_lo, double w_hi) {
        const double log_v_hi = log_exp_cdf(b2, w_hi);
        const double log_v_lo = w_lo > 0.0 ? log_exp_cdf(b2, w_lo) : kNegInf;
        return log_diff_exp(copula::log_conditional_cdf_from_logs(log_u, log_v_hi, theta),
                            copula::log_conditional_cdf_from_logs(log_u, log_v_lo, theta));
    };

    auto log_outer = [&](double t) {
        const double w_hi = report_end - t;
        const double w_lo = std::max(0.0, report_end - 1.0 - t);
        if (i == 1) {
            return std::log(b1) - b1 * t + log_window(log_exp_cdf(b1, t), w_lo, w_hi);
        }
        const double shape = static_cast<double>(i - 2);
        auto log_inner = [&](double r) {
            return shape * std::log1p(-r / t) + log_window(log_exp_cdf(b1, r), w_lo, w_hi);
        };
        return static_cast<double>(i) * std::log(b1) - b1 * t - std::lgamma(static_cast<double>(i - 1)) +
               shape * std::log(t) +
               quad::log_integrate(log_inner, convolution_breaks(t, i, {b2 * w_lo / b1, b2 * w_hi / b1}), inner_opts);
    };
    return quad::log_integrate(log_outer, static_cast<double>(j - 1), static_cast<double>(j), opts);
}

std::vector<double> delay_row(int i, int j, const ModelParams& params, int horizon, const quad::QuadratureOptions& opts) {
    const double log_den = log_occurrence_probability(i, j, params.beta1, opts);
    if (log_den < std::log(1e-300)) {
        throw NumericalError("P(T_" + std::to_string(i) + " in I_" + std::to_string(j) +
                             ") is below 1e-300; delay probability is undefined");
    }
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(horizon - j + 1));
    for (int l = 0; j + l <= horizon; ++l) {
        const double log_num = log_joint_interval_probability(i, j, l, params, opts);
        row.push_back(std::min(1.0, std::exp(log_num - log_den)));
    }
    return row;
}

void check_delay_args(int i, int j, int l, int horizon) {
    if (i < 1 || j < 1 || l < 0) {
        throw DomainError("delay probability needs i >= 1, j >= 1, l >= 0");
    }
    if (j + l > horizon) {
        throw DomainError("delay probability needs j + l <= horizon (" + std::to_string(j + l) + " > " +
                          std::to_string(horizon) + ")");
    }
}

}  // namespace

double delay_probability(int i, int j, int l, const ModelParams& params, int horizon, const quad::QuadratureOptions& opts) {
    check_delay_args(i, j, l, horizon);
    const double log_den = log_occurrence_probability(i, j, params.beta1, opts);
    if (log_den < std::log(1e-300)) {
        throw NumericalError("P(T_" + std::to_string(i) + " in I_" + std::to_string(j) +
                             ") is below 1e-300; delay probability is undefined");
    }
    return std::min(1.0, std::exp(log_joint_interval_probability(i, j, l, params, opts) - log_den));
}

DelayProbabilityTable delay_probability_table(int i, const ModelParams& params, int horizon,
                                              const quad::QuadratureOptions& opts) {
    check_delay_args(i, 1, 0, horizon);
    DelayProbabilityTable table{i, horizon, {}};
    for (int j = 1; j <= horizon; ++j) {
        table.p.push_back(delay_row(i, j, params, horizon, opts));
    }
    return table;
}

IbnrForecast predict_ibnr(std::span<const EventRecord> events, const ModelParams& params, int horizon,
                          const quad::QuadratureOptions& opts) {
    if (horizon < 1) {
        throw DomainError("forecast horizon must be >= 1");
    }
    IbnrForecast out;
    out.horizon = horizon;
    for (int j = 1; j <= horizon; ++j) {
        out.counts.emplace_back(static_cast<std::size_t>(horizon - j + 1), 0.0);
    }
    for (const auto& e : events) {
        if (!(e.t >= 0.0) || e.t >= static_cast<double>(horizon)) {
            continue;
        }
        const int j = static_cast<int>(std::floor(e.t)) + 1;
        const auto row = delay_row(e.index, j, params, horizon, opts);
        auto& target = out.counts[static_cast<std::size_t>(j - 1)];
        for (std::size_t l = 0; l < row.size(); ++l) {
            target[l] += row[l];
        }
    }
    return out;
}

IbnrForecast predict_ibnr(const EventLog& log, const ModelParams& params, int horizon, const quad::QuadratureOptions& opts) {
    return predict_ibnr(std::span<const EventRecord>(log.records()), params, horizon, opts);
}

}  // namespace ibnr::model
