#include "ibnr/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "ibnr/copula.hpp"
#include "ibnr/errors.hpp"

namespace ibnr::sim {

namespace {

constexpr int kEnvelopeGrid = 512;
constexpr double kGridTail = 1e-6;
constexpr double kMinAcceptance = 1e-3;
constexpr long long kMaxProposalsPerPair = 10'000'000;

double log_exp_cdf(double rate, double x) noexcept {
    return std::log(-std::expm1(-rate * x));
}

std::pair<double, double> draw_pair(const ModelParams& params, double safety, Rng& rng, SamplerStats& stats) {
    const double t_star = rng.exponential(params.beta1);
    const double log_u = log_exp_cdf(params.beta1, t_star);
    const double envelope = envelope_constant(t_star, params, safety);
    for (long long tries = 0; tries < kMaxProposalsPerPair; ++tries) {
        const double w = rng.exponential(params.beta2);
        const double accept = rng.uniform();
        const double ratio =
            std::exp(copula::log_clayton_density_from_logs(log_u, log_exp_cdf(params.beta2, w), params.theta));
        ++stats.proposals;
        if (ratio > envelope) {
            throw SamplerError("accept-reject envelope violated at t*=" + std::to_string(t_star) + ", w=" +
                               std::to_string(w) + ": ratio " + std::to_string(ratio) + " > M " +
                               std::to_string(envelope));
        }
        stats.max_ratio_fraction = std::max(stats.max_ratio_fraction, ratio / envelope);
        if (accept * envelope < ratio) {
            ++stats.accepted;
            return {t_star, w};
        }
    }
    throw SamplerError("accept-reject made no progress at t*=" + std::to_string(t_star));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::stream(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x1b4e5a7du};
    Rng rng(0);
    rng.engine_.seed(seq);
    return rng;
}

double Rng::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
    return -std::log(uniform()) / rate;
}

double envelope_constant(double t_star, const ModelParams& params, double safety) {
    if (!(t_star > 0.0)) {
        throw DomainError("envelope needs t* > 0");
    }
    if (params.theta.independent()) {
        return safety;
    }
    const double log_u = log_exp_cdf(params.beta1, t_star);
    // The ratio peaks near v ~ u for strong dependence, so the grid reaches below u.
    const double p_lo = std::min(kGridTail, 1e-3 * std::exp(log_u));
    const double w_lo = -std::log1p(-p_lo) / params.beta2;
    const double w_hi = -std::log(kGridTail) / params.beta2;
    const double step = std::log(w_hi / w_lo) / (kEnvelopeGrid - 1);
    double best = 0.0;
    for (int k = 0; k < kEnvelopeGrid; ++k) {
        const double w = w_lo * std::exp(step * k);
        best = std::max(best, copula::log_clayton_density_from_logs(log_u, log_exp_cdf(params.beta2, w), params.theta));
    }
    return safety * std::exp(best);
}

PairStream sample_pairs(const ModelParams& params, int n, double envelope_safety, Rng& rng) {
    if (n < 0) {
        throw ValidationError("sample size must be nonnegative");
    }
    if (!(envelope_safety >= 1.0)) {
        throw ValidationError("envelope safety factor must be >= 1");
    }
    PairStream out;
    out.pairs.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        out.pairs.push_back(draw_pair(params, envelope_safety, rng, out.stats));
    }
    if (n > 0 && out.stats.acceptance_rate() < kMinAcceptance) {
        throw SamplerError("accept-reject acceptance rate " + std::to_string(out.stats.acceptance_rate()) +
                           " is below 1e-3");
    }
    return out;
}

PairStream sample_pair_stream(const SimConfig& cfg) {
    if (cfg.n < 2) {
        throw ValidationError("simulation needs n >= 2");
    }
    Rng rng = Rng::stream(cfg.seed, 0);
    return sample_pairs(cfg.params, cfg.n, cfg.envelope_safety, rng);
}

EventLog assemble_event_log(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<model::EventRecord> records;
    records.reserve(pairs.size());
    double t = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [t_star, w] = pairs[k];
        if (!(t_star > 0.0) || !(w >= 0.0)) {
            throw ValidationError("pair " + std::to_string(k + 1) + " needs t* > 0 and w >= 0");
        }
        t += t_star;
        records.push_back({static_cast<int>(k) + 1, t, t + w});
    }
    return EventLog(std::move(records));
}

namespace {

ReplicationOutcome run_replication(const SimConfig& cfg, int r) {
    ReplicationOutcome out;
    try {
        Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(r));
        const PairStream stream = sample_pairs(cfg.params, cfg.n, cfg.envelope_safety, rng);
        out.acceptance_rate = stream.stats.acceptance_rate();
        out.tau = copula::empirical_kendall_tau(stream.pairs);
        const EventLog log = assemble_event_log(stream.pairs);
        const auto fit = model::fit_mle(log, model::initial_params(log), cfg.fit);
        out.estimate = fit.params;
        out.iterations = fit.iterations;
        out.converged = fit.converged;
        out.included = fit.converged;
    } catch (const NumericalError&) {
        out.included = false;
    }
    return out;
}

ParameterSummary summarize(double truth, const std::vector<double>& estimates) {
    ParameterSummary s;
    s.truth = truth;
    if (estimates.empty()) {
        return s;
    }
    const double n = static_cast<double>(estimates.size());
    double sum = 0.0;
    double sq = 0.0;
    for (double e : estimates) {
        sum += e;
        sq += (e - truth) * (e - truth);
    }
    s.mean = sum / n;
    s.bias = s.mean - truth;
    s.mse = sq / n;
    return s;
}

}  // namespace

RecoveryReport recovery_study(const SimConfig& cfg) {
    if (cfg.n < 3) {
        throw ValidationError("recovery study needs n >= 3");
    }
    if (cfg.replications < 1) {
        throw ValidationError("recovery study needs at least one replication");
    }
    RecoveryReport report;
    report.n = cfg.n;
    report.replications = cfg.replications;
    report.outcomes.resize(static_cast<std::size_t>(cfg.replications));

    int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, cfg.replications);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int r = next++; r < cfg.replications; r = next++) {
            try {
                report.outcomes[static_cast<std::size_t>(r)] = run_replication(cfg, r);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < workers; ++k) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::vector<double> b1;
    std::vector<double> b2;
    std::vector<double> th;
    double tau_sum = 0.0;
    double acc_sum = 0.0;
    report.min_acceptance = 1.0;
    for (const auto& o : report.outcomes) {
        if (!o.included) {
            ++report.excluded;
            continue;
        }
        ++report.included;
        b1.push_back(o.estimate.beta1);
        b2.push_back(o.estimate.beta2);
        th.push_back(o.estimate.theta.value());
        tau_sum += o.tau;
        acc_sum += o.acceptance_rate;
        report.min_acceptance = std::min(report.min_acceptance, o.acceptance_rate);
    }
    report.beta1 = summarize(cfg.params.beta1, b1);
    report.beta2 = summarize(cfg.params.beta2, b2);
    report.theta = summarize(cfg.params.theta.value(), th);
    if (report.included > 0) {
        report.mean_tau = tau_sum / report.included;
        report.mean_acceptance = acc_sum / report.included;
    }
    return report;
}

RatioRow report_ratio_table(const SimConfig& cfg, int years) {
    if (years < 1) {
        throw ValidationError("ratio table needs at least one year");
    }
    if (cfg.n < 1) {
        throw ValidationError("ratio table needs n >= 1");
    }
    constexpr long long kMaxPortfolios = 10'000'000;
    RatioRow row;
    row.years = years;
    row.n = cfg.n;
    row.counts.assign(static_cast<std::size_t>(years), 0);

    Rng rng = Rng::stream(cfg.seed, 0);
    SamplerStats stats;
    const double span = static_cast<double>(years);
    int collected = 0;
    for (long long portfolio = 0; collected < cfg.n; ++portfolio) {
        if (portfolio >= kMaxPortfolios) {
            throw ValidationError("no simulated event reported in the final year after " +
                                  std::to_string(kMaxPortfolios) + " portfolios");
        }
        double t = 0.0;
        while (collected < cfg.n) {
            const auto [t_star, w] = draw_pair(cfg.params, cfg.envelope_safety, rng, stats);
            t += t_star;
            if (t >= span) {
                break;
            }
            const double s = t + w;
            if (s >= span - 1.0 && s < span) {
                const int lag = years - 1 - static_cast<int>(std::floor(t));
                ++row.counts[static_cast<std::size_t>(lag)];
                ++collected;
            }
        }
    }
    for (long long c : row.counts) {
        row.shares.push_back(static_cast<double>(c) / static_cast<double>(cfg.n));
    }
    return row;
}

}  // namespace ibnr::sim
