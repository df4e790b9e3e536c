#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ibnr/claims_model.hpp"

namespace ibnr::sim {

using model::EventLog;
using model::ModelParams;

/**
 * Seedable generator with derived independent streams.
 *
 * Stream k of master seed s is an mt19937_64 seeded through std::seed_seq from (s, k),
 * so replication k draws the same numbers whether replications run serially or in
 * parallel. Variates are produced by inversion from 53-bit uniforms, which keeps streams
 * bit-identical across standard library implementations.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    static Rng stream(std::uint64_t master_seed, std::uint64_t index);

    /// Uniform on the open interval (0, 1).
    double uniform();
    double exponential(double rate);

private:
    std::mt19937_64 engine_;
};

struct SimConfig {
    ModelParams params{0.5, 0.5, 1.5};
    int n = 200;
    int replications = 200;
    std::uint64_t seed = 20240601;
    double envelope_safety = 1.1;
    model::OptimizerOptions fit{};
    int workers = 0;  // 0: hardware concurrency
};

struct SamplerStats {
    long long proposals = 0;
    long long accepted = 0;
    /// Largest density ratio seen divided by the envelope in force; always <= 1.
    double max_ratio_fraction = 0.0;

    [[nodiscard]] double acceptance_rate() const noexcept {
        return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
    }
};

struct PairStream {
    std::vector<std::pair<double, double>> pairs;  // (t*, w)
    SamplerStats stats;
};

/**
 * Envelope M for the accept-reject step at T* = t*: the largest ratio of the conditional
 * delay density to the Exponential(beta2) proposal density, i.e. max_v c(u, v) with
 * u = F1(t*), found on a 512-point log-spaced grid of delays, times `safety`.
 */
double envelope_constant(double t_star, const ModelParams& params, double safety);

/// Draws n dependent (t*, w) pairs by accept-reject. Throws SamplerError on an envelope
/// violation or when the acceptance rate falls below 1e-3.
PairStream sample_pairs(const ModelParams& params, int n, double envelope_safety, Rng& rng);

/// sample_pairs on stream 0 of cfg.seed.
PairStream sample_pair_stream(const SimConfig& cfg);

/// t_i = running sum of t*, s_i = t_i + w_i.
EventLog assemble_event_log(const std::vector<std::pair<double, double>>& pairs);

struct ParameterSummary {
    double truth = 0.0;
    double mean = 0.0;
    double bias = 0.0;
    double mse = 0.0;
};

struct ReplicationOutcome {
    bool included = false;
    model::ModelParams estimate{1.0, 1.0, 0.0};
    double tau = 0.0;
    double acceptance_rate = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct RecoveryReport {
    int n = 0;
    int replications = 0;
    int included = 0;
    int excluded = 0;
    ParameterSummary beta1;
    ParameterSummary beta2;
    ParameterSummary theta;
    double mean_tau = 0.0;
    double mean_acceptance = 0.0;
    double min_acceptance = 0.0;
    std::vector<ReplicationOutcome> outcomes;

    [[nodiscard]] double exclusion_rate() const noexcept {
        return replications == 0 ? 0.0 : static_cast<double>(excluded) / static_cast<double>(replications);
    }
};

/// Per replication: sample, assemble, fit from initial_params. Replications that fail to
/// converge or throw a numerical error are excluded and counted.
RecoveryReport recovery_study(const SimConfig& cfg);

/// counts[k]: events reported in the final year that occurred k years earlier.
struct RatioRow {
    int years = 0;
    int n = 0;
    std::vector<long long> counts;
    std::vector<double> shares;
};

/**
 * Occurrence-year mix of claims reported in the final year of a `years`-long span.
 *
 * Independent portfolios are simulated over [0, years) from stream 0 of cfg.seed until
 * cfg.n events reported in [years-1, years) have been collected.
 */
RatioRow report_ratio_table(const SimConfig& cfg, int years);

}  // namespace ibnr::sim
