#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "ibnr/claims_model.hpp"
#include "ibnr/copula.hpp"
#include "ibnr/errors.hpp"
#include "ibnr/simulation.hpp"

using namespace ibnr;
using model::ModelParams;

namespace {

const ModelParams kBase{0.5, 0.5, 1.5};

// Clayton conditional distribution of V given U = u, written out from the copula CDF.
double clayton_h(double u, double v, double theta) {
    return std::pow(u, -theta - 1.0) * std::pow(std::pow(u, -theta) + std::pow(v, -theta) - 1.0, -1.0 / theta - 1.0);
}

double uniform_ks_p(std::vector<double> z) {
    const double n = static_cast<double>(z.size());
    const double d = model::ks_statistic(std::move(z), [](double x) { return std::clamp(x, 0.0, 1.0); });
    return model::kolmogorov_survival(std::sqrt(n) * d);
}

}  // namespace

TEST(Rng, DeterministicAndStreamsDiffer) {
    auto a = sim::Rng::stream(42, 0);
    auto b = sim::Rng::stream(42, 0);
    auto c = sim::Rng::stream(42, 1);
    auto d = sim::Rng::stream(43, 0);
    int same_c = 0;
    int same_d = 0;
    for (int k = 0; k < 1000; ++k) {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        same_c += x == c.uniform() ? 1 : 0;
        same_d += x == d.uniform() ? 1 : 0;
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
    EXPECT_EQ(same_c, 0);
    EXPECT_EQ(same_d, 0);
}

TEST(Rng, UniformAndExponentialLaws) {
    auto rng = sim::Rng::stream(5, 0);
    std::vector<double> u(20000);
    std::vector<double> e(20000);
    for (auto& x : u) {
        x = rng.uniform();
    }
    for (auto& x : e) {
        x = rng.exponential(2.0);
    }
    EXPECT_GT(uniform_ks_p(u), 0.01);
    EXPECT_GT(model::ks_exponential(e, 2.0).p_value, 0.01);
    EXPECT_NEAR(std::accumulate(e.begin(), e.end(), 0.0) / 20000.0, 0.5, 0.02);
}

TEST(Envelope, BoundsTheDenseSupremum) {
    for (double theta : {0.3, 1.5, 5.0, 20.0}) {
        const ModelParams p(0.5, 0.8, theta);
        for (double t_star : {1e-3, 0.2, 1.0, 4.0, 30.0}) {
            const double u = -std::expm1(-p.beta1 * t_star);
            double dense = 0.0;
            // Log-spaced in v near 0 and in 1 - v near 1.
            for (int k = 0; k < 200000; ++k) {
                const double x = std::exp(-30.0 + 30.0 * k / 200000.0);
                dense = std::max(dense, copula::clayton_density({u, x}, p.theta));
                dense = std::max(dense, copula::clayton_density({u, 1.0 - x}, p.theta));
            }
            const double m = sim::envelope_constant(t_star, p, 1.0);
            EXPECT_GE(m, 0.99 * dense) << theta << " " << t_star;
            EXPECT_LE(m, dense * (1.0 + 1e-9)) << theta << " " << t_star;
            EXPECT_NEAR(sim::envelope_constant(t_star, p, 1.1), 1.1 * m, 1e-12 * m);
        }
    }
    EXPECT_EQ(sim::envelope_constant(1.0, ModelParams(0.5, 0.5, 0.0), 1.1), 1.1);
    EXPECT_THROW(sim::envelope_constant(0.0, kBase, 1.1), DomainError);
}

TEST(Sampler, ConditionalLawByRosenblattTransform) {
    // Under the model, h(F2(W) | F1(T*)) is uniform and independent of T*.
    for (double theta : {0.5, 1.5, 6.0}) {
        const ModelParams p(0.5, 0.5, theta);
        auto rng = sim::Rng::stream(77, 0);
        const auto s = sim::sample_pairs(p, 5000, 1.1, rng);
        std::vector<double> z;
        std::vector<double> u;
        for (const auto& [t_star, w] : s.pairs) {
            const double uu = -std::expm1(-p.beta1 * t_star);
            z.push_back(clayton_h(uu, -std::expm1(-p.beta2 * w), theta));
            u.push_back(uu);
        }
        EXPECT_GT(uniform_ks_p(z), 0.01) << theta;
        EXPECT_GT(uniform_ks_p(u), 0.01) << theta;
        EXPECT_LE(s.stats.max_ratio_fraction, 1.0);
        EXPECT_GT(s.stats.acceptance_rate(), 0.01);
        EXPECT_EQ(s.stats.accepted, 5000);
    }
}

TEST(Sampler, MarginsAndKendallTau) {
    auto rng = sim::Rng::stream(2024, 0);
    const auto s = sim::sample_pairs(kBase, 5000, 1.1, rng);
    std::vector<double> t;
    std::vector<double> w;
    for (const auto& [a, b] : s.pairs) {
        t.push_back(a);
        w.push_back(b);
    }
    EXPECT_GT(model::ks_exponential(t, 0.5).p_value, 0.01);
    EXPECT_GT(model::ks_exponential(w, 0.5).p_value, 0.01);
    EXPECT_NEAR(copula::empirical_kendall_tau(s.pairs), 3.0 / 7.0, 0.03);
}

TEST(Sampler, Arguments) {
    auto rng = sim::Rng::stream(1, 0);
    EXPECT_TRUE(sim::sample_pairs(kBase, 0, 1.1, rng).pairs.empty());
    EXPECT_THROW(sim::sample_pairs(kBase, -1, 1.1, rng), ValidationError);
    EXPECT_THROW(sim::sample_pairs(kBase, 5, 0.9, rng), ValidationError);
    sim::SimConfig cfg;
    cfg.n = 1;
    EXPECT_THROW(sim::sample_pair_stream(cfg), ValidationError);
}

TEST(Sampler, StreamMatchesConfig) {
    sim::SimConfig cfg;
    cfg.n = 50;
    cfg.seed = 99;
    auto rng = sim::Rng::stream(99, 0);
    EXPECT_EQ(sim::sample_pair_stream(cfg).pairs, sim::sample_pairs(cfg.params, 50, cfg.envelope_safety, rng).pairs);
}

TEST(AssembleEventLog, RunningSums) {
    const auto log = sim::assemble_event_log({{0.5, 2.0}, {1.0, 0.25}, {0.25, 1.0}});
    ASSERT_EQ(log.size(), 3u);
    EXPECT_EQ(log[0], (model::EventRecord{1, 0.5, 2.5}));
    EXPECT_EQ(log[1], (model::EventRecord{2, 1.5, 1.75}));
    EXPECT_EQ(log[2], (model::EventRecord{3, 1.75, 2.75}));
    EXPECT_THROW(sim::assemble_event_log({{0.0, 1.0}}), ValidationError);
    EXPECT_THROW(sim::assemble_event_log({{1.0, -1.0}}), ValidationError);
}

TEST(RecoveryStudy, SingleReplicationAndWorkerIndependence) {
    sim::SimConfig cfg;
    cfg.n = 40;
    cfg.replications = 3;
    cfg.seed = 12;
    cfg.workers = 1;
    const auto serial = sim::recovery_study(cfg);
    cfg.workers = 3;
    const auto parallel = sim::recovery_study(cfg);
    ASSERT_EQ(serial.outcomes.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(serial.outcomes[k].estimate, parallel.outcomes[k].estimate);
    }
    EXPECT_EQ(serial.beta1.mse, parallel.beta1.mse);
    EXPECT_EQ(serial.included + serial.excluded, 3);

    // One replication: the summary is that fit's deviation.
    cfg.replications = 1;
    const auto one = sim::recovery_study(cfg);
    ASSERT_EQ(one.included, 1);
    const double d = one.outcomes[0].estimate.theta.value() - 1.5;
    EXPECT_DOUBLE_EQ(one.theta.bias, d);
    EXPECT_DOUBLE_EQ(one.theta.mse, d * d);
    EXPECT_EQ(one.outcomes[0].estimate, serial.outcomes[0].estimate);

    cfg.replications = 0;
    EXPECT_THROW(sim::recovery_study(cfg), ValidationError);
}

TEST(RatioTable, SharesSumToOne) {
    sim::SimConfig cfg;
    cfg.n = 2000;
    cfg.seed = 8;
    const auto row = sim::report_ratio_table(cfg, 7);
    ASSERT_EQ(row.counts.size(), 7u);
    EXPECT_EQ(std::accumulate(row.counts.begin(), row.counts.end(), 0LL), 2000);
    EXPECT_NEAR(std::accumulate(row.shares.begin(), row.shares.end(), 0.0), 1.0, 1e-12);
    for (double s : row.shares) {
        EXPECT_GE(s, 0.0);
    }
    EXPECT_EQ(sim::report_ratio_table(cfg, 7).counts, row.counts);
    EXPECT_THROW(sim::report_ratio_table(cfg, 0), ValidationError);
}
