#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ibnr/chain_ladder.hpp"
#include "ibnr/errors.hpp"
#include "ibnr/triangle_io.hpp"

using namespace ibnr;
using cl::CellState;
using cl::Triangle;
using cl::TriangleKind;

namespace {

const std::string kFixtures = IBNR_FIXTURES;

Triangle fixture(const std::string& name) { return io::read_triangle(kFixtures + "/" + name); }

using Rows = std::vector<std::vector<double>>;

// Upper triangle as plain rows: row i has rows - i entries.
Rows upper_rows(const Triangle& t) {
    Rows r;
    for (int i = 0; i < t.rows(); ++i) {
        r.emplace_back();
        for (int j = 0; j + i <= t.cutoff(); ++j) {
            r.back().push_back(t.value(i, j));
        }
    }
    return r;
}

// Volume-weighted factors straight from the definition.
std::vector<double> oracle_factors(const Rows& c) {
    std::vector<double> f;
    for (std::size_t j = 1; j < c.size(); ++j) {
        double num = 0.0;
        double den = 0.0;
        for (const auto& row : c) {
            if (row.size() > j) {
                num += row[j];
                den += row[j - 1];
            }
        }
        f.push_back(num / den);
    }
    return f;
}

Triangle random_cumulative(std::mt19937_64& gen, int n) {
    std::uniform_real_distribution<double> first(100.0, 5000.0);
    std::uniform_real_distribution<double> growth(0.0, 0.6);
    Triangle t(2000, n, n, TriangleKind::cumulative);
    for (int i = 0; i < n; ++i) {
        double v = first(gen);
        for (int j = 0; i + j < n; ++j) {
            t.set_observed(i, j, v);
            v *= 1.0 + growth(gen);
        }
    }
    return t;
}

}  // namespace

TEST(Triangle, StaircaseEnforced) {
    Triangle t(2010, 3, 3, TriangleKind::cumulative);
    EXPECT_EQ(t.cutoff(), 2);
    EXPECT_EQ(t.state(0, 2), CellState::observed);
    EXPECT_EQ(t.state(1, 2), CellState::unobserved);
    EXPECT_THROW(t.set_observed(1, 2, 5.0), ValidationError);
    EXPECT_THROW(t.set_projected(1, 1, 5.0), ValidationError);
    t.set_projected(1, 2, 5.0);
    EXPECT_EQ(t.state(1, 2), CellState::projected);
    EXPECT_EQ(t.get(1, 2), 5.0);
    t.clear(1, 2);
    EXPECT_FALSE(t.get(1, 2).has_value());
    EXPECT_THROW(t.value(2, 1), std::exception);
    EXPECT_THROW(t.state(3, 0), std::exception);
}

TEST(Triangle, CumulativeIncrementalRoundTrip) {
    std::mt19937_64 gen(9);
    for (int n : {1, 2, 6, 10}) {
        const auto c = random_cumulative(gen, n);
        const auto inc = cl::to_incremental(c);
        EXPECT_EQ(inc.kind(), TriangleKind::incremental);
        const auto back = cl::to_cumulative(inc);
        ASSERT_EQ(back.rows(), n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; i + j < n; ++j) {
                EXPECT_NEAR(back.value(i, j), c.value(i, j), 1e-9 * c.value(i, j));
            }
        }
    }
}

TEST(DevFactors, Valuation2015) {
    const auto c = fixture("cl_2015_upper.csv");
    const auto f = cl::dev_factors(c);
    const auto want = oracle_factors(upper_rows(c));
    ASSERT_EQ(f.size(), want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
        EXPECT_NEAR(f.values()[k], want[k], 1e-14) << k;
    }
    // f_5 uses the 2010 row only.
    EXPECT_NEAR(f.factor(5), 9810.0 / 9805.0, 1e-15);
    EXPECT_THROW(f.factor(0), std::exception);
    EXPECT_THROW(f.factor(6), std::exception);
}

TEST(DevFactors, NeedAtLeastOnePair) {
    // Two accident years but three development years: nothing carries column 1 to 2.
    Triangle wide(2010, 2, 3, TriangleKind::cumulative);
    wide.set_observed(0, 0, 10.0);
    wide.set_observed(0, 1, 12.0);
    wide.set_observed(1, 0, 11.0);
    EXPECT_THROW(cl::dev_factors(wide), ValidationError);
    Triangle zero(2010, 2, 2, TriangleKind::cumulative);
    EXPECT_THROW(cl::dev_factors(zero), ValidationError);
    Triangle one(2010, 1, 1, TriangleKind::cumulative);
    one.set_observed(0, 0, 10.0);
    EXPECT_EQ(cl::dev_factors(one).size(), 0u);
    EXPECT_THROW(cl::dev_factors(cl::to_incremental(fixture("cl_2015_upper.csv"))), ValidationError);
    EXPECT_THROW(cl::DevFactors({1.0, -2.0}), std::exception);
}

TEST(Project, Valuation2015MatchesPrintedProjection) {
    const auto c = fixture("cl_2015_upper.csv");
    const auto p = cl::project(c, cl::dev_factors(c));
    const auto printed = fixture("cl_2015_projected.csv");
    for (int i = 0; i < c.rows(); ++i) {
        for (int j = 0; j < c.cols(); ++j) {
            EXPECT_EQ(p.state(i, j), printed.state(i, j));
            EXPECT_NEAR(p.value(i, j), printed.value(i, j), 0.5 + 1e-9) << i << "," << j;
        }
    }
}

TEST(Project, ChainedProductFromTheDiagonal) {
    std::mt19937_64 gen(3);
    const auto c = random_cumulative(gen, 7);
    const auto f = cl::dev_factors(c);
    const auto p = cl::project(c, f);
    for (int i = 1; i < 7; ++i) {
        double v = c.value(i, 6 - i);
        for (int j = 7 - i; j < 7; ++j) {
            v *= f.factor(j);
            EXPECT_NEAR(p.value(i, j), v, 1e-9 * v);
        }
    }
}

TEST(Project, IdentityFixtureLeavesRowsFlat) {
    const auto c = fixture("identity_upper.csv");
    const auto f = cl::dev_factors(c);
    for (double v : f.values()) {
        EXPECT_EQ(v, 1.0);
    }
    const auto p = cl::project(c, f);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            EXPECT_EQ(p.value(i, j), c.value(i, 0));
        }
    }
}

TEST(Project, FactorsOfProjectionReproduceInput) {
    // Completing the square with its own factors leaves the factors unchanged.
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 5; ++rep) {
        const auto c = random_cumulative(gen, 6);
        const auto f = cl::dev_factors(c);
        const auto again = cl::dev_factors(cl::project(c, f), true);
        for (std::size_t k = 0; k < f.size(); ++k) {
            EXPECT_NEAR(again.values()[k], f.values()[k], 1e-12);
        }
    }
}

TEST(Project, Monotone) {
    std::mt19937_64 gen(17);
    const auto c = random_cumulative(gen, 8);
    const auto p = cl::project(c, cl::dev_factors(c));
    for (int i = 0; i < 8; ++i) {
        for (int j = 1; j < 8; ++j) {
            EXPECT_GE(p.value(i, j), p.value(i, j - 1));
        }
    }
}

TEST(ErrorTable, IdenticalInputsGiveZeros) {
    const auto c = fixture("cl_2015_upper.csv");
    const auto p = cl::project(c, cl::dev_factors(c));
    const auto e = cl::error_table(p, p);
    for (int i = 0; i < e.rows; ++i) {
        for (int j = 0; j < e.cols; ++j) {
            EXPECT_EQ(e.at(i, j).has_value(), i + j > 5);
            if (e.at(i, j)) {
                EXPECT_EQ(*e.at(i, j), 0.0);
            }
        }
    }
    EXPECT_EQ(e.mean(), 0.0);
}

TEST(ErrorTable, AgainstLaterValuation) {
    // The printed percentages are taken against the rounded projection.
    const auto predicted = fixture("cl_2015_projected.csv");
    const auto actual = fixture("cl_2016_upper.csv");
    const auto e = cl::error_table(actual, predicted);
    ASSERT_EQ(e.rows, 6);
    ASSERT_EQ(e.cols, 6);
    auto pct = [&](int i, int j) {
        return std::abs(actual.value(i, j) - predicted.value(i, j)) * 100.0 / predicted.value(i, j);
    };
    EXPECT_NEAR(*e.at(5, 1), pct(5, 1), 1e-12);
    EXPECT_EQ(io::format_percentage(*e.at(5, 1)), "4.0052");
    EXPECT_EQ(io::format_percentage(*e.at(1, 5)), "0.0249");
    EXPECT_FALSE(e.at(0, 5).has_value());
}

TEST(ErrorTable, ShapeAndOriginChecks) {
    const auto small = fixture("identity_upper.csv");
    const auto big = fixture("cl_2015_upper.csv");
    EXPECT_THROW(cl::error_table(small, big), ValidationError);
    Triangle shifted(2011, 6, 6, TriangleKind::cumulative);
    EXPECT_THROW(cl::error_table(shifted, big), ValidationError);
}

TEST(ErrorTable, MeanSkipsBlanks) {
    cl::ErrorTable e{2000, 2, 2, {std::nullopt, 1.0, 3.0, std::nullopt}};
    EXPECT_EQ(e.mean(), 2.0);
    cl::ErrorTable blank{2000, 1, 1, {std::nullopt}};
    EXPECT_FALSE(blank.mean().has_value());
}
