#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ibnr/chain_ladder.hpp"
#include "ibnr/errors.hpp"
#include "ibnr/triangle_io.hpp"

using namespace ibnr;
using namespace std::chrono;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = IBNR_FIXTURES;

class Io : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ibnr_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) const {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }
    static std::string slurp(const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    fs::path path(const std::string& name) const { return dir_ / name; }

    fs::path dir_;
};

std::size_t parse_error_line(const std::function<void()>& f) {
    try {
        f();
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST_F(Io, ValuationFixtureParses) {
    const auto t = io::read_triangle(kFixtures + "/cl_2015_upper.csv");
    EXPECT_EQ(t.kind(), cl::TriangleKind::cumulative);
    EXPECT_EQ(t.origin_year(), 2010);
    EXPECT_EQ(t.rows(), 6);
    EXPECT_EQ(t.cols(), 6);
    EXPECT_EQ(t.value(0, 0), 5866.0);
    EXPECT_EQ(t.value(5, 0), 19329.0);
    EXPECT_FALSE(t.has_value(1, 5));

    const auto printed = io::read_triangle(kFixtures + "/cl_2015_projected.csv");
    EXPECT_EQ(printed.state(1, 5), cl::CellState::projected);
    EXPECT_EQ(printed.value(1, 5), 24125.0);
}

TEST_F(Io, TriangleRoundTripKeepsFullPrecision) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> d(1.0, 1e6);
    cl::Triangle t(1999, 5, 5, cl::TriangleKind::cumulative);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            if (i + j <= 4) {
                t.set_observed(i, j, d(gen));
            } else if (j % 2 == 0) {
                t.set_projected(i, j, d(gen));
            }
        }
    }
    io::write_triangle(t, path("t.csv"));
    EXPECT_EQ(io::read_triangle(path("t.csv")), t);

    io::write_triangle(t, path("r.csv"), true);
    const auto r = io::read_triangle(path("r.csv"));
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            ASSERT_EQ(r.state(i, j), t.state(i, j));
            if (t.has_value(i, j)) {
                EXPECT_EQ(r.value(i, j), std::round(t.value(i, j)));
            }
        }
    }
}

TEST_F(Io, TriangleErrors) {
    EXPECT_EQ(parse_error_line([&] { io::read_triangle(write("a.csv", "gross,0,1\n2010,1,2\n2011,3,\n")); }), 1u);
    EXPECT_EQ(parse_error_line([&] { io::read_triangle(write("b.csv", "cumulative,0,1\n2010,1,2\n2011,3\n")); }), 3u);
    EXPECT_EQ(parse_error_line([&] { io::read_triangle(write("c.csv", "cumulative,0,1\n2010,1,2\n2012,3,\n")); }), 3u);
    EXPECT_EQ(parse_error_line([&] { io::read_triangle(write("d.csv", "cumulative,0,1\n2010,1,\n2011,3,\n")); }), 2u);
    EXPECT_EQ(parse_error_line([&] { io::read_triangle(write("e.csv", "cumulative,0,1\n2010,1,2\n2011,3,4\n")); }), 3u);
    EXPECT_EQ(parse_error_line([&] { io::read_triangle(write("f.csv", "cumulative,0,1\n2010,1,2*\n2011,3,\n")); }), 2u);
    EXPECT_EQ(parse_error_line([&] { io::read_triangle(write("g.csv", "cumulative,0,1\n2010,1,x\n2011,3,\n")); }), 2u);
    EXPECT_EQ(parse_error_line([&] { io::read_triangle(write("h.csv", "cumulative,0,2\n2010,1,2\n2011,3,\n")); }), 1u);
    EXPECT_THROW(io::read_triangle(write("empty.csv", "")), ParseError);
    EXPECT_THROW(io::read_triangle(path("missing.csv")), ValidationError);
}

TEST_F(Io, EventLogRoundTrip) {
    const auto log = model::EventLog::from_times({{0.1, 0.35}, {1.0 / 3.0, 2.0}, {2.75, 2.75}});
    io::write_event_log(log, path("e.csv"));
    EXPECT_EQ(io::read_event_log(path("e.csv")), log);
    EXPECT_EQ(slurp(path("e.csv")).substr(0, 27), "event_id,occurrence,report\n");
}

TEST_F(Io, EventLogSortsAndReindexes) {
    const auto log = io::read_event_log(write("e.csv", "event_id,occurrence,report\nb,2.0,3.0\na,0.5,0.9\n\n"));
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[0], (model::EventRecord{1, 0.5, 0.9}));
    EXPECT_EQ(log[1], (model::EventRecord{2, 2.0, 3.0}));
    EXPECT_TRUE(io::read_event_log(write("h.csv", "event_id,occurrence,report\n")).empty());
}

TEST_F(Io, EventLogErrors) {
    EXPECT_EQ(parse_error_line([&] { io::read_event_log(write("a.csv", "id,t,s\n1,0.5,1\n")); }), 1u);
    EXPECT_EQ(parse_error_line([&] { io::read_event_log(write("b.csv", "event_id,occurrence,report\n1,0.5,1\n2,0.7\n")); }),
              3u);
    EXPECT_EQ(parse_error_line([&] { io::read_event_log(write("c.csv", "event_id,occurrence,report\n1,abc,1\n")); }), 2u);
    EXPECT_EQ(parse_error_line([&] { io::read_event_log(write("d.csv", "event_id,occurrence,report\n1,-0.5,1\n")); }), 2u);
    try {
        io::read_event_log(write("e.csv", "event_id,occurrence,report\nc1,0.5,1\nc2,0.9,0.8\n"));
        FAIL() << "expected a validation error";
    } catch (const ParseError&) {
        FAIL() << "a report before its occurrence is a validation error, not a parse error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("c2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST_F(Io, DatesRoundTripToTheDay) {
    const year_month_day origin{year(2010), January, day(1)};
    for (int offset = 0; offset < 3000; offset += 37) {
        const year_month_day d{sys_days(origin) + days(offset)};
        EXPECT_EQ(io::years_to_date(io::date_to_years(d, origin), origin), d);
        EXPECT_EQ(io::parse_date(io::format_date(d)), d);
    }
    EXPECT_NEAR(io::date_to_years(year_month_day{year(2011), January, day(1)}, origin), 365.0 / 365.25, 1e-15);
    EXPECT_FALSE(io::parse_date("2010-02-30").has_value());
    EXPECT_FALSE(io::parse_date("20100101").has_value());
    EXPECT_EQ(io::format_date(year_month_day{year(2012), March, day(5)}), "2012-03-05");
}

TEST_F(Io, DatedEventLog) {
    const auto p = write("d.csv", "event_id,occurrence,report\n1,2012-07-01,2013-01-15\n2,2011-03-02,2011-03-09\n");
    const auto f = io::read_event_file(p);
    ASSERT_TRUE(f.origin.has_value());
    EXPECT_EQ(*f.origin, (year_month_day{year(2011), January, day(1)}));
    ASSERT_EQ(f.log.size(), 2u);
    EXPECT_NEAR(f.log[0].t, 60.0 / 365.25, 1e-15);
    EXPECT_NEAR(f.log[0].delay(), 7.0 / 365.25, 1e-14);

    const year_month_day explicit_origin{year(2010), January, day(1)};
    EXPECT_NEAR(io::read_event_log(p, explicit_origin)[0].t, 425.0 / 365.25, 1e-15);
    EXPECT_THROW(io::read_event_log(p, year_month_day{year(2012), January, day(1)}), ParseError);
    EXPECT_FALSE(io::read_event_file(write("n.csv", "event_id,occurrence,report\n1,0.5,1\n")).origin.has_value());
}

TEST_F(Io, ReportRendering) {
    cl::ErrorTable e{2010, 2, 3, {std::nullopt, 4.00523, 0.04386, 0.0, std::nullopt, 12.5}};
    io::write_report(e, path("r.csv"));
    EXPECT_EQ(slurp(path("r.csv")), "accident_year,0,1,2\n2010,,4.0052,0.0439\n2011,0.0000,,12.5000\n");
    const auto back = io::read_report(path("r.csv"));
    EXPECT_EQ(back.origin_year, 2010);
    EXPECT_EQ(back.cells[1], 4.0052);
    EXPECT_FALSE(back.cells[4].has_value());

    cl::ErrorTable empty{2010, 0, 0, {}};
    io::write_report(empty, path("empty.csv"));
    EXPECT_EQ(slurp(path("empty.csv")), "accident_year\n");
}

TEST_F(Io, PrintedReportsParse) {
    const auto grid = io::read_report(kFixtures + "/cl_2015_errors.csv");
    EXPECT_EQ(grid.rows, 6);
    EXPECT_EQ(grid.at(5, 1), 4.0052);
    EXPECT_EQ(grid.at(1, 5), 0.0249);
    EXPECT_FALSE(grid.at(0, 0).has_value());
}

TEST_F(Io, NumberFormats) {
    EXPECT_EQ(io::format_double(0.1), "0.1");
    EXPECT_EQ(io::format_double(1.0 / 3.0), "0.3333333333333333");
    EXPECT_EQ(io::format_percentage(4.00525), "4.0053");
    EXPECT_EQ(io::format_percentage(0.0), "0.0000");
}

TEST_F(Io, ManifestRoundTrip) {
    const io::Manifest m{{"seed", "42"}, {"tol", "1e-08"}, {"command", "fit"}};
    io::write_manifest(m, path("m.txt"));
    EXPECT_EQ(slurp(path("m.txt")), "command=fit\nseed=42\ntol=1e-08\n");
    EXPECT_EQ(io::read_manifest(path("m.txt")), m);
    EXPECT_EQ(io::read_manifest(write("c.txt", "# note\nk=v=w\n")).at("k"), "v=w");
    EXPECT_EQ(parse_error_line([&] { io::read_manifest(write("bad.txt", "a=1\nbroken\n")); }), 2u);
}

TEST_F(Io, FactorsAndForecast) {
    io::write_factors(cl::DevFactors({1.5, 1.25}), path("f.csv"));
    EXPECT_EQ(slurp(path("f.csv")), "development_year,factor\n1,1.5\n2,1.25\n");
    model::IbnrForecast f{2, {{0.5, 0.25}, {1.0}}};
    io::write_forecast(f, 2020, path("fc.csv"));
    const auto text = slurp(path("fc.csv"));
    EXPECT_NE(text.find("2020"), std::string::npos);
    EXPECT_NE(text.find("2021"), std::string::npos);
}
