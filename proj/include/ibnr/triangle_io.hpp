#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ibnr/chain_ladder.hpp"
#include "ibnr/claims_model.hpp"
#include "ibnr/simulation.hpp"

namespace ibnr::io {

/// Days per year used to turn calendar dates into fractional years.
inline constexpr double kDaysPerYear = 365.25;

double date_to_years(std::chrono::year_month_day date, std::chrono::year_month_day origin);
std::chrono::year_month_day years_to_date(double years, std::chrono::year_month_day origin);
/// Parses YYYY-MM-DD; nullopt if the text is not a valid date.
std::optional<std::chrono::year_month_day> parse_date(const std::string& text);
std::string format_date(std::chrono::year_month_day date);

/**
 * Reads `event_id,occurrence,report` rows.
 *
 * Times are either fractional years or YYYY-MM-DD dates. Dates are measured from
 * `origin`, defaulting to 1 January of the earliest occurrence year. Rows are sorted by
 * occurrence and re-indexed from 1. Throws ParseError with the line number, or
 * ValidationError naming the event id when a report precedes its occurrence.
 */
model::EventLog read_event_log(const std::filesystem::path& path,
                               std::optional<std::chrono::year_month_day> origin = std::nullopt);

struct EventLogFile {
    model::EventLog log;
    /// Origin the dates were measured from; nullopt when the file holds year fractions.
    std::optional<std::chrono::year_month_day> origin;
};
EventLogFile read_event_file(const std::filesystem::path& path,
                             std::optional<std::chrono::year_month_day> origin = std::nullopt);
void write_event_log(const model::EventLog& log, const std::filesystem::path& path);

/**
 * Triangle CSV.
 *
 *   cumulative,0,1,2
 *   2010,5866,9237,9720
 *   2011,19295,23307,23897*
 *   2012,20987,,
 *
 * The first header cell is the kind; the rest are development years. The first column
 * holds consecutive accident years. Empty cells are unobserved and a trailing '*' marks a
 * projected value. Observed cells must fill exactly the staircase i + j <= rows - 1.
 */
cl::Triangle read_triangle(const std::filesystem::path& path);

/// Full precision by default; `presentation` rounds half away from zero to integers.
void write_triangle(const cl::Triangle& t, const std::filesystem::path& path, bool presentation = false);

/// Percentages with four decimals; blank cells are empty strings.
void write_report(const cl::ErrorTable& table, const std::filesystem::path& path);
cl::ErrorTable read_report(const std::filesystem::path& path);
std::string format_percentage(double value);

void write_factors(const cl::DevFactors& f, const std::filesystem::path& path);
void write_forecast(const model::IbnrForecast& forecast, int origin_year, const std::filesystem::path& path);
void write_recovery_report(const std::vector<sim::RecoveryReport>& reports, const std::filesystem::path& path);
void write_ratio_rows(const std::vector<sim::RatioRow>& rows, int final_year, const std::filesystem::path& path);

/// Flat `key=value` text; keys are written in sorted order.
using Manifest = std::map<std::string, std::string>;
void write_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

/// Shortest round-tripping decimal form of a double.
std::string format_double(double x);

}  // namespace ibnr::io
