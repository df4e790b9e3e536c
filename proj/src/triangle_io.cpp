#include "ibnr/triangle_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ibnr/errors.hpp"

namespace ibnr::io {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::optional<double> parse_number(const std::string& text) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (begin != end && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || begin == end) {
        return std::nullopt;
    }
    return v;
}

std::optional<int> parse_int(const std::string& text) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return v;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open " + path.string() + " for reading");
    }
    return in;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot open " + path.string() + " for writing");
    }
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) {
        throw ValidationError("error while writing " + path.string());
    }
}

std::vector<std::string> read_lines(const fs::path& path) {
    auto in = open_in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    return lines;
}

std::string header_row(const std::string& first, int cols) {
    std::string h = first;
    for (int j = 0; j < cols; ++j) {
        h += "," + std::to_string(j);
    }
    return h;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::string format_percentage(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

// --- dates -------------------------------------------------------------------------------

double date_to_years(std::chrono::year_month_day date, std::chrono::year_month_day origin) {
    const auto days = (std::chrono::sys_days(date) - std::chrono::sys_days(origin)).count();
    return static_cast<double>(days) / kDaysPerYear;
}

std::chrono::year_month_day years_to_date(double years, std::chrono::year_month_day origin) {
    const auto days = static_cast<long>(std::llround(years * kDaysPerYear));
    return std::chrono::year_month_day(std::chrono::sys_days(origin) + std::chrono::days(days));
}

std::optional<std::chrono::year_month_day> parse_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    const auto y = parse_int(text.substr(0, 4));
    const auto m = parse_int(text.substr(5, 2));
    const auto d = parse_int(text.substr(8, 2));
    if (!y || !m || !d) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year(*y), std::chrono::month(static_cast<unsigned>(*m)),
                                          std::chrono::day(static_cast<unsigned>(*d))};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return ymd;
}

std::string format_date(std::chrono::year_month_day date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

// --- event logs --------------------------------------------------------------------------

model::EventLog read_event_log(const fs::path& path, std::optional<std::chrono::year_month_day> origin) {
    return read_event_file(path, origin).log;
}

EventLogFile read_event_file(const fs::path& path, std::optional<std::chrono::year_month_day> origin) {
    const auto lines = read_lines(path);
    const std::string name = path.string();

    struct RawRow {
        std::size_t line;
        std::string id;
        std::string occurrence;
        std::string report;
    };
    std::vector<RawRow> raw;
    bool header_seen = false;
    for (std::size_t k = 0; k < lines.size(); ++k) {
        if (trim(lines[k]).empty()) {
            continue;
        }
        const auto cells = split_csv(lines[k]);
        if (!header_seen) {
            header_seen = true;
            if (cells.size() != 3 || cells[0] != "event_id") {
                throw ParseError(name, k + 1, "expected header event_id,occurrence,report");
            }
            continue;
        }
        if (cells.size() != 3) {
            throw ParseError(name, k + 1, "expected 3 fields, found " + std::to_string(cells.size()));
        }
        raw.push_back({k + 1, cells[0], cells[1], cells[2]});
    }
    if (raw.empty()) {
        return {{}, origin};
    }

    const bool dated = parse_date(raw.front().occurrence).has_value();
    if (dated && !origin) {
        int first_year = 1 << 30;
        for (const auto& r : raw) {
            if (const auto d = parse_date(r.occurrence)) {
                first_year = std::min(first_year, static_cast<int>(d->year()));
            }
        }
        origin = std::chrono::year_month_day{std::chrono::year(first_year), std::chrono::January, std::chrono::day(1)};
    }
    auto to_years = [&](const RawRow& r, const std::string& text) -> double {
        if (dated) {
            const auto d = parse_date(text);
            if (!d) {
                throw ParseError(name, r.line, "expected a YYYY-MM-DD date, got '" + text + "'");
            }
            return date_to_years(*d, *origin);
        }
        const auto v = parse_number(text);
        if (!v || !std::isfinite(*v)) {
            throw ParseError(name, r.line, "expected a time in years, got '" + text + "'");
        }
        return *v;
    };

    std::vector<std::pair<double, double>> times;
    times.reserve(raw.size());
    for (const auto& r : raw) {
        const double t = to_years(r, r.occurrence);
        const double s = to_years(r, r.report);
        if (t < 0.0) {
            throw ParseError(name, r.line, "event " + r.id + " occurs before the portfolio origin");
        }
        if (s < t) {
            throw ValidationError(name + ": event " + r.id + " (line " + std::to_string(r.line) +
                                  ") is reported before it occurs");
        }
        times.emplace_back(t, s);
    }
    return {model::EventLog::from_times(std::move(times)), dated ? origin : std::nullopt};
}

void write_event_log(const model::EventLog& log, const fs::path& path) {
    auto out = open_out(path);
    out << "event_id,occurrence,report\n";
    for (const auto& r : log.records()) {
        out << r.index << ',' << format_double(r.t) << ',' << format_double(r.s) << '\n';
    }
    finish(out, path);
}

// --- triangles ---------------------------------------------------------------------------

cl::Triangle read_triangle(const fs::path& path) {
    const auto lines = read_lines(path);
    const std::string name = path.string();
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    std::vector<std::string> header;
    std::size_t header_line = 0;
    for (std::size_t k = 0; k < lines.size(); ++k) {
        if (trim(lines[k]).empty()) {
            continue;
        }
        if (header.empty()) {
            header = split_csv(lines[k]);
            header_line = k + 1;
        } else {
            rows.emplace_back(k + 1, split_csv(lines[k]));
        }
    }
    if (header.empty()) {
        throw ParseError(name, 1, "missing header row");
    }
    cl::TriangleKind kind;
    if (header[0] == "cumulative") {
        kind = cl::TriangleKind::cumulative;
    } else if (header[0] == "incremental") {
        kind = cl::TriangleKind::incremental;
    } else {
        throw ParseError(name, header_line, "first header cell must be 'cumulative' or 'incremental', got '" +
                                                header[0] + "'");
    }
    const int cols = static_cast<int>(header.size()) - 1;
    for (int j = 0; j < cols; ++j) {
        if (parse_int(header[static_cast<std::size_t>(j) + 1]) != j) {
            throw ParseError(name, header_line, "development years must run 0,1,2,...");
        }
    }
    if (rows.empty() || cols < 1) {
        throw ParseError(name, header_line, "triangle has no cells");
    }

    const auto origin = parse_int(rows.front().second.front());
    if (!origin) {
        throw ParseError(name, rows.front().first, "expected an accident year");
    }
    cl::Triangle t(*origin, static_cast<int>(rows.size()), cols, kind);
    for (int i = 0; i < t.rows(); ++i) {
        const auto& [line, cells] = rows[static_cast<std::size_t>(i)];
        if (static_cast<int>(cells.size()) != cols + 1) {
            throw ParseError(name, line, "ragged row: expected " + std::to_string(cols + 1) + " fields, found " +
                                             std::to_string(cells.size()));
        }
        if (parse_int(cells[0]) != *origin + i) {
            throw ParseError(name, line, "accident years must be consecutive from " + std::to_string(*origin));
        }
        for (int j = 0; j < cols; ++j) {
            std::string cell = cells[static_cast<std::size_t>(j) + 1];
            const bool inside = cl::Triangle::in_staircase(i, j, t.cutoff());
            if (cell.empty()) {
                if (inside) {
                    throw ParseError(name, line, "observed cell for development year " + std::to_string(j) + " is blank");
                }
                continue;
            }
            const bool projected = cell.back() == '*';
            if (projected) {
                cell.pop_back();
            }
            const auto v = parse_number(cell);
            if (!v) {
                throw ParseError(name, line, "cannot parse cell '" + cells[static_cast<std::size_t>(j) + 1] + "'");
            }
            if (inside && projected) {
                throw ParseError(name, line, "cell in the observed staircase is marked projected");
            }
            if (!inside && !projected) {
                throw ParseError(name, line, "value past the calendar cutoff must be blank or marked projected with '*'");
            }
            if (inside) {
                t.set_observed(i, j, *v);
            } else {
                t.set_projected(i, j, *v);
            }
        }
    }
    return t;
}

void write_triangle(const cl::Triangle& t, const fs::path& path, bool presentation) {
    auto out = open_out(path);
    out << header_row(t.kind() == cl::TriangleKind::cumulative ? "cumulative" : "incremental", t.cols()) << '\n';
    for (int i = 0; i < t.rows(); ++i) {
        out << t.origin_year() + i;
        for (int j = 0; j < t.cols(); ++j) {
            out << ',';
            if (!t.has_value(i, j)) {
                continue;
            }
            const double v = t.value(i, j);
            out << (presentation ? std::to_string(std::llround(v)) : format_double(v));
            if (t.state(i, j) == cl::CellState::projected) {
                out << '*';
            }
        }
        out << '\n';
    }
    finish(out, path);
}

// --- reports -----------------------------------------------------------------------------

void write_report(const cl::ErrorTable& table, const fs::path& path) {
    auto out = open_out(path);
    out << header_row("accident_year", table.cols) << '\n';
    for (int i = 0; i < table.rows; ++i) {
        out << table.origin_year + i;
        for (int j = 0; j < table.cols; ++j) {
            out << ',';
            if (const auto c = table.at(i, j)) {
                out << format_percentage(*c);
            }
        }
        out << '\n';
    }
    finish(out, path);
}

cl::ErrorTable read_report(const fs::path& path) {
    const auto lines = read_lines(path);
    const std::string name = path.string();
    if (lines.empty()) {
        throw ParseError(name, 1, "missing header row");
    }
    const auto header = split_csv(lines.front());
    if (header.empty() || header[0] != "accident_year") {
        throw ParseError(name, 1, "expected header starting with accident_year");
    }
    cl::ErrorTable table;
    table.cols = static_cast<int>(header.size()) - 1;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (trim(lines[k]).empty()) {
            continue;
        }
        const auto cells = split_csv(lines[k]);
        if (static_cast<int>(cells.size()) != table.cols + 1) {
            throw ParseError(name, k + 1, "ragged row");
        }
        const auto year = parse_int(cells[0]);
        if (!year) {
            throw ParseError(name, k + 1, "expected an accident year");
        }
        if (table.rows == 0) {
            table.origin_year = *year;
        }
        ++table.rows;
        for (int j = 0; j < table.cols; ++j) {
            const auto& c = cells[static_cast<std::size_t>(j) + 1];
            if (c.empty()) {
                table.cells.emplace_back();
                continue;
            }
            const auto v = parse_number(c);
            if (!v) {
                throw ParseError(name, k + 1, "cannot parse cell '" + c + "'");
            }
            table.cells.emplace_back(*v);
        }
    }
    return table;
}

void write_factors(const cl::DevFactors& f, const fs::path& path) {
    auto out = open_out(path);
    out << "development_year,factor\n";
    for (std::size_t j = 1; j <= f.size(); ++j) {
        out << j << ',' << format_double(f.factor(static_cast<int>(j))) << '\n';
    }
    finish(out, path);
}

void write_forecast(const model::IbnrForecast& forecast, int origin_year, const fs::path& path) {
    auto out = open_out(path);
    out << header_row("accident_year", forecast.horizon) << '\n';
    for (std::size_t j = 0; j < forecast.counts.size(); ++j) {
        out << origin_year + static_cast<int>(j);
        for (int l = 0; l < forecast.horizon; ++l) {
            out << ',';
            if (static_cast<std::size_t>(l) < forecast.counts[j].size()) {
                out << format_double(forecast.counts[j][static_cast<std::size_t>(l)]);
            }
        }
        out << '\n';
    }
    finish(out, path);
}

void write_recovery_report(const std::vector<sim::RecoveryReport>& reports, const fs::path& path) {
    auto out = open_out(path);
    out << "n,replications,included,excluded,exclusion_rate,"
           "mean_beta1,mean_beta2,mean_theta,mean_tau,"
           "mse_beta1,mse_beta2,mse_theta,bias_beta1,bias_beta2,bias_theta,"
           "mean_acceptance,min_acceptance\n";
    for (const auto& r : reports) {
        out << r.n << ',' << r.replications << ',' << r.included << ',' << r.excluded << ','
            << format_double(r.exclusion_rate()) << ',' << format_double(r.beta1.mean) << ','
            << format_double(r.beta2.mean) << ',' << format_double(r.theta.mean) << ',' << format_double(r.mean_tau)
            << ',' << format_double(r.beta1.mse) << ',' << format_double(r.beta2.mse) << ','
            << format_double(r.theta.mse) << ',' << format_double(r.beta1.bias) << ','
            << format_double(r.beta2.bias) << ',' << format_double(r.theta.bias) << ','
            << format_double(r.mean_acceptance) << ',' << format_double(r.min_acceptance) << '\n';
    }
    finish(out, path);
}

void write_ratio_rows(const std::vector<sim::RatioRow>& rows, int final_year, const fs::path& path) {
    auto out = open_out(path);
    int years = 0;
    for (const auto& r : rows) {
        years = std::max(years, r.years);
    }
    out << "n";
    for (int k = 0; k < years; ++k) {
        out << ',' << final_year - k;
    }
    out << '\n';
    for (const auto& r : rows) {
        out << r.n;
        for (int k = 0; k < years; ++k) {
            out << ',';
            if (static_cast<std::size_t>(k) < r.shares.size()) {
                out << format_percentage(r.shares[static_cast<std::size_t>(k)]);
            }
        }
        out << '\n';
    }
    finish(out, path);
}

// --- manifests ---------------------------------------------------------------------------

void write_manifest(const Manifest& m, const fs::path& path) {
    auto out = open_out(path);
    for (const auto& [k, v] : m) {
        out << k << '=' << v << '\n';
    }
    finish(out, path);
}

Manifest read_manifest(const fs::path& path) {
    const auto lines = read_lines(path);
    Manifest m;
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const std::string line = trim(lines[k]);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string(), k + 1, "expected key=value");
        }
        m[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return m;
}

}  // namespace ibnr::io
