#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ibnr/chain_ladder.hpp"
#include "ibnr/claims_model.hpp"
#include "ibnr/errors.hpp"
#include "ibnr/simulation.hpp"
#include "ibnr/triangle_io.hpp"

namespace ibnr::cli {

namespace fs = std::filesystem;
using io::format_double;
using io::Manifest;

namespace {

constexpr const char* kVersion = "1.0.0";

// Thrown for runs that complete but whose result is not trustworthy (optimizer did not
// converge); the outputs are still written.
struct NotConverged {};

struct Common {
    std::string input;
    std::string out;
    std::uint64_t seed = 20240601;
};

struct FitFlags {
    double tol = 1e-8;
    int max_iter = 500;
    double step = 0.25;
    double quad_tol = 1e-8;
    std::optional<double> beta1;
    std::optional<double> beta2;
    std::optional<double> theta;
    std::string origin;
};

struct PredictFlags {
    std::string params;
    std::optional<double> beta1;
    std::optional<double> beta2;
    std::optional<double> theta;
    int horizon = 0;
    int years = 0;
    std::optional<int> origin_year;
    std::string origin;
    double quad_tol = 1e-8;
};

struct CompareFlags {
    std::string predicted_a;
    std::string predicted_b;
    std::string actual_b;
};

struct SimulateFlags {
    std::vector<int> sizes;
    int n = 200;
    int replications = 200;
    double beta1 = 0.5;
    double beta2 = 0.5;
    double theta = 1.5;
    double tol = 1e-8;
    int max_iter = 500;
    double safety = 1.1;
    int years = 7;
    int final_year = 2016;
    int workers = 0;
};

fs::path prepare_out(const std::string& out) {
    if (out.empty()) {
        throw ValidationError("--out is required");
    }
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw ValidationError("cannot create output directory " + out);
    }
    return dir;
}

std::optional<std::chrono::year_month_day> parse_origin(const std::string& text) {
    if (text.empty()) {
        return std::nullopt;
    }
    const auto d = io::parse_date(text);
    if (!d) {
        throw ValidationError("--origin must be a YYYY-MM-DD date, got '" + text + "'");
    }
    return d;
}

quad::QuadratureOptions quadrature(double rel_tol) {
    if (!(rel_tol > 0.0)) {
        throw ValidationError("quadrature tolerance must be positive");
    }
    quad::QuadratureOptions q;
    q.rel_tol = rel_tol;
    return q;
}

void record_ks(Manifest& m, const std::string& prefix, const model::KsResult& ks) {
    m[prefix + "_statistic"] = format_double(ks.statistic);
    m[prefix + "_p_value"] = format_double(ks.p_value);
    m[prefix + "_rate"] = format_double(ks.rate);
}

// --- chainladder ----------------------------------------------------------------------------

int cmd_chainladder(const Common& c, std::ostream& out) {
    const fs::path dir = prepare_out(c.out);
    Manifest m{{"command", "chainladder"}, {"input", c.input}, {"out", c.out}, {"version", kVersion}};
    cl::Triangle tri = io::read_triangle(c.input);
    m["input_kind"] = tri.kind() == cl::TriangleKind::cumulative ? "cumulative" : "incremental";
    if (tri.kind() == cl::TriangleKind::incremental) {
        tri = cl::to_cumulative(tri);
    }
    const cl::DevFactors f = cl::dev_factors(tri);
    const cl::Triangle projected = cl::project(tri, f);
    io::write_triangle(projected, dir / "projected.csv");
    io::write_triangle(projected, dir / "projected_rounded.csv", true);
    io::write_factors(f, dir / "factors.csv");
    m["origin_year"] = std::to_string(tri.origin_year());
    m["rows"] = std::to_string(tri.rows());
    m["cols"] = std::to_string(tri.cols());
    std::ostringstream row;
    for (std::size_t j = 1; j <= f.size(); ++j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", f.factor(static_cast<int>(j)));
        row << (j > 1 ? " " : "") << buf;
        m["factor_" + std::to_string(j)] = format_double(f.factor(static_cast<int>(j)));
    }
    m["outputs"] = "projected.csv projected_rounded.csv factors.csv";
    io::write_manifest(m, dir / "manifest.txt");
    out << "factors: " << row.str() << '\n';
    return kSuccess;
}

// --- fit ------------------------------------------------------------------------------------

int cmd_fit(const Common& c, const FitFlags& f, std::ostream& out) {
    const fs::path dir = prepare_out(c.out);
    Manifest m{{"command", "fit"},
               {"input", c.input},
               {"out", c.out},
               {"seed", std::to_string(c.seed)},
               {"tol", format_double(f.tol)},
               {"max_iter", std::to_string(f.max_iter)},
               {"initial_step", format_double(f.step)},
               {"quadrature_rel_tol", format_double(f.quad_tol)},
               {"version", kVersion}};
    const auto file = io::read_event_file(c.input, parse_origin(f.origin));
    if (file.origin) {
        m["origin"] = io::format_date(*file.origin);
    }
    const model::EventLog& log = file.log;
    if (log.size() < 3) {
        throw ValidationError("fit needs at least 3 events, the log has " + std::to_string(log.size()));
    }
    m["events"] = std::to_string(log.size());

    model::OptimizerOptions opts;
    opts.tol = f.tol;
    opts.max_iter = f.max_iter;
    opts.initial_step = f.step;
    opts.quadrature = quadrature(f.quad_tol);

    std::optional<model::ModelParams> init;
    const int given = static_cast<int>(f.beta1.has_value()) + f.beta2.has_value() + f.theta.has_value();
    if (given == 3) {
        init = model::ModelParams(*f.beta1, *f.beta2, *f.theta);
    } else if (given != 0) {
        throw ValidationError("--beta1, --beta2 and --theta must be given together as the initial point");
    }
    m["init_source"] = init ? "flags" : "moments";

    const model::FitResult fit = model::fit_mle(log, init, opts);
    Manifest result{{"beta1", format_double(fit.params.beta1)},
                    {"beta2", format_double(fit.params.beta2)},
                    {"theta", format_double(fit.params.theta.value())},
                    {"loglik", format_double(fit.loglik)},
                    {"converged", fit.converged ? "true" : "false"},
                    {"iterations", std::to_string(fit.iterations)},
                    {"evaluations", std::to_string(fit.evaluations)},
                    {"restarts", std::to_string(fit.restarts)},
                    {"init_beta1", format_double(fit.init.beta1)},
                    {"init_beta2", format_double(fit.init.beta2)},
                    {"init_theta", format_double(fit.init.theta.value())}};
    const auto inter = log.inter_arrivals();
    const auto delays = log.delays();
    record_ks(result, "ks_interarrival", model::ks_exponential(inter));
    record_ks(result, "ks_delay", model::ks_exponential(delays));
    io::write_manifest(result, dir / "fit.txt");
    m.insert(result.begin(), result.end());
    m["outputs"] = "fit.txt";
    io::write_manifest(m, dir / "manifest.txt");

    out << "beta1=" << result["beta1"] << " beta2=" << result["beta2"] << " theta=" << result["theta"]
        << " loglik=" << result["loglik"] << " converged=" << result["converged"] << '\n';
    if (!fit.converged) {
        throw NotConverged{};
    }
    return kSuccess;
}

// --- predict --------------------------------------------------------------------------------

double manifest_number(const Manifest& m, const std::string& key, const std::string& path) {
    const auto it = m.find(key);
    if (it == m.end()) {
        throw ValidationError(path + " has no '" + key + "' entry");
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) {
            throw std::invalid_argument(key);
        }
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError(path + ": '" + key + "' is not a number");
    }
}

model::ModelParams resolve_params(const PredictFlags& f, Manifest& m) {
    const int given = static_cast<int>(f.beta1.has_value()) + f.beta2.has_value() + f.theta.has_value();
    if (!f.params.empty()) {
        if (given != 0) {
            throw ValidationError("give either --params or --beta1/--beta2/--theta, not both");
        }
        const Manifest fit = io::read_manifest(f.params);
        m["params_source"] = f.params;
        return {manifest_number(fit, "beta1", f.params), manifest_number(fit, "beta2", f.params),
                manifest_number(fit, "theta", f.params)};
    }
    if (given != 3) {
        throw ValidationError("predict needs --params or all of --beta1, --beta2, --theta");
    }
    m["params_source"] = "flags";
    return {*f.beta1, *f.beta2, *f.theta};
}

int cmd_predict(const Common& c, const PredictFlags& f, std::ostream& out) {
    const fs::path dir = prepare_out(c.out);
    Manifest m{{"command", "predict"},
               {"input", c.input},
               {"out", c.out},
               {"seed", std::to_string(c.seed)},
               {"quadrature_rel_tol", format_double(f.quad_tol)},
               {"version", kVersion}};
    const model::ModelParams params = resolve_params(f, m);
    m["beta1"] = format_double(params.beta1);
    m["beta2"] = format_double(params.beta2);
    m["theta"] = format_double(params.theta.value());

    const auto file = io::read_event_file(c.input, parse_origin(f.origin));
    const model::EventLog& log = file.log;
    if (log.empty()) {
        throw ValidationError("predict needs a non-empty event log");
    }
    int origin_year = 1;
    if (f.origin_year) {
        origin_year = *f.origin_year;
    } else if (file.origin) {
        origin_year = static_cast<int>(file.origin->year());
    }
    if (file.origin) {
        m["origin"] = io::format_date(*file.origin);
    }
    const double last_t = log.records().back().t;
    const int years = f.years > 0 ? f.years : static_cast<int>(std::floor(last_t)) + 1;
    const int horizon = f.horizon > 0 ? f.horizon : 2 * years - 1;
    m["events"] = std::to_string(log.size());
    m["origin_year"] = std::to_string(origin_year);
    m["years"] = std::to_string(years);
    m["horizon"] = std::to_string(horizon);

    std::vector<std::string> warnings;
    if (horizon < 2 * years - 1) {
        warnings.push_back("horizon " + std::to_string(horizon) + " is shorter than " +
                           std::to_string(2 * years - 1) + "; cells beyond it are left blank");
    }
    long long past_horizon = 0;
    long long past_valuation = 0;
    long long late_occurrence = 0;
    for (const auto& r : log.records()) {
        if (r.s >= horizon) {
            ++past_horizon;
        }
        if (r.s >= years) {
            ++past_valuation;
        }
        if (r.t >= years) {
            ++late_occurrence;
        }
    }
    if (past_horizon > 0) {
        warnings.push_back(std::to_string(past_horizon) + " observed reports fall beyond the horizon " +
                           std::to_string(horizon));
    }
    if (past_valuation > 0) {
        warnings.push_back(std::to_string(past_valuation) + " reports fall after the valuation year " +
                           std::to_string(years) + " and are not counted as observed");
    }
    if (late_occurrence > 0) {
        warnings.push_back(std::to_string(late_occurrence) + " events occur after the last accident year");
    }

    const auto forecast = model::predict_ibnr(log, params, horizon, quadrature(f.quad_tol));
    io::write_forecast(forecast, origin_year, dir / "forecast.csv");

    // Observed counts by (accident year, development year) up to the valuation diagonal.
    cl::Triangle incremental(origin_year, years, years, cl::TriangleKind::incremental);
    std::vector<double> counts(static_cast<std::size_t>(years) * static_cast<std::size_t>(years), 0.0);
    for (const auto& r : log.records()) {
        const int j = static_cast<int>(std::floor(r.t));
        const int l = static_cast<int>(std::floor(r.s)) - j;
        if (j < years && j + l < years) {
            counts[static_cast<std::size_t>(j * years + l)] += 1.0;
        }
    }
    for (int j = 0; j < years; ++j) {
        for (int l = 0; j + l < years; ++l) {
            incremental.set_observed(j, l, counts[static_cast<std::size_t>(j * years + l)]);
        }
    }
    cl::Triangle predicted = cl::to_cumulative(incremental);
    for (int j = 0; j < years; ++j) {
        double c_jl = predicted.value(j, years - 1 - j);
        for (int l = years - j; l < years; ++l) {
            const auto& row = forecast.counts[static_cast<std::size_t>(j)];
            if (static_cast<std::size_t>(l) >= row.size()) {
                break;
            }
            c_jl += row[static_cast<std::size_t>(l)];
            predicted.set_projected(j, l, c_jl);
        }
    }
    io::write_triangle(predicted, dir / "predicted.csv");
    io::write_triangle(predicted, dir / "predicted_rounded.csv", true);

    for (std::size_t k = 0; k < warnings.size(); ++k) {
        m["warning_" + std::to_string(k + 1)] = warnings[k];
        out << "warning: " << warnings[k] << '\n';
    }
    m["outputs"] = "forecast.csv predicted.csv predicted_rounded.csv";
    io::write_manifest(m, dir / "manifest.txt");
    out << "predicted " << years << " accident years with horizon " << horizon << '\n';
    return kSuccess;
}

// --- compare --------------------------------------------------------------------------------

int cmd_compare(const Common& c, const CompareFlags& f, std::ostream& out) {
    const fs::path dir = prepare_out(c.out);
    if (f.predicted_a.empty()) {
        throw ValidationError("compare needs --predicted-a");
    }
    Manifest m{{"command", "compare"},
               {"input", c.input},
               {"predicted_a", f.predicted_a},
               {"out", c.out},
               {"version", kVersion}};
    auto load_cumulative = [](const std::string& path) {
        cl::Triangle t = io::read_triangle(path);
        return t.kind() == cl::TriangleKind::cumulative ? t : cl::to_cumulative(t);
    };
    auto fmt_mean = [](const cl::ErrorTable& e) {
        const auto mean = e.mean();
        return mean ? io::format_percentage(*mean) : std::string("none");
    };
    const cl::Triangle actual = load_cumulative(c.input);
    const cl::ErrorTable a = cl::error_table(actual, load_cumulative(f.predicted_a));
    io::write_report(a, dir / "errors_a.csv");
    m["mean_error_a"] = fmt_mean(a);
    std::string outputs = "errors_a.csv";
    std::string summary = "mean absolute percentage error: a=" + m["mean_error_a"];

    if (!f.predicted_b.empty()) {
        const std::string actual_b_path = f.actual_b.empty() ? c.input : f.actual_b;
        m["predicted_b"] = f.predicted_b;
        m["actual_b"] = actual_b_path;
        const cl::ErrorTable b = cl::error_table(load_cumulative(actual_b_path), load_cumulative(f.predicted_b));
        io::write_report(b, dir / "errors_b.csv");
        m["mean_error_b"] = fmt_mean(b);
        outputs += " errors_b.csv";
        summary += " b=" + m["mean_error_b"];
    } else if (!f.actual_b.empty()) {
        throw ValidationError("--actual-b needs --predicted-b");
    }
    {
        std::ofstream s(dir / "summary.txt");
        s << summary << '\n';
        if (!s) {
            throw ValidationError("cannot write " + (dir / "summary.txt").string());
        }
    }
    m["outputs"] = outputs + " summary.txt";
    io::write_manifest(m, dir / "manifest.txt");
    out << summary << '\n';
    return kSuccess;
}

// --- simulate -------------------------------------------------------------------------------

int cmd_simulate(const Common& c, const SimulateFlags& f, std::ostream& out) {
    const fs::path dir = prepare_out(c.out);
    std::vector<int> sizes = f.sizes.empty() ? std::vector<int>{f.n} : f.sizes;
    if (f.replications < 0) {
        throw ValidationError("--replications must be nonnegative");
    }
    if (f.years < 1) {
        throw ValidationError("--years must be positive");
    }
    std::ostringstream size_list;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        size_list << (k ? " " : "") << sizes[k];
    }
    Manifest m{{"command", "simulate"},
               {"out", c.out},
               {"seed", std::to_string(c.seed)},
               {"sizes", size_list.str()},
               {"replications", std::to_string(f.replications)},
               {"beta1", format_double(f.beta1)},
               {"beta2", format_double(f.beta2)},
               {"theta", format_double(f.theta)},
               {"tol", format_double(f.tol)},
               {"max_iter", std::to_string(f.max_iter)},
               {"envelope_safety", format_double(f.safety)},
               {"years", std::to_string(f.years)},
               {"final_year", std::to_string(f.final_year)},
               {"version", kVersion}};

    sim::SimConfig base;
    base.params = model::ModelParams(f.beta1, f.beta2, f.theta);
    base.replications = f.replications;
    base.seed = c.seed;
    base.envelope_safety = f.safety;
    base.fit.tol = f.tol;
    base.fit.max_iter = f.max_iter;
    base.workers = f.workers;

    std::vector<sim::RecoveryReport> reports;
    std::vector<sim::RatioRow> ratios;
    for (int n : sizes) {
        sim::SimConfig cfg = base;
        cfg.n = n;
        if (f.replications > 0) {
            reports.push_back(sim::recovery_study(cfg));
            const auto& r = reports.back();
            out << "n=" << n << ": included " << r.included << "/" << r.replications << ", mse "
                << format_double(r.beta1.mse) << " " << format_double(r.beta2.mse) << " "
                << format_double(r.theta.mse) << '\n';
        }
        ratios.push_back(sim::report_ratio_table(cfg, f.years));
    }
    std::string outputs = "ratios.csv";
    if (!reports.empty()) {
        io::write_recovery_report(reports, dir / "recovery.csv");
        outputs = "recovery.csv " + outputs;
    }
    io::write_ratio_rows(ratios, f.final_year, dir / "ratios.csv");
    m["outputs"] = outputs;
    io::write_manifest(m, dir / "manifest.txt");
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"IBNR claim-count reserving: Chain-Ladder and Clayton-copula models", "ibnr"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    FitFlags fit;
    PredictFlags predict;
    CompareFlags compare;
    SimulateFlags simulate;

    auto* chainladder = app.add_subcommand("chainladder", "Chain-Ladder factors and projected triangle");
    chainladder->add_option("--input", common.input, "Triangle CSV (cumulative or incremental)")->required();
    chainladder->add_option("--out", common.out, "Output directory")->required();

    auto* fit_cmd = app.add_subcommand("fit", "Maximum likelihood fit of the copula model to an event log");
    fit_cmd->add_option("--input", common.input, "Event log CSV")->required();
    fit_cmd->add_option("--out", common.out, "Output directory")->required();
    fit_cmd->add_option("--seed", common.seed, "Recorded in the manifest; the fit is deterministic")
        ->capture_default_str();
    fit_cmd->add_option("--tol", fit.tol, "Simplex diameter tolerance in log-parameter space")->capture_default_str();
    fit_cmd->add_option("--max-iter", fit.max_iter, "Simplex iteration cap")->capture_default_str();
    fit_cmd->add_option("--step", fit.step, "Initial simplex step in log-parameter space")->capture_default_str();
    fit_cmd->add_option("--quad-tol", fit.quad_tol, "Quadrature relative tolerance")->capture_default_str();
    fit_cmd->add_option("--beta1", fit.beta1, "Initial beta1 (with --beta2 and --theta)");
    fit_cmd->add_option("--beta2", fit.beta2, "Initial beta2");
    fit_cmd->add_option("--theta", fit.theta, "Initial theta");
    fit_cmd->add_option("--origin", fit.origin, "Origin date (YYYY-MM-DD) for dated logs");

    auto* predict_cmd = app.add_subcommand("predict", "Copula-predicted cumulative triangle");
    predict_cmd->add_option("--input", common.input, "Event log CSV")->required();
    predict_cmd->add_option("--out", common.out, "Output directory")->required();
    predict_cmd->add_option("--params", predict.params, "fit.txt written by the fit command");
    predict_cmd->add_option("--beta1", predict.beta1, "Inter-arrival rate");
    predict_cmd->add_option("--beta2", predict.beta2, "Reporting-delay rate");
    predict_cmd->add_option("--theta", predict.theta, "Clayton parameter");
    predict_cmd->add_option("--horizon", predict.horizon, "Last calendar year n_J (default 2*years-1)");
    predict_cmd->add_option("--years", predict.years, "Accident years in the triangle (default from the log)");
    predict_cmd->add_option("--origin-year", predict.origin_year, "Label of the first accident year");
    predict_cmd->add_option("--origin", predict.origin, "Origin date (YYYY-MM-DD) for dated logs");
    predict_cmd->add_option("--seed", common.seed, "Recorded in the manifest")->capture_default_str();
    predict_cmd->add_option("--quad-tol", predict.quad_tol, "Quadrature relative tolerance")->capture_default_str();

    auto* compare_cmd = app.add_subcommand("compare", "Percentage error tables of two predictions");
    compare_cmd->add_option("--input", common.input, "Actual triangle for prediction a")->required();
    compare_cmd->add_option("--predicted-a", compare.predicted_a, "First predicted triangle")->required();
    compare_cmd->add_option("--predicted-b", compare.predicted_b, "Second predicted triangle");
    compare_cmd->add_option("--actual-b", compare.actual_b, "Actual triangle for prediction b (default --input)");
    compare_cmd->add_option("--out", common.out, "Output directory")->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "Parameter recovery study and reporting-year ratios");
    simulate_cmd->add_option("--out", common.out, "Output directory")->required();
    simulate_cmd->add_option("--seed", common.seed, "Master seed")->capture_default_str();
    simulate_cmd->add_option("--n", simulate.n, "Events per replication")->capture_default_str();
    simulate_cmd->add_option("--sizes", simulate.sizes, "Several sample sizes; overrides --n");
    simulate_cmd->add_option("--replications", simulate.replications, "Replications per size (0 skips recovery)")
        ->capture_default_str();
    simulate_cmd->add_option("--beta1", simulate.beta1, "True inter-arrival rate")->capture_default_str();
    simulate_cmd->add_option("--beta2", simulate.beta2, "True reporting-delay rate")->capture_default_str();
    simulate_cmd->add_option("--theta", simulate.theta, "True Clayton parameter")->capture_default_str();
    simulate_cmd->add_option("--tol", simulate.tol, "Simplex tolerance")->capture_default_str();
    simulate_cmd->add_option("--max-iter", simulate.max_iter, "Simplex iteration cap")->capture_default_str();
    simulate_cmd->add_option("--envelope-safety", simulate.safety, "Accept-reject envelope factor")
        ->capture_default_str();
    simulate_cmd->add_option("--years", simulate.years, "Years in the ratio table")->capture_default_str();
    simulate_cmd->add_option("--final-year", simulate.final_year, "Label of the ratio table's last year")
        ->capture_default_str();
    simulate_cmd->add_option("--workers", simulate.workers, "Replication threads (0: all cores)")
        ->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "ibnr: " << e.what() << '\n';
        return kValidation;
    }

    try {
        if (chainladder->parsed()) {
            return cmd_chainladder(common, out);
        }
        if (fit_cmd->parsed()) {
            return cmd_fit(common, fit, out);
        }
        if (predict_cmd->parsed()) {
            return cmd_predict(common, predict, out);
        }
        if (compare_cmd->parsed()) {
            return cmd_compare(common, compare, out);
        }
        return cmd_simulate(common, simulate, out);
    } catch (const NotConverged&) {
        err << "ibnr: optimizer did not converge; results written but flagged converged=false\n";
        return kNumerical;
    } catch (const NumericalError& e) {
        err << "ibnr: numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        err << "ibnr: " << e.what() << '\n';
        return kValidation;
    }
}

}  // namespace ibnr::cli
