// Command-line front end: generation, estimation, fitting, forecasting,
// survival, and synthetic-fixture production.  Every file-producing command
// also writes a `<output>.meta.json` sidecar carrying the resolved
// parameters, so any artifact can be regenerated from its sidecar alone.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fracmort/data.hpp>
#include <fracmort/fgn.hpp>
#include <fracmort/fou.hpp>
#include <fracmort/hurst.hpp>
#include <fracmort/mortality.hpp>
#include <fracmort/qgv.hpp>

#ifndef FRACMORT_VERSION
#define FRACMORT_VERSION "0.0.0"
#endif

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t k_builtin_seed = 123456789;
constexpr std::uint64_t k_fixture_seed = 12;
const char* const k_fixture_label = "Synthetica, Death rates (period 1x1), synthetic fixture";

struct SeedSetting {
    std::uint64_t value = k_builtin_seed;
    std::string source = "default";
};

// Precedence: explicit --seed flag, then FRACMORT_SEED, then the built-in.
SeedSetting resolve_seed(const CLI::Option* opt, std::uint64_t flag_value,
                         std::uint64_t fallback = k_builtin_seed) {
    if (opt != nullptr && opt->count() > 0) return {flag_value, "flag"};
    if (const char* env = std::getenv("FRACMORT_SEED")) {
        std::uint64_t v = 0;
        const char* last = env + std::char_traits<char>::length(env);
        const auto [ptr, ec] = std::from_chars(env, last, v);
        if (ec != std::errc() || ptr != last)
            throw fracmort::invalid_argument_error(
                "cli",
                std::string("FRACMORT_SEED must be an unsigned integer, got '") + env + "'");
        return {v, "environment"};
    }
    return {fallback, "default"};
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fracmort::error("cli", "io", "cannot open output file: " + path);
    out << content;
    out.flush();
    if (!out) throw fracmort::error("cli", "io", "failed while writing output file: " + path);
}

// Sidecar next to the artifact; skipped when the artifact goes to stdout.
void write_sidecar(const std::string& output_path, const std::string& command,
                   ordered_json parameters, const std::vector<std::string>& warnings) {
    if (output_path.empty() || output_path == "-") return;
    ordered_json meta;
    meta["tool"] = "fracmort";
    meta["version"] = FRACMORT_VERSION;
    meta["command"] = command;
    meta["output"] = output_path;
    meta["parameters"] = std::move(parameters);
    meta["warnings"] = warnings;
    write_output(output_path + ".meta.json", meta.dump(2) + "\n");
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

// Reads a numeric column from a file or stdin.  A first line whose fields all
// parse as numbers is data (headerless); otherwise it is a CSV header and
// `column` may name a field.  Default column: the last one.
std::vector<double> load_series(const std::string& path, const std::string& column) {
    std::istream* in = &std::cin;
    std::ifstream file;
    if (!path.empty() && path != "-") {
        file.open(path);
        if (!file) throw fracmort::not_found_error("cli", "input file not found: " + path);
        in = &file;
    }
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(*in, line)) {
        ++lineno;
        line = fracmort::detail::strip_cr(line);
        if (!line.empty()) lines.emplace_back(lineno, line);
    }
    if (lines.empty()) throw fracmort::insufficient_data_error("cli", "input series is empty");

    const auto head = split_csv(lines.front().second);
    bool headerless = true;
    for (const auto& f : head) {
        double probe;
        if (!fracmort::detail::parse_double(trim(f), probe)) {
            headerless = false;
            break;
        }
    }

    std::size_t col = head.size() - 1;
    std::size_t first = 0;
    if (!headerless) {
        first = 1;
        if (!column.empty()) {
            bool found = false;
            for (std::size_t i = 0; i < head.size(); ++i) {
                if (trim(head[i]) == column) {
                    col = i;
                    found = true;
                    break;
                }
            }
            if (!found) {
                int idx;
                if (fracmort::detail::parse_int(column, idx) && idx >= 0 &&
                    static_cast<std::size_t>(idx) < head.size()) {
                    col = static_cast<std::size_t>(idx);
                } else {
                    throw fracmort::invalid_argument_error(
                        "cli", "column '" + column + "' not found in input header");
                }
            }
        }
    } else if (!column.empty()) {
        int idx;
        if (!fracmort::detail::parse_int(column, idx) || idx < 0 ||
            static_cast<std::size_t>(idx) >= head.size())
            throw fracmort::invalid_argument_error(
                "cli", "headerless input: --column must be a 0-based field index");
        col = static_cast<std::size_t>(idx);
    }

    std::vector<double> values;
    values.reserve(lines.size());
    for (std::size_t r = first; r < lines.size(); ++r) {
        const auto fields = split_csv(lines[r].second);
        if (col >= fields.size())
            throw fracmort::parse_error(
                "cli", "line " + std::to_string(lines[r].first) + " has too few columns");
        double v;
        const std::string tok = trim(fields[col]);
        if (!fracmort::detail::parse_double(tok, v))
            throw fracmort::parse_error("cli", "line " + std::to_string(lines[r].first) +
                                                   ": cannot parse '" + tok + "' as a number");
        values.push_back(v);
    }
    return values;
}

std::pair<int, int> parse_year_range(const std::string& text) {
    const auto pos = text.find(':');
    int a = 0, b = 0;
    if (pos == std::string::npos || !fracmort::detail::parse_int(text.substr(0, pos), a) ||
        !fracmort::detail::parse_int(text.substr(pos + 1), b))
        throw fracmort::invalid_argument_error(
            "cli", "year range must look like START:END, got '" + text + "'");
    return {a, b};
}

fracmort::Filter filter_from_name(const std::string& name) {
    if (name == "classical-k2") return fracmort::classical_filter(2);
    if (name == "daubechies4") return fracmort::daubechies_filter();
    throw fracmort::invalid_argument_error(
        "cli", "unknown filter '" + name + "' (choices: classical-k2, daubechies4)");
}

std::string shortest(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- gen-fgn --

struct GenFgnArgs {
    double hurst = 0.7;
    std::size_t n = 1000;
    double mesh = 1.0;
    std::uint64_t seed_flag = 0;
    CLI::Option* seed_opt = nullptr;
    std::string output;
};

int run_gen_fgn(const GenFgnArgs& a) {
    const auto seed = resolve_seed(a.seed_opt, a.seed_flag);
    const auto path = fracmort::generate_fgn(fracmort::HurstIndex(a.hurst), a.n, a.mesh, seed.value);
    std::string csv = "time,increment,cumulative\n";
    char buf[160];
    for (std::size_t i = 1; i <= a.n; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", static_cast<double>(i) * a.mesh,
                      path.increments[i - 1], path.cumulative[i]);
        csv += buf;
        csv += '\n';
    }
    write_output(a.output, csv);

    ordered_json params;
    params["hurst"] = a.hurst;
    params["n"] = a.n;
    params["mesh"] = a.mesh;
    params["seed"] = seed.value;
    params["seed_source"] = seed.source;
    params["generator"] = path.method_used == fracmort::fgn_method::cholesky
                              ? "cholesky"
                              : "circulant-embedding";
    write_sidecar(a.output, "gen-fgn", std::move(params), {});
    return 0;
}

// -------------------------------------------------------------- est-hurst --

struct EstHurstArgs {
    std::string input;
    std::string column;
    std::string method = "rescaled-range";
    std::string output;
    std::string diagnostics;
    bool compare = false;
    std::size_t window = 0;
    std::size_t step = 1;
};

int run_est_hurst(const EstHurstArgs& a) {
    const auto series = load_series(a.input, a.column);

    if (a.compare) {
        const std::size_t w =
            a.window != 0 ? a.window : std::max<std::size_t>(32, series.size() / 2);
        if (a.step == 0)
            throw fracmort::invalid_argument_error("cli", "--step must be positive");
        if (w > series.size())
            throw fracmort::invalid_argument_error(
                "cli", "--window exceeds the series length " + std::to_string(series.size()));
        std::string csv = "start,end,rs-analysis,rescaled-range,local-whittle\n";
        for (std::size_t s = 0; s + w <= series.size(); s += a.step) {
            const std::vector<double> win(series.begin() + s, series.begin() + s + w);
            csv += std::to_string(s) + "," + std::to_string(s + w);
            for (auto m : {fracmort::hurst_method::rs_analysis,
                           fracmort::hurst_method::rescaled_range,
                           fracmort::hurst_method::local_whittle}) {
                csv += ',';
                try {
                    csv += shortest(fracmort::estimate_hurst(win, m).value);
                } catch (const fracmort::error&) {
                    // leave the cell empty when a window defeats an estimator
                }
            }
            csv += '\n';
        }
        write_output(a.output, csv);
        ordered_json params;
        params["input"] = a.input.empty() ? "-" : a.input;
        params["column"] = a.column;
        params["compare"] = true;
        params["window"] = w;
        params["step"] = a.step;
        write_sidecar(a.output, "est-hurst", std::move(params), {});
        return 0;
    }

    const auto method = fracmort::hurst_method_from_string(a.method);
    const auto est = fracmort::estimate_hurst(series, method);
    ordered_json out;
    out["method"] = fracmort::to_string(est.method);
    out["n"] = series.size();
    out["hurst"] = est.value;
    out["out_of_range"] = est.out_of_range;
    out["n_points"] = est.n_points;
    out["significance"] = est.significance;
    write_output(a.output, out.dump(2) + "\n");
    if (!a.diagnostics.empty()) {
        std::ostringstream ds;
        fracmort::write_diagnostics_csv(est, ds);
        write_output(a.diagnostics, ds.str());
    }
    ordered_json params;
    params["input"] = a.input.empty() ? "-" : a.input;
    params["column"] = a.column;
    params["method"] = fracmort::to_string(method);
    if (!a.diagnostics.empty()) params["diagnostics"] = a.diagnostics;
    write_sidecar(a.output, "est-hurst", std::move(params),
                  est.out_of_range ? std::vector<std::string>{"estimate outside (0,1)"}
                                   : std::vector<std::string>{});
    return 0;
}

// ---------------------------------------------------------------- est-qgv --

struct EstQgvArgs {
    std::string input;
    std::string column;
    std::string filter = "classical-k2";
    double mesh = 1.0;
    bool force_lambda = false;
    std::string output;
};

int run_est_qgv(const EstQgvArgs& a) {
    const auto series = load_series(a.input, a.column);
    const auto est =
        fracmort::estimate_all(series, filter_from_name(a.filter), a.mesh, a.force_lambda);
    ordered_json out;
    out["filter"] = est.filter_used;
    out["n"] = series.size();
    out["h"] = est.h_hat;
    out["sigma"] = est.sigma_hat;
    out["mu2"] = est.mu2_hat;
    if (est.lambda_hat)
        out["lambda"] = *est.lambda_hat;
    else
        out["lambda"] = nullptr;
    out["outside_validity"] = est.outside_validity;
    out["warnings"] = est.warnings;
    write_output(a.output, out.dump(2) + "\n");

    ordered_json params;
    params["input"] = a.input.empty() ? "-" : a.input;
    params["column"] = a.column;
    params["filter"] = a.filter;
    params["mesh"] = a.mesh;
    params["force_lambda"] = a.force_lambda;
    write_sidecar(a.output, "est-qgv", std::move(params), est.warnings);
    return 0;
}

// -------------------------------------------------------- fit and friends --

struct FitFlags {
    std::string input;
    int age = 50;
    std::string sex = "T";
    std::string years;
    std::string method = "rescaled-range";
    std::string filter = "classical-k2";
    int max_age = 90;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool required_input) {
    auto* in = cmd->add_option("-i,--input", f.input, "mortality table in HMD Mx 1x1 layout");
    if (required_input) in->required();
    cmd->add_option("--age", f.age, "age column to model")->capture_default_str();
    cmd->add_option("--sex", f.sex, "sex channel: F, M, or T")->capture_default_str();
    cmd->add_option("--years", f.years, "calendar window START:END (default: full table)");
    cmd->add_option("--method", f.method,
                    "Hurst estimator: rs-analysis, rescaled-range, or local-whittle (alias whittle)")
        ->capture_default_str();
    cmd->add_option("--filter", f.filter, "variation filter: classical-k2 or daubechies4")
        ->capture_default_str();
    cmd->add_option("--max-age", f.max_age, "modeling age cap; ages above it are refused")
        ->capture_default_str();
}

fracmort::MortalityModel fit_from_flags(const FitFlags& f, std::vector<std::string>& notes) {
    if (f.input.empty())
        throw fracmort::invalid_argument_error("cli", "fitting requires --input");
    if (f.age > f.max_age)
        throw fracmort::invalid_argument_error(
            "cli", "age " + std::to_string(f.age) + " is above the modeling cap " +
                       std::to_string(f.max_age) + "; raise --max-age to override");
    std::ifstream in(f.input);
    if (!in) throw fracmort::not_found_error("cli", "input file not found: " + f.input);
    const auto parsed = fracmort::parse_hmd(in);
    notes.insert(notes.end(), parsed.report.messages.begin(), parsed.report.messages.end());
    int y0, y1;
    if (f.years.empty()) {
        y0 = parsed.table.years.front();
        y1 = parsed.table.years.back();
    } else {
        std::tie(y0, y1) = parse_year_range(f.years);
    }
    const auto series =
        fracmort::extract_cohort(parsed.table, f.age, fracmort::sex_from_string(f.sex), y0, y1);
    return fracmort::fit_model(series, fracmort::hurst_method_from_string(f.method),
                               filter_from_name(f.filter));
}

ordered_json fit_params_json(const FitFlags& f, const fracmort::MortalityModel& model) {
    ordered_json p;
    p["input"] = f.input;
    p["age"] = f.age;
    p["sex"] = f.sex;
    p["years"] =
        std::to_string(model.fit_window.first) + ":" + std::to_string(model.fit_window.second);
    p["method"] = f.method;
    p["filter"] = f.filter;
    p["max_age"] = f.max_age;
    return p;
}

ordered_json model_as_json(const fracmort::MortalityModel& model) {
    std::ostringstream os;
    fracmort::write_json(model, os);
    return ordered_json::parse(os.str());
}

struct FitArgs {
    FitFlags flags;
    std::string output;
};

int run_fit(const FitArgs& a) {
    std::vector<std::string> notes;
    const auto model = fit_from_flags(a.flags, notes);
    std::ostringstream os;
    fracmort::write_json(model, os);
    write_output(a.output, os.str());

    auto warnings = model.warnings;
    warnings.insert(warnings.end(), notes.begin(), notes.end());
    write_sidecar(a.output, "fit", fit_params_json(a.flags, model), warnings);
    return 0;
}

// ---------------------------------------------------------------- forecast --

struct ForecastArgs {
    std::string model_path;
    FitFlags flags;
    std::size_t n_years = 50;
    std::size_t n_paths = 10000;
    double coverage = 0.955;
    bool quantile_bands = false;
    std::uint64_t seed_flag = 0;
    CLI::Option* seed_opt = nullptr;
    std::string output;
};

int run_forecast(const ForecastArgs& a) {
    std::vector<std::string> notes;
    const auto model =
        a.model_path.empty() ? fit_from_flags(a.flags, notes) : [&] {
            std::ifstream in(a.model_path);
            if (!in)
                throw fracmort::not_found_error("cli", "model file not found: " + a.model_path);
            return fracmort::read_model_json(in);
        }();
    const auto seed = resolve_seed(a.seed_opt, a.seed_flag);
    const auto band = fracmort::forecast(model, a.n_years, a.n_paths, seed.value, a.coverage,
                                         a.quantile_bands);
    std::ostringstream os;
    fracmort::write_csv(band, os);
    write_output(a.output, os.str());

    ordered_json params;
    if (!a.model_path.empty()) {
        params["model_source"] = a.model_path;
    } else {
        params["model_source"] = "fitted in-process";
        params["fit"] = fit_params_json(a.flags, model);
    }
    params["model"] = model_as_json(model);
    params["n_years"] = a.n_years;
    params["n_paths"] = a.n_paths;
    params["coverage"] = a.coverage;
    params["quantile_bands"] = a.quantile_bands;
    params["seed"] = seed.value;
    params["seed_source"] = seed.source;
    auto warnings = model.warnings;
    warnings.insert(warnings.end(), notes.begin(), notes.end());
    write_sidecar(a.output, "forecast", std::move(params), warnings);
    return 0;
}

// ---------------------------------------------------------------- survival --

struct SurvivalArgs {
    std::string model_path;
    FitFlags flags;
    double t = 0.0;
    double horizon = 0.0;
    double y_start = 0.0;
    std::size_t n_paths = 10000;
    std::uint64_t seed_flag = 0;
    CLI::Option* seed_opt = nullptr;
    std::string output;
};

int run_survival(const SurvivalArgs& a) {
    std::vector<std::string> notes;
    const auto model =
        a.model_path.empty() ? fit_from_flags(a.flags, notes) : [&] {
            std::ifstream in(a.model_path);
            if (!in)
                throw fracmort::not_found_error("cli", "model file not found: " + a.model_path);
            return fracmort::read_model_json(in);
        }();
    const auto seed = resolve_seed(a.seed_opt, a.seed_flag);
    const auto [estimate, std_error] =
        fracmort::survival_probability(model, a.t, a.horizon, a.n_paths, seed.value, a.y_start);

    ordered_json out;
    out["estimate"] = estimate;
    out["std_error"] = std_error;
    out["t"] = a.t;
    out["horizon"] = a.horizon;
    out["y_start"] = a.y_start;
    out["n_paths"] = a.n_paths;
    out["seed"] = seed.value;
    write_output(a.output, out.dump(2) + "\n");

    ordered_json params;
    if (!a.model_path.empty()) {
        params["model_source"] = a.model_path;
    } else {
        params["model_source"] = "fitted in-process";
        params["fit"] = fit_params_json(a.flags, model);
    }
    params["model"] = model_as_json(model);
    params["t"] = a.t;
    params["horizon"] = a.horizon;
    params["y_start"] = a.y_start;
    params["n_paths"] = a.n_paths;
    params["seed"] = seed.value;
    params["seed_source"] = seed.source;
    auto warnings = model.warnings;
    warnings.insert(warnings.end(), notes.begin(), notes.end());
    write_sidecar(a.output, "survival", std::move(params), warnings);
    return 0;
}

// ----------------------------------------------------------------- fixture --

// Smooth synthetic age curves; the bundled data file was produced by this
// command with all defaults (seed 12), so running it again reproduces that
// file byte for byte.
fracmort::FixtureAgeParams fixture_age_curve(int age) {
    fracmort::FixtureAgeParams p;
    p.age = age;
    const double x = age / 90.0;
    p.h0 = 2e-4 + 0.05 * std::exp(-age / 3.0) + 0.14 * x * x * x * x + 0.003 * x;
    p.alpha0 = -0.022 + 0.012 * x;
    p.hurst = 0.64 + 0.04 * (1.0 + std::sin(age / 14.0));
    p.lambda = 3.0 + 0.5 * (1.0 + std::cos(age / 9.0));
    p.sigma = 0.20 + 0.05 * (1.0 + std::sin(age / 7.0 + 1.0));
    return p;
}

struct FixtureArgs {
    std::uint64_t seed_flag = 0;
    CLI::Option* seed_opt = nullptr;
    std::string years = "1800:2004";
    int max_age = 90;
    std::string label = k_fixture_label;
    std::string output;
};

int run_fixture(const FixtureArgs& a) {
    const auto seed = resolve_seed(a.seed_opt, a.seed_flag, k_fixture_seed);
    const auto [y0, y1] = parse_year_range(a.years);
    fracmort::FixtureSpec spec;
    spec.country_label = a.label;
    spec.seed = seed.value;
    for (int y = y0; y <= y1; ++y) spec.years.push_back(y);
    for (int age = 0; age <= a.max_age; ++age) spec.ages.push_back(fixture_age_curve(age));
    const auto table = fracmort::synthesize_fixture(spec);
    std::ostringstream os;
    fracmort::write_hmd(table, os);
    write_output(a.output, os.str());

    ordered_json params;
    params["seed"] = seed.value;
    params["seed_source"] = seed.source;
    params["years"] = a.years;
    params["max_age"] = a.max_age;
    params["label"] = a.label;
    write_sidecar(a.output, "fixture", std::move(params), {});
    return 0;
}

int report_error(const fracmort::error& e) {
    ordered_json j;
    j["error"]["module"] = e.module();
    j["error"]["type"] = e.kind();
    j["error"]["message"] = e.what();
    if (const auto* gap = dynamic_cast<const fracmort::data_gap_error*>(&e))
        j["error"]["missing_years"] = gap->missing_years();
    std::cerr << j.dump(2) << '\n';
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mortality hazard modeling driven by fractional Ornstein-Uhlenbeck noise"};
    app.set_version_flag("--version", FRACMORT_VERSION);
    app.require_subcommand(1);

    GenFgnArgs gen;
    auto* sc_gen = app.add_subcommand("gen-fgn", "Generate a fractional Gaussian noise path");
    sc_gen->add_option("--hurst", gen.hurst, "Hurst index in (0,1)")->required();
    sc_gen->add_option("--n", gen.n, "number of increments")->capture_default_str();
    sc_gen->add_option("--mesh", gen.mesh, "time step between samples")->capture_default_str();
    gen.seed_opt = sc_gen->add_option("--seed", gen.seed_flag, "RNG seed (beats FRACMORT_SEED)");
    sc_gen->add_option("-o,--output", gen.output, "CSV output path (stdout if omitted)");

    EstHurstArgs eh;
    auto* sc_eh = app.add_subcommand("est-hurst", "Estimate the Hurst index of a series");
    sc_eh->add_option("-i,--input", eh.input, "series file, CSV or one value per line ('-' = stdin)");
    sc_eh->add_option("--column", eh.column, "CSV column name or 0-based index (default: last)");
    sc_eh->add_option("--method", eh.method,
                      "rs-analysis, rescaled-range, or local-whittle (alias whittle)")
        ->capture_default_str();
    sc_eh->add_option("--diagnostics", eh.diagnostics, "write scale,statistic regression CSV here");
    sc_eh->add_flag("--compare-hurst", eh.compare,
                    "run all three estimators over sliding windows; CSV output");
    sc_eh->add_option("--window", eh.window, "sliding window length (default: half the series)");
    sc_eh->add_option("--step", eh.step, "sliding window step")->capture_default_str();
    sc_eh->add_option("-o,--output", eh.output, "output path (stdout if omitted)");

    EstQgvArgs eq;
    auto* sc_eq = app.add_subcommand(
        "est-qgv", "Estimate H, sigma, lambda from generalized quadratic variations");
    sc_eq->add_option("-i,--input", eq.input, "series file, CSV or one value per line ('-' = stdin)");
    sc_eq->add_option("--column", eq.column, "CSV column name or 0-based index (default: last)");
    sc_eq->add_option("--filter", eq.filter, "classical-k2 or daubechies4")->capture_default_str();
    sc_eq->add_option("--mesh", eq.mesh, "sampling mesh of the input path")->capture_default_str();
    sc_eq->add_flag("--force-lambda", eq.force_lambda,
                    "compute lambda even when H is outside the validity range (0.5, 0.75)");
    sc_eq->add_option("-o,--output", eq.output, "JSON output path (stdout if omitted)");

    FitArgs fit;
    auto* sc_fit = app.add_subcommand("fit", "Fit the mortality model to one age/sex series");
    add_fit_flags(sc_fit, fit.flags, true);
    sc_fit->add_option("-o,--output", fit.output, "model JSON path (stdout if omitted)");

    ForecastArgs fc;
    auto* sc_fc = app.add_subcommand("forecast", "Simulate hazard forecast bands from a model");
    auto* fc_model = sc_fc->add_option("--model", fc.model_path, "model JSON produced by fit");
    add_fit_flags(sc_fc, fc.flags, false);
    sc_fc->get_option("--input")->excludes(fc_model);
    sc_fc->add_option("--n-years", fc.n_years, "forecast length in years")->capture_default_str();
    sc_fc->add_option("--n-paths", fc.n_paths, "Monte Carlo paths")->capture_default_str();
    sc_fc->add_option("--coverage", fc.coverage, "band coverage level")->capture_default_str();
    sc_fc->add_flag("--quantile-bands", fc.quantile_bands,
                    "use empirical quantile bands even at the default coverage");
    fc.seed_opt = sc_fc->add_option("--seed", fc.seed_flag, "RNG seed (beats FRACMORT_SEED)");
    sc_fc->add_option("-o,--output", fc.output, "band CSV path (stdout if omitted)");

    SurvivalArgs sv;
    auto* sc_sv = app.add_subcommand("survival", "Monte Carlo survival probability S(t, horizon)");
    auto* sv_model = sc_sv->add_option("--model", sv.model_path, "model JSON produced by fit");
    add_fit_flags(sc_sv, sv.flags, false);
    sc_sv->get_option("--input")->excludes(sv_model);
    sc_sv->add_option("--t", sv.t, "conditioning time in years")->capture_default_str();
    sc_sv->add_option("--horizon", sv.horizon, "survival horizon in years")->required();
    sc_sv->add_option("--y-start", sv.y_start, "noise restart value at time t")
        ->capture_default_str();
    sc_sv->add_option("--n-paths", sv.n_paths, "Monte Carlo paths")->capture_default_str();
    sv.seed_opt = sc_sv->add_option("--seed", sv.seed_flag, "RNG seed (beats FRACMORT_SEED)");
    sc_sv->add_option("-o,--output", sv.output, "JSON output path (stdout if omitted)");

    FixtureArgs fx;
    auto* sc_fx = app.add_subcommand(
        "fixture", "Synthesize the bundled HMD-style mortality fixture");
    fx.seed_opt = sc_fx->add_option("--seed", fx.seed_flag, "noise seed (default 12, the bundled file's)");
    sc_fx->add_option("--years", fx.years, "calendar range START:END")->capture_default_str();
    sc_fx->add_option("--max-age", fx.max_age, "highest age to synthesize")->capture_default_str();
    sc_fx->add_option("--label", fx.label, "first header line of the output file")
        ->capture_default_str();
    sc_fx->add_option("-o,--output", fx.output, "output path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        ordered_json j;
        j["error"]["module"] = "cli";
        j["error"]["type"] = "usage";
        j["error"]["message"] = e.what();
        std::cerr << j.dump(2) << '\n';
        return 2;
    }

    try {
        if (sc_gen->parsed()) return run_gen_fgn(gen);
        if (sc_eh->parsed()) return run_est_hurst(eh);
        if (sc_eq->parsed()) return run_est_qgv(eq);
        if (sc_fit->parsed()) return run_fit(fit);
        if (sc_fc->parsed()) return run_forecast(fc);
        if (sc_sv->parsed()) return run_survival(sv);
        if (sc_fx->parsed()) return run_fixture(fx);
    } catch (const fracmort::error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        ordered_json j;
        j["error"]["module"] = "cli";
        j["error"]["type"] = "internal";
        j["error"]["message"] = e.what();
        std::cerr << j.dump(2) << '\n';
        return 3;
    }
    return 0;
}
