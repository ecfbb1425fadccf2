#pragma once

// HMD-style (Human Mortality Database) period death-rate tables: parsing the
// whitespace-delimited Mx 1x1 text layout, the matching serializer, canonical
// CSV/JSON dumps, cohort extraction, and synthetic fixture generation from
// the log-hazard model so tests never depend on redistributable real data.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "mortality.hpp"

namespace fracmort {

// Rectangular year x age x sex grid of central death rates.  A cell can be
// present (always > 0) or missing; missing is distinct from zero.  Age 110
// stands for the open "110+" group.
struct MortalityTable {
    std::string country_label;
    std::vector<int> years;   // ascending
    std::vector<int> ages;    // ascending, within 0..110
    std::vector<std::optional<double>> cells;   // [year][age][sex], sex order F, M, T

    static constexpr std::size_t sex_index(Sex s) {
        return s == Sex::female ? 0 : s == Sex::male ? 1 : 2;
    }

    std::size_t cell_index(std::size_t year_pos, std::size_t age_pos, Sex s) const {
        return (year_pos * ages.size() + age_pos) * 3 + sex_index(s);
    }

    // Position lookups; not-found reported explicitly rather than as missing.
    std::size_t year_pos(int year) const {
        const auto it = std::lower_bound(years.begin(), years.end(), year);
        if (it == years.end() || *it != year)
            throw not_found_error("data", "year " + std::to_string(year) + " not in table");
        return static_cast<std::size_t>(it - years.begin());
    }

    std::size_t age_pos(int age) const {
        const auto it = std::lower_bound(ages.begin(), ages.end(), age);
        if (it == ages.end() || *it != age)
            throw not_found_error("data", "age " + std::to_string(age) + " not in table");
        return static_cast<std::size_t>(it - ages.begin());
    }

    bool has_year(int year) const {
        return std::binary_search(years.begin(), years.end(), year);
    }

    bool has_age(int age) const {
        return std::binary_search(ages.begin(), ages.end(), age);
    }

    std::optional<double> rate(int year, int age, Sex s) const {
        return cells[cell_index(year_pos(year), age_pos(age), s)];
    }

    bool operator==(const MortalityTable&) const = default;
};

struct ParseReport {
    std::size_t total_rows = 0;      // non-blank lines after the two headers
    std::size_t ingested_rows = 0;
    std::size_t skipped_rows = 0;
    std::vector<std::string> messages;
};

struct HmdParseResult {
    MortalityTable table;
    ParseReport report;
};

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) tokens.push_back(std::move(tok));
    return tokens;
}

inline std::string strip_cr(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
        line.pop_back();
    return line;
}

inline bool parse_int(const std::string& tok, int& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline bool parse_double(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

// Round to the 6-decimal wire format, flooring at 1e-6 so a positive rate
// never serializes to zero.  Returns the exact double the serialized text
// parses back to, which is what makes round-trips bit-exact.
inline double quantize_rate(double rate) {
    const double floored = rate < 1e-6 ? 1e-6 : rate;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", floored);
    return std::strtod(buf, nullptr);
}

inline void append_shortest(std::string& out, double value) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, res.ptr);
}

} // namespace detail

// Reads the Mx 1x1 layout: two header lines (free-form title, column names),
// then whitespace-delimited rows Year Age Female Male Total.  Age "110+"
// maps to 110; "." marks a missing value.  Malformed rows are skipped and
// reported; nonpositive rates are ingested as missing cells with a message.
inline HmdParseResult parse_hmd(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw parse_error("data", "empty input: expected two header lines");
    const std::string label = detail::strip_cr(line);
    if (!std::getline(in, line))
        throw parse_error("data", "truncated input: expected a second header line");

    struct Row {
        int year, age;
        std::array<std::optional<double>, 3> values;
    };
    std::vector<Row> rows;
    ParseReport report;

    std::size_t line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = detail::split_tokens(detail::strip_cr(line));
        if (tokens.empty()) continue;
        ++report.total_rows;
        const std::string where = "line " + std::to_string(line_no);

        if (tokens.size() != 5) {
            ++report.skipped_rows;
            report.messages.push_back(where + ": expected 5 columns, found " +
                                      std::to_string(tokens.size()));
            continue;
        }
        Row row{};
        if (!detail::parse_int(tokens[0], row.year)) {
            ++report.skipped_rows;
            report.messages.push_back(where + ": unreadable year '" + tokens[0] + "'");
            continue;
        }
        if (tokens[1] == "110+") {
            row.age = 110;
        } else if (!detail::parse_int(tokens[1], row.age) || row.age < 0 || row.age > 110) {
            ++report.skipped_rows;
            report.messages.push_back(where + ": unreadable age '" + tokens[1] + "'");
            continue;
        }
        bool bad = false;
        for (std::size_t c = 0; c < 3 && !bad; ++c) {
            const std::string& tok = tokens[2 + c];
            if (tok == ".") continue;
            double value;
            if (!detail::parse_double(tok, value)) {
                ++report.skipped_rows;
                report.messages.push_back(where + ": unreadable rate '" + tok + "'");
                bad = true;
            } else if (!(value > 0.0)) {
                report.messages.push_back(where + ": nonpositive rate '" + tok +
                                          "' treated as missing");
            } else {
                row.values[c] = value;
            }
        }
        if (bad) continue;
        rows.push_back(row);
        ++report.ingested_rows;
    }

    if (report.total_rows == 0)
        throw parse_error("data", "no data rows after the header lines");
    if (report.ingested_rows == 0)
        throw parse_error("data", "no valid data rows");

    MortalityTable table;
    table.country_label = label;
    for (const Row& r : rows) {
        if (!table.has_year(r.year))
            table.years.insert(
                std::lower_bound(table.years.begin(), table.years.end(), r.year), r.year);
        if (!table.has_age(r.age))
            table.ages.insert(std::lower_bound(table.ages.begin(), table.ages.end(), r.age),
                              r.age);
    }
    table.cells.assign(table.years.size() * table.ages.size() * 3, std::nullopt);
    for (const Row& r : rows) {
        const std::size_t yp = table.year_pos(r.year);
        const std::size_t ap = table.age_pos(r.age);
        for (std::size_t c = 0; c < 3; ++c)
            table.cells[(yp * table.ages.size() + ap) * 3 + c] = r.values[c];
    }
    return {std::move(table), std::move(report)};
}

inline HmdParseResult parse_hmd(const std::string& text) {
    std::istringstream is(text);
    return parse_hmd(is);
}

// Inverse of parse_hmd for tables whose rates are already on the 6-decimal
// grid (all synthesized fixtures are).
inline void write_hmd(const MortalityTable& table, std::ostream& os) {
    os << table.country_label << '\n';
    os << "Year  Age  Female  Male  Total\n";
    char buf[48];
    for (std::size_t yp = 0; yp < table.years.size(); ++yp) {
        for (std::size_t ap = 0; ap < table.ages.size(); ++ap) {
            os << table.years[yp] << "  ";
            if (table.ages[ap] == 110)
                os << "110+";
            else
                os << table.ages[ap];
            for (std::size_t c = 0; c < 3; ++c) {
                const auto& cell = table.cells[(yp * table.ages.size() + ap) * 3 + c];
                if (cell) {
                    std::snprintf(buf, sizeof buf, "%.6f", *cell);
                    os << "  " << buf;
                } else {
                    os << "  .";
                }
            }
            os << '\n';
        }
    }
}

// Tidy dump of the present cells only.
inline void write_csv(const MortalityTable& table, std::ostream& os) {
    os << "year,age,sex,rate\n";
    std::string out;
    for (std::size_t yp = 0; yp < table.years.size(); ++yp)
        for (std::size_t ap = 0; ap < table.ages.size(); ++ap)
            for (Sex s : {Sex::female, Sex::male, Sex::total}) {
                const auto& cell = table.cells[(yp * table.ages.size() + ap) * 3 +
                                               MortalityTable::sex_index(s)];
                if (!cell) continue;
                out.clear();
                out += std::to_string(table.years[yp]);
                out += ',';
                out += std::to_string(table.ages[ap]);
                out += ',';
                out += sex_letter(s);
                out += ',';
                detail::append_shortest(out, *cell);
                out += '\n';
                os << out;
            }
}

// Full structured dump; missing cells serialize as null.
inline void write_json(const MortalityTable& table, std::ostream& os) {
    nlohmann::ordered_json j;
    j["country_label"] = table.country_label;
    j["years"] = table.years;
    j["ages"] = table.ages;
    for (Sex s : {Sex::female, Sex::male, Sex::total}) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t yp = 0; yp < table.years.size(); ++yp) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (std::size_t ap = 0; ap < table.ages.size(); ++ap) {
                const auto& cell = table.cells[(yp * table.ages.size() + ap) * 3 +
                                               MortalityTable::sex_index(s)];
                if (cell)
                    row.push_back(*cell);
                else
                    row.push_back(nullptr);
            }
            rows.push_back(std::move(row));
        }
        j["rates"][to_string(s)] = std::move(rows);
    }
    os << j.dump(2) << '\n';
}

// Slice one (age, sex) channel over [year_start, year_end].  The window must
// be complete: any year absent from the table or present-but-missing raises
// a gap error carrying the offending years.
inline CohortSeries extract_cohort(const MortalityTable& table, int age, Sex sex,
                                   int year_start, int year_end) {
    if (year_start > year_end)
        throw invalid_argument_error("data", "year_start must be <= year_end");
    if (!table.has_age(age))
        throw not_found_error("data", "age " + std::to_string(age) + " not in table");
    const std::size_t ap = table.age_pos(age);

    CohortSeries series;
    series.age = age;
    series.sex = sex;
    std::vector<int> missing;
    for (int year = year_start; year <= year_end; ++year) {
        if (!table.has_year(year)) {
            missing.push_back(year);
            continue;
        }
        const auto& cell =
            table.cells[(table.year_pos(year) * table.ages.size() + ap) * 3 +
                        MortalityTable::sex_index(sex)];
        if (!cell) {
            missing.push_back(year);
            continue;
        }
        series.years.push_back(year);
        series.rates.push_back(*cell);
    }
    if (!missing.empty()) {
        std::string msg = "missing years for age " + std::to_string(age) + ":";
        for (int y : missing) msg += ' ' + std::to_string(y);
        throw data_gap_error("data", msg, std::move(missing));
    }
    series.validate();
    return series;
}

// Per-age generator parameters for synthetic tables: rates follow
// h(t) = h0 exp(alpha0 t + Y_t) with Y a fractional OU path (sigma = 0
// degenerates to an exactly log-linear age profile).
struct FixtureAgeParams {
    int age = 0;
    double h0 = 0.01;
    double alpha0 = 0.0;
    double hurst = 0.7;
    double sigma = 0.2;    // >= 0
    double lambda = 1.0;   // > 0
};

struct FixtureSpec {
    std::string country_label = "Synthetic, Death rates (period 1x1)";
    std::vector<int> years;
    std::vector<FixtureAgeParams> ages;
    std::uint64_t seed = 0;
};

// Builds a full three-channel table; each (age, sex) channel gets an
// independent noise path derived from the base seed.  Rates are quantized to
// the 6-decimal wire format up front, so write_hmd -> parse_hmd is an exact
// round trip.
inline MortalityTable synthesize_fixture(const FixtureSpec& spec) {
    if (spec.years.empty())
        throw invalid_argument_error("data", "fixture needs at least one year");
    for (std::size_t i = 1; i < spec.years.size(); ++i)
        if (spec.years[i] != spec.years[i - 1] + 1)
            throw invalid_argument_error("data", "fixture years must be contiguous ascending");
    if (spec.ages.empty())
        throw invalid_argument_error("data", "fixture needs at least one age");
    for (std::size_t i = 1; i < spec.ages.size(); ++i)
        if (spec.ages[i].age <= spec.ages[i - 1].age)
            throw invalid_argument_error("data", "fixture ages must be strictly ascending");

    MortalityTable table;
    table.country_label = spec.country_label;
    table.years = spec.years;
    table.ages.reserve(spec.ages.size());
    for (const auto& a : spec.ages) {
        if (a.age < 0 || a.age > 110)
            throw invalid_argument_error("data", "fixture ages must lie in 0..110");
        if (!(a.h0 > 0.0))
            throw invalid_argument_error("data", "fixture h0 must be > 0");
        if (!(a.sigma >= 0.0))
            throw invalid_argument_error("data", "fixture sigma must be >= 0");
        if (!(a.lambda > 0.0))
            throw invalid_argument_error("data", "fixture lambda must be > 0");
        table.ages.push_back(a.age);
    }

    const std::size_t n = spec.years.size();
    table.cells.assign(n * table.ages.size() * 3, std::nullopt);
    for (std::size_t ap = 0; ap < spec.ages.size(); ++ap) {
        const auto& a = spec.ages[ap];
        for (std::size_t c = 0; c < 3; ++c) {
            std::vector<double> y(n, 0.0);
            if (a.sigma > 0.0 && n >= 2) {
                // Channel streams strided far apart so nearby table seeds do
                // not share noise paths.
                const std::uint64_t sub_seed =
                    spec.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(3 * ap + c + 1);
                const FouParams params(a.lambda, a.sigma, HurstIndex(a.hurst), 1.0);
                y = simulate_fou(params, n - 1, sub_seed).values;
            }
            for (std::size_t ti = 0; ti < n; ++ti) {
                const double h =
                    a.h0 * std::exp(a.alpha0 * static_cast<double>(ti) + y[ti]);
                table.cells[(ti * table.ages.size() + ap) * 3 + c] =
                    detail::quantize_rate(h);
            }
        }
    }
    return table;
}

} // namespace fracmort
