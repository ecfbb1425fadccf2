#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracmort {

// Base class for all library errors.  Every throw site names the module it
// originates from so callers (notably the CLI) can attribute failures.
class error : public std::runtime_error {
public:
    error(std::string module, std::string kind, const std::string& message)
        : std::runtime_error(message), module_(std::move(module)), kind_(std::move(kind)) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string module_;
    std::string kind_;
};

// A precondition on an argument was violated.
class invalid_argument_error : public error {
public:
    invalid_argument_error(std::string module, const std::string& message)
        : error(std::move(module), "invalid-argument", message) {}
};

// Not enough data to carry out the computation (too few points, too few
// usable windows, degenerate constant input, ...).
class insufficient_data_error : public error {
public:
    insufficient_data_error(std::string module, const std::string& message)
        : error(std::move(module), "insufficient-data", message) {}
};

// Input has no variation where variation is required (a zero quadratic
// variation, a zero second moment).
class insufficient_variation_error : public error {
public:
    insufficient_variation_error(std::string module, const std::string& message)
        : error(std::move(module), "insufficient-variation", message) {}
};

// A filter/sample combination produced an impossible intermediate value
// (nonpositive radicand in the scale estimator).
class filter_inconsistency_error : public error {
public:
    filter_inconsistency_error(std::string module, const std::string& message)
        : error(std::move(module), "filter-inconsistency", message) {}
};

// Numerical breakdown that should not occur for valid inputs.
class numerical_degeneracy_error : public error {
public:
    numerical_degeneracy_error(std::string module, const std::string& message)
        : error(std::move(module), "numerical-degeneracy", message) {}
};

// A requested table slice has holes; carries the missing years.
class data_gap_error : public error {
public:
    data_gap_error(std::string module, const std::string& message, std::vector<int> missing_years)
        : error(std::move(module), "data-gap", message), missing_years_(std::move(missing_years)) {}

    const std::vector<int>& missing_years() const noexcept { return missing_years_; }

private:
    std::vector<int> missing_years_;
};

// A requested key (age, sex, year) is not present at all.
class not_found_error : public error {
public:
    not_found_error(std::string module, const std::string& message)
        : error(std::move(module), "not-found", message) {}
};

// The input stream could not be parsed at all.
class parse_error : public error {
public:
    parse_error(std::string module, const std::string& message)
        : error(std::move(module), "parse", message) {}
};

} // namespace fracmort
