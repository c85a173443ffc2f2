#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace confspec::cli {

/// Effective configuration of one run; echoed verbatim into the JSON sidecar.
struct RunConfig {
    std::string command;
    std::string operator_name = "conformal-laplacian";
    int n = 0;  // 0 selects the smallest supported dimension of the operator
    std::vector<double> counts{2000};
    std::vector<double> lengths;
    std::string path = "auto";
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string out;
    int ell_max = -1;  // -1 selects the per-operator default
    int j = 1;
    std::string sign = "plus";
    bool cylinder = false;
    std::vector<double> scales{0.5, 2.0, 3.0};
    double residual_tolerance = 1e-9;
};

/**
 * Parses `a:b:s` ranges (inclusive, values a + i s) and comma lists of
 * numbers or ranges. Throws std::invalid_argument on malformed input.
 */
std::vector<double> parse_value_list(const std::string& text);

/// "%.17g" text of a double; nan and inf are spelled out.
std::string format_double(double x);

/**
 * Runs one subcommand with arguments excluding the program name. Returns 0
 * when all checks pass, 2 when checks ran and failed, 1 on a usage or
 * configuration error (usage text goes to `err`).
 *
 * Every flag may also be set through the environment as CONFSPEC_<FLAG>,
 * e.g. CONFSPEC_N or CONFSPEC_ELL_MAX (--n is CONFSPEC_DIMENSION, as
 * environment names are matched case-sensitively); explicit flags win.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace confspec::cli
