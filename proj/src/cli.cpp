#include "confspec/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "confspec/experiments.hpp"

#ifndef CONFSPEC_VERSION
#define CONFSPEC_VERSION "unknown"
#endif

namespace confspec::cli {

using nlohmann::ordered_json;

std::vector<double> parse_value_list(const std::string& text) {
    auto number = [&](const std::string& item) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !std::isfinite(v)) {
            throw std::invalid_argument("malformed number '" + item + "' in list '" + text + "'");
        }
        return v;
    };
    std::vector<double> out;
    std::stringstream items(text);
    std::string item;
    while (std::getline(items, item, ',')) {
        std::vector<std::string> parts;
        std::stringstream pieces(item);
        std::string piece;
        while (std::getline(pieces, piece, ':')) parts.push_back(piece);
        if (parts.size() == 1) {
            out.push_back(number(parts[0]));
        } else if (parts.size() == 3) {
            const double a = number(parts[0]), b = number(parts[1]), s = number(parts[2]);
            if (!(s > 0.0) || b < a) throw std::invalid_argument("range '" + item + "' needs start <= stop and step > 0");
            const auto steps = static_cast<long>(std::floor((b - a) / s + 1e-9));
            for (long i = 0; i <= steps; ++i) out.push_back(a + static_cast<double>(i) * s);
        } else {
            throw std::invalid_argument("malformed range '" + item + "' (expected start:stop:step)");
        }
    }
    if (out.empty()) throw std::invalid_argument("empty value list");
    return out;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

// Status of a command: data rows for the CSV plus a summary for the sidecar.
struct Outcome {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    ordered_json summary = ordered_json::object();
    bool passed = true;
    bool header_line = true;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + '"';
}

std::string render_csv(const Outcome& o) {
    std::string text;
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) text += ',';
            text += csv_field(fields[i]);
        }
        text += '\n';
    };
    if (o.header_line) line(o.header);
    for (const auto& r : o.rows) line(r);
    return text;
}

ordered_json json_number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(format_double(x)); }

ordered_json config_json(const RunConfig& c) {
    ordered_json j;
    j["command"] = c.command;
    j["operator"] = c.operator_name;
    j["n"] = c.n;
    j["N"] = c.counts;
    j["L"] = c.lengths;
    j["path"] = c.path;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["out"] = c.out;
    j["ell_max"] = c.ell_max;
    j["j"] = c.j;
    j["sign"] = c.sign;
    j["cylinder"] = c.cylinder;
    j["c"] = c.scales;
    j["residual_tolerance"] = c.residual_tolerance;
    return j;
}

std::size_t as_count(double x) {
    if (!(x >= 2.0) || x != std::floor(x) || x > 1e8) throw std::invalid_argument("grid size must be an integer >= 2");
    return static_cast<std::size_t>(x);
}

std::size_t single_count(const RunConfig& c) {
    if (c.counts.size() != 1) throw std::invalid_argument("--N takes a single grid size for " + c.command);
    return as_count(c.counts[0]);
}

OperatorKind make_kind(RunConfig& c) {
    const OperatorFamily family = parse_operator_family(c.operator_name);
    if (c.n == 0) c.n = family == OperatorFamily::ConformalLaplacian ? 3 : family == OperatorFamily::Paneitz ? 5 : 2;
    return OperatorKind(family, c.n);
}

ExperimentOptions make_options(const RunConfig& c) {
    ExperimentOptions opt;
    opt.solver.seed = c.seed;
    opt.solver.tolerance = c.residual_tolerance;
    opt.jobs = c.jobs;
    return opt;
}

Outcome cylinder_thresholds(RunConfig& c) {
    const OperatorKind kind = make_kind(c);
    Outcome o;
    o.header_line = false;
    const double sigma = cylinder_threshold(kind);
    o.rows.push_back({"sigma", format_double(sigma)});
    o.summary["sigma"] = sigma;
    return o;
}

Outcome validate_sphere_cmd(RunConfig& c) {
    const OperatorKind kind = make_kind(c);
    if (c.ell_max < 0) c.ell_max = kind.family() == OperatorFamily::Dirac ? 5 : kind.family() == OperatorFamily::Paneitz ? 2 : 7;
    const SphereValidation v = validate_sphere(kind, single_count(c), c.ell_max, make_options(c));
    Outcome o;
    o.header = {"analytic", "computed", "relative_error", "multiplicity", "found"};
    double worst = 0.0;
    for (const SphereLevel& l : v.levels) {
        o.rows.push_back({format_double(l.analytic), format_double(l.computed), format_double(l.relative_error),
                          std::to_string(l.multiplicity), std::to_string(l.found)});
        worst = std::isnan(l.relative_error) ? worst : std::max(worst, l.relative_error);
    }
    o.passed = v.passed;
    o.summary["levels"] = v.levels.size();
    o.summary["max_relative_error"] = worst;
    o.summary["tolerance"] = v.tolerance;
    ordered_json spurious = ordered_json::array();
    for (double u : v.unmatched) spurious.push_back(u);
    o.summary["unmatched"] = spurious;
    return o;
}

Outcome sweep_cmd(RunConfig& c) {
    const OperatorKind kind = make_kind(c);
    const std::vector<SweepRow> rows =
        pinocchio_sweep(kind, c.lengths, single_count(c), parse_path_choice(c.path), make_options(c));
    Outcome o;
    o.header = {"L", "lambda1plus", "volume", "invariant", "sigma", "modes", "max_residual"};
    ordered_json failures = ordered_json::array();
    ordered_json paths = ordered_json::array();
    for (const SweepRow& r : rows) {
        o.rows.push_back({format_double(r.length), format_double(r.lambda_1_plus), format_double(r.volume),
                          format_double(r.invariant), format_double(r.sigma), std::to_string(r.modes_used),
                          format_double(r.max_residual)});
        paths.push_back(path_name(r.path));
        if (!r.error.empty()) failures.push_back({{"L", r.length}, {"error", r.error}});
    }
    o.passed = failures.empty();
    o.summary["rows"] = rows.size();
    o.summary["paths"] = paths;
    o.summary["failed_rows"] = failures;
    return o;
}

Outcome convergence_cmd(RunConfig& c) {
    const OperatorKind kind = make_kind(c);
    if (c.sign != "plus" && c.sign != "minus") throw std::invalid_argument("--sign must be plus or minus");
    const ExperimentOptions opt = make_options(c);
    const ConvergenceReport r = c.cylinder
                                    ? cylinder_surrogate(kind, c.lengths, single_count(c), opt)
                                    : convergence_study(kind, c.j, c.sign == "plus", c.lengths, single_count(c),
                                                        parse_path_choice(c.path), opt);
    Outcome o;
    o.header = {c.cylinder ? "T" : "L", "value", "difference", "analytic"};
    double law = 0.0;
    for (const TrajectoryPoint& p : r.points) {
        o.rows.push_back({format_double(p.length), format_double(p.value), format_double(p.difference),
                          format_double(p.analytic)});
        if (c.cylinder) law = std::max(law, std::abs(p.value - p.analytic));
    }
    o.passed = dichotomy_consistent(r) && (!c.cylinder || law <= 1e-3);
    o.summary["flag"] = flag_name(r.flag);
    o.summary["sigma"] = r.sigma;
    o.summary["extrapolated"] = json_number(r.extrapolated);
    o.summary["dichotomy_consistent"] = dichotomy_consistent(r);
    if (c.cylinder) o.summary["max_law_deviation"] = law;
    return o;
}

Outcome crosscheck_cmd(RunConfig& c) {
    const OperatorKind kind = make_kind(c);
    if (c.lengths.size() != 1) throw std::invalid_argument("covariance-check takes a single --L");
    std::vector<std::size_t> counts;
    for (double x : c.counts) counts.push_back(as_count(x));
    const ConformalProfile profile = c.lengths[0] == 0.0 ? profile_constant(c.n, 1.0) : profile_L(c.n, c.lengths[0]);
    const CrosscheckReport r = covariance_crosscheck(kind, profile, counts, make_options(c));
    Outcome o;
    o.header = {"N", "discrepancy", "covariance_change", "intrinsic_change"};
    for (const CrosscheckRow& row : r.rows) {
        o.rows.push_back({std::to_string(row.count), format_double(row.discrepancy), format_double(row.covariance_change),
                          format_double(row.intrinsic_change)});
    }
    auto list = [](const std::vector<double>& v) {
        ordered_json a = ordered_json::array();
        for (double x : v) a.push_back(json_number(x));
        return a;
    };
    o.passed = r.passed;
    o.summary["tolerance"] = r.tolerance;
    o.summary["covariance_ratios"] = list(r.covariance_ratios);
    o.summary["intrinsic_ratios"] = list(r.intrinsic_ratios);
    o.summary["discrepancy_ratios"] = list(r.discrepancy_ratios);
    return o;
}

Outcome scaling_cmd(RunConfig& c) {
    const OperatorKind kind = make_kind(c);
    Outcome o;
    o.header = {"c", "eigenvalue_error", "volume_ratio", "invariant_base", "invariant_scaled", "invariant_error", "passed"};
    for (double s : c.scales) {
        const ScalingReport r = scaling_check(kind, s, single_count(c), make_options(c));
        o.rows.push_back({format_double(s), format_double(r.eigenvalue_error), format_double(r.volume_ratio),
                          format_double(r.invariant_base), format_double(r.invariant_scaled),
                          format_double(r.invariant_error), r.passed ? "true" : "false"});
        o.passed = o.passed && r.passed;
    }
    o.summary["tolerance"] = 1e-12;
    return o;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

std::string version_string() {
    return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
           std::to_string(EIGEN_MINOR_VERSION);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    cfg.seed = SolveOptions{}.seed;
    std::string counts_text, lengths_text, scales_text;

    CLI::App app{"Spectra of conformally covariant operators on rotationally symmetric spheres", "confspec"};
    app.require_subcommand(1, 1);

    struct Subcommand {
        const char* name;
        const char* help;
        std::function<Outcome(RunConfig&)> body;
        bool lengths, counts_list, path, ell, conv, scales;
        const char* default_lengths;
        const char* default_counts;
    };
    const std::vector<Subcommand> subcommands = {
        {"cylinder-thresholds", "Bottom of the cylinder spectrum sigma", cylinder_thresholds, false, false, false, false, false, false, "", "2000"},
        {"validate-sphere", "Round-sphere spectrum against the closed-form ladder", validate_sphere_cmd, false, false, false, true, false, false, "", "2000"},
        {"pinocchio-sweep", "lambda_1^+ vol^{k/n} along the nose family", sweep_cmd, true, false, true, false, false, false, "1:8:1", "2000"},
        {"convergence", "Eigenvalue trajectory and convergence dichotomy", convergence_cmd, true, false, true, false, true, false, "2:10:2", "2000"},
        {"covariance-check", "Agreement of covariance and intrinsic assembly", crosscheck_cmd, true, true, false, false, false, false, "1", "500,1000,2000"},
        {"scaling-check", "Exact c^{-k} scaling under constant conformal factors", scaling_cmd, false, false, false, false, false, true, "", "2000"},
    };

    std::map<CLI::App*, const Subcommand*> by_app;
    for (const Subcommand& s : subcommands) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        by_app[sub] = &s;
        sub->add_option("--operator", cfg.operator_name, "conformal-laplacian | paneitz | dirac")
            ->envname("CONFSPEC_OPERATOR")
            ->capture_default_str();
        sub->add_option("--n", cfg.n, "Dimension (default: 3, 5 or 2 by operator)")->envname("CONFSPEC_DIMENSION");
        sub->add_option("--N", counts_text, s.counts_list ? "Grid sizes, comma list or a:b:s" : "Grid size")
            ->envname("CONFSPEC_N")
            ->default_str(s.default_counts);
        sub->add_option("--seed", cfg.seed, "Solver seed")->envname("CONFSPEC_SEED")->capture_default_str();
        sub->add_option("--jobs", cfg.jobs, "Worker threads (0: all cores)")->envname("CONFSPEC_JOBS")->capture_default_str();
        sub->add_option("--out", cfg.out, "CSV output path; a JSON sidecar goes to <out>.json")->envname("CONFSPEC_OUT");
        sub->add_option("--residual-tol", cfg.residual_tolerance, "Residual bound for reported eigenpairs")
            ->envname("CONFSPEC_RESIDUAL_TOL")
            ->capture_default_str();
        if (s.lengths) {
            sub->add_option("--L", lengths_text, "Nose lengths, a:b:s or comma list")->envname("CONFSPEC_L")->default_str(s.default_lengths);
        }
        if (s.path) {
            sub->add_option("--path", cfg.path, "auto | covariance | intrinsic")->envname("CONFSPEC_PATH")->capture_default_str();
        }
        if (s.ell) sub->add_option("--ell-max", cfg.ell_max, "Highest degree checked")->envname("CONFSPEC_ELL_MAX");
        if (s.conv) {
            sub->add_option("--j", cfg.j, "Eigenvalue index")->envname("CONFSPEC_J")->capture_default_str();
            sub->add_option("--sign", cfg.sign, "plus | minus")->envname("CONFSPEC_SIGN")->capture_default_str();
            sub->add_flag("--cylinder", cfg.cylinder, "Exact cylinder segments of lengths --L instead of noses")
                ->envname("CONFSPEC_CYLINDER");
        }
        if (s.scales) sub->add_option("--c", scales_text, "Scale factors")->envname("CONFSPEC_C")->default_str("0.5,2,3");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    const Subcommand& chosen = *by_app.at(sub);
    cfg.command = chosen.name;

    Outcome outcome;
    try {
        cfg.counts = parse_value_list(counts_text.empty() ? chosen.default_counts : counts_text);
        if (chosen.lengths) cfg.lengths = parse_value_list(lengths_text.empty() ? chosen.default_lengths : lengths_text);
        if (chosen.scales) cfg.scales = parse_value_list(scales_text.empty() ? "0.5,2,3" : scales_text);
        if (!chosen.scales) cfg.scales.clear();
        outcome = chosen.body(cfg);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n\n" << sub->help();
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    ordered_json sidecar;
    sidecar["config"] = config_json(cfg);
    sidecar["versions"] = {{"confspec", CONFSPEC_VERSION}, {"eigen", version_string()},
                           {"cli11", CLI11_VERSION}, {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    sidecar["passed"] = outcome.passed;
    sidecar["summary"] = outcome.summary;

    const std::string csv = render_csv(outcome);
    try {
        if (cfg.out.empty()) {
            out << csv;
        } else {
            write_file(cfg.out, csv);
            write_file(cfg.out + ".json", sidecar.dump(2) + "\n");
            out << "wrote " << cfg.out << " (" << outcome.rows.size() << " rows); checks "
                << (outcome.passed ? "passed" : "FAILED") << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    if (!outcome.passed) {
        err << cfg.command << ": checks failed\n";
        return 2;
    }
    return 0;
}

}  // namespace confspec::cli
