#pragma once

// Command-line front end. run_subcommand returns the process exit code:
// 0 success, 1 usage error, 2 domain error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsm/core_map.hpp"
#include "dsm/cycles.hpp"
#include "dsm/errors.hpp"
#include "dsm/linearize.hpp"
#include "dsm/scan.hpp"
#include "dsm/thermo.hpp"

namespace dsm::cli {

using json = nlohmann::ordered_json;

inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T>
json nullable(const std::optional<T>& v) {
    if (!v) return nullptr;
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(*v)) return nullptr;
    }
    return *v;
}

/// Shared schema of the single-result subcommands.
struct ResultRecord {
    std::optional<double> a, b;
    std::optional<long long> period, type_k;
    std::optional<double> lambda, nu, xi_re, xi_im, t_lower, t_star, t_upper;
    std::string status = "ok";

    json to_json() const {
        return json{{"a", nullable(a)},           {"b", nullable(b)},         {"period", nullable(period)},
                    {"type_k", nullable(type_k)}, {"lambda", nullable(lambda)}, {"nu", nullable(nu)},
                    {"xi_re", nullable(xi_re)},   {"xi_im", nullable(xi_im)}, {"t_lower", nullable(t_lower)},
                    {"t_star", nullable(t_star)}, {"t_upper", nullable(t_upper)}, {"status", status}};
    }
    std::string dump() const { return to_json().dump(); }
};

namespace detail {

inline void fill_classification(ResultRecord& rec, const Parameter& p, int q_max, bool need_tongue) {
    rec.a = p.a;
    rec.b = p.b;
    const auto cls = classify(p, q_max);
    if (!cls.in_tongue()) {
        if (need_tongue) throw Error(Status::not_in_tongue, "no attracting cycle up to period " + std::to_string(q_max));
        rec.status = "no_attracting_cycle";
        return;
    }
    rec.period = cls.cycle->period;
    rec.type_k = cls.type->k;
    rec.lambda = cls.cycle->lambda;
    const auto xi = [&] {
        const auto u = uniformize(make_koenigs_frame(p, *cls.cycle));
        rec.nu = u.nu;
        rec.xi_re = u.xi.real();
        rec.xi_im = u.xi.imag();
    };
    if (need_tongue) {
        xi();
    } else {
        try {
            xi();
        } catch (const Error&) {
            // outside the linearization window: nu and xi stay null
        }
    }
}

inline std::vector<DimensionRow> read_dimension_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(Status::io_error, "cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw Error(Status::io_error, path + ": empty file");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) header.push_back(c);
    }
    const auto col = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error(Status::io_error, path + ": missing column " + name);
    };
    const std::size_t ia = col("a"), ib = col("b"), il = col("t_lower"), is = col("t_star"), iu = col("t_upper"),
                      ist = col("status");
    std::vector<DimensionRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (cells.size() != header.size()) throw Error(Status::io_error, path + ": malformed row");
        DimensionRow r;
        r.a = std::strtod(cells[ia].c_str(), nullptr);
        r.b = std::strtod(cells[ib].c_str(), nullptr);
        r.t_lower = std::strtod(cells[il].c_str(), nullptr);
        r.t_star = std::strtod(cells[is].c_str(), nullptr);
        r.t_upper = std::strtod(cells[iu].c_str(), nullptr);
        r.status = cells[ist];
        rows.push_back(r);
    }
    return rows;
}

template <class F>
void write_to(const std::string& path, std::ostream& fallback, F&& emit) {
    if (path.empty() || path == "-") {
        emit(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error(Status::io_error, "cannot open " + path + " for writing");
    emit(f);
    if (!f) throw Error(Status::io_error, "write failed for " + path);
}

}  // namespace detail

inline int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Double Standard Map laboratory"};
    app.require_subcommand(1);

    double a = 0.0, b = 0.0, seed_a = 0.5, seed_b = 0.75, xi_re = 0.0, xi_im = 0.0, nu = 0.0, tol = 1e-2;
    double lambda_from = 0.9, lambda_to = 0.1;
    double from_a = 0.5, from_b = 0.6, to_a = 0.5, to_b = 0.95;
    int q_max = 12, q = 1, steps = 9, n = 8, workers = 1;
    std::string out_path, in_path;
    ScanConfig scfg;

    auto* classify_cmd = app.add_subcommand("classify", "classify a parameter into a tongue");
    auto* uniformize_cmd = app.add_subcommand("uniformize", "multiplier, critical angle and Xi");
    auto* invert_cmd = app.add_subcommand("invert", "parameter with a given Xi, by continuation from a seed");
    auto* ray_cmd = app.add_subcommand("ray", "trace an internal ray");
    auto* super_cmd = app.add_subcommand("superattracting", "superattracting parameters on b = 1");
    auto* dim_cmd = app.add_subcommand("dimension", "Hausdorff dimension of the repeller");
    auto* field_cmd = app.add_subcommand("dimension-field", "dimensions along a parameter segment (CSV)");
    auto* smooth_cmd = app.add_subcommand("smoothness", "polynomial-fit diagnostic of a dimension CSV");
    auto* scan_cmd = app.add_subcommand("scan", "classify a parameter window and write a PPM");

    for (auto* c : {classify_cmd, uniformize_cmd, dim_cmd}) {
        c->add_option("--a", a, "angle parameter")->required();
        c->add_option("--b", b, "amplitude in [0,1]")->required();
        c->add_option("--qmax", q_max, "largest period searched")->check(CLI::Range(1, 30));
    }
    dim_cmd->add_option("--tol", tol, "bracket width for the Bowen root");
    for (auto* c : {invert_cmd, ray_cmd, field_cmd}) {
        c->add_option("--seed-a", seed_a, "seed parameter a");
        c->add_option("--seed-b", seed_b, "seed parameter b");
    }
    invert_cmd->add_option("--xi-re", xi_re)->required();
    invert_cmd->add_option("--xi-im", xi_im)->required();
    ray_cmd->add_option("--nu", nu, "ray angle in (0, pi)")->required();
    ray_cmd->add_option("--lambda-from", lambda_from);
    ray_cmd->add_option("--lambda-to", lambda_to);
    ray_cmd->add_option("--steps", steps)->check(CLI::PositiveNumber);
    ray_cmd->add_option("--out", out_path, "CSV path (stdout if omitted)");
    super_cmd->add_option("--q", q)->required()->check(CLI::Range(1, 20));
    field_cmd->add_option("--from-a", from_a);
    field_cmd->add_option("--from-b", from_b);
    field_cmd->add_option("--to-a", to_a);
    field_cmd->add_option("--to-b", to_b);
    field_cmd->add_option("--n", n)->check(CLI::PositiveNumber);
    field_cmd->add_option("--tol", tol);
    field_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);
    field_cmd->add_option("--out", out_path, "CSV path (stdout if omitted)");
    smooth_cmd->add_option("--in", in_path, "CSV written by dimension-field")->required();
    scan_cmd->add_option("--amin", scfg.a_min);
    scan_cmd->add_option("--amax", scfg.a_max);
    scan_cmd->add_option("--bmin", scfg.b_min);
    scan_cmd->add_option("--bmax", scfg.b_max);
    scan_cmd->add_option("--width", scfg.width);
    scan_cmd->add_option("--height", scfg.height);
    scan_cmd->add_option("--qmax", scfg.q_max);
    scan_cmd->add_option("--workers", scfg.workers);
    scan_cmd->add_option("--out", out_path, "PPM path")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    ResultRecord rec;
    try {
        if (*classify_cmd) {
            detail::fill_classification(rec, Parameter(a, b), q_max, false);
            out << rec.dump() << "\n";
        } else if (*uniformize_cmd) {
            detail::fill_classification(rec, Parameter(a, b), q_max, true);
            out << rec.dump() << "\n";
        } else if (*invert_cmd) {
            rec.xi_re = xi_re;
            rec.xi_im = xi_im;
            try {
                const Parameter p = invert_uniformization(Parameter(seed_a, seed_b), complex(xi_re, xi_im));
                detail::fill_classification(rec, p, 12, true);
            } catch (const ContinuationError& e) {
                rec.a = e.last_good().a;
                rec.b = e.last_good().b;
                throw;
            }
            out << rec.dump() << "\n";
        } else if (*ray_cmd) {
            std::vector<double> lambdas;
            for (int i = 0; i < steps; ++i) {
                lambdas.push_back(steps == 1 ? lambda_from
                                             : lambda_from + (lambda_to - lambda_from) * i / (steps - 1));
            }
            const auto ray = trace_internal_ray(Parameter(seed_a, seed_b), nu, lambdas);
            detail::write_to(out_path, out, [&](std::ostream& os) {
                os << "lambda,a,b\n";
                for (std::size_t i = 0; i < ray.size(); ++i) {
                    os << format_real(lambdas[i]) << "," << format_real(ray[i].a) << "," << format_real(ray[i].b)
                       << "\n";
                }
            });
        } else if (*super_cmd) {
            const auto sols = superattracting_parameters(q);
            json list = json::array();
            for (const auto& sol : sols) list.push_back(json{{"a", sol.a}, {"type_k", sol.type.k}});
            out << list.dump() << "\n";
        } else if (*dim_cmd) {
            const Parameter p(a, b);
            detail::fill_classification(rec, p, q_max, false);
            if (rec.status != "ok") throw Error(Status::not_in_tongue, "parameter is not in a tongue");
            BowenOptions bo;
            bo.q_max = q_max;
            const auto est = bowen_dimension(p, tol, bo);
            rec.t_lower = est.t_lower;
            rec.t_star = est.t_star;
            rec.t_upper = est.t_upper;
            if (est.rank_cap_reached) rec.status = "rank_cap_reached";
            out << rec.dump() << "\n";
        } else if (*field_cmd) {
            std::vector<Parameter> grid;
            for (int i = 0; i < n; ++i) {
                const double s = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
                grid.emplace_back(from_a + s * (to_a - from_a), from_b + s * (to_b - from_b));
            }
            const auto rows = dimension_field(Parameter(seed_a, seed_b), grid, tol, workers);
            detail::write_to(out_path, out, [&](std::ostream& os) { write_dimension_csv(os, rows); });
        } else if (*smooth_cmd) {
            const auto rep = smoothness_diagnostic(detail::read_dimension_csv(in_path));
            json fits = json::array();
            for (std::size_t i = 0; i < rep.degrees.size(); ++i) {
                fits.push_back(json{{"degree", rep.degrees[i]}, {"max_residual", rep.max_residuals[i]}});
            }
            out << json{{"pass", rep.pass},
                        {"samples", rep.samples},
                        {"median_width", rep.median_width},
                        {"threshold", rep.threshold},
                        {"fits", fits}}
                       .dump()
                << "\n";
        } else if (*scan_cmd) {
            const auto res = scan_tongues(scfg);
            render_ppm(res, out_path);
            long long nonzero = 0;
            for (auto c : res.codes) nonzero += c != 0;
            out << json{{"a_min", scfg.a_min},     {"a_max", scfg.a_max},   {"b_min", scfg.b_min},
                        {"b_max", scfg.b_max},     {"width", scfg.width},   {"height", scfg.height},
                        {"q_max", scfg.q_max},     {"nonzero", nonzero},    {"content_hash", res.content_hash},
                        {"out", out_path}}
                       .dump()
                << "\n";
        }
    } catch (const Error& e) {
        rec.status = to_string(e.status());
        out << rec.dump() << "\n";
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace dsm::cli
