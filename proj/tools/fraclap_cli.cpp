// fraclap: classify Markov uniqueness and essential self-adjointness of
// fractional Laplacians on R^d minus a compact singular set, by capacity
// estimation, dimension thresholds, and Monte Carlo hitting probabilities.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fraclap/additive.hpp"
#include "fraclap/battery.hpp"
#include "fraclap/capacity.hpp"
#include "fraclap/classify.hpp"
#include "fraclap/io.hpp"
#include "fraclap/kernels.hpp"
#include "fraclap/levy.hpp"
#include "fraclap/parallel.hpp"
#include "fraclap/sets.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config_error = 2;
constexpr int exit_numeric_error = 3;
constexpr int exit_falsification = 4;

using namespace fraclap;

// ---------------------------------------------------------------------------
// Set specification strings:
//   point | empty | segment[:L] | sphere:R | cantor[:RHO,M] |
//   points:x,y;x,y;... | product:SPEC@d1|SPEC@d2
sets::CompactSet parse_set(const std::string& spec, int dim);

sets::CompactSet parse_set_atom(const std::string& spec, int dim)
{
    auto split_args = [](const std::string& s) {
        std::vector<double> out;
        std::size_t pos = 0;
        while (pos < s.size()) {
            std::size_t next = s.find(',', pos);
            if (next == std::string::npos) next = s.size();
            out.push_back(std::stod(s.substr(pos, next - pos)));
            pos = next + 1;
        }
        return out;
    };
    const std::size_t colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "point") return sets::CompactSet::origin(dim);
    if (head == "empty") return sets::CompactSet::empty(dim);
    if (head == "segment") {
        const double len = args.empty() ? 1.0 : std::stod(args);
        sets::Point a(dim, 0.0), b(dim, 0.0);
        b[0] = len;
        return sets::CompactSet::segment(a, b);
    }
    if (head == "sphere" || head == "circle") {
        const double r = args.empty() ? 1.0 : std::stod(args);
        return sets::CompactSet::sphere(sets::Point(dim, 0.0), r);
    }
    if (head == "cantor") {
        double rho = 1.0 / 3.0;
        int copies = 2;
        if (!args.empty()) {
            const auto v = split_args(args);
            if (!v.empty()) rho = v[0];
            if (v.size() > 1) copies = static_cast<int>(v[1]);
        }
        return sets::CompactSet::cantor_dust(dim, rho, copies);
    }
    if (head == "points") {
        std::vector<sets::Point> pts;
        std::size_t pos = 0;
        while (pos < args.size()) {
            std::size_t next = args.find(';', pos);
            if (next == std::string::npos) next = args.size();
            pts.push_back(split_args(args.substr(pos, next - pos)));
            pos = next + 1;
        }
        return sets::CompactSet::finite_points(pts, dim);
    }
    throw std::invalid_argument("unknown set spec '" + spec + "'");
}

sets::CompactSet parse_set(const std::string& spec, int dim)
{
    if (spec.rfind("product:", 0) == 0) {
        const std::string body = spec.substr(8);
        const std::size_t bar = body.find('|');
        if (bar == std::string::npos) throw std::invalid_argument("product spec needs 'A@d1|B@d2'");
        auto parse_factor = [](const std::string& part) {
            const std::size_t at = part.rfind('@');
            if (at == std::string::npos) throw std::invalid_argument("product factor needs '@dim'");
            const int d = std::stoi(part.substr(at + 1));
            return parse_set(part.substr(0, at), d);
        };
        auto left = parse_factor(body.substr(0, bar));
        auto right = parse_factor(body.substr(bar + 1));
        auto prod = sets::CompactSet::product(std::move(left), std::move(right));
        if (prod.dim() != dim)
            throw std::invalid_argument("product dimensions sum to " + std::to_string(prod.dim()) +
                                        ", expected " + std::to_string(dim));
        return prod;
    }
    return parse_set_atom(spec, dim);
}

std::vector<double> parse_point(const std::string& s, int dim)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(std::stod(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (static_cast<int>(out.size()) != dim)
        throw std::invalid_argument("point '" + s + "' has wrong dimension");
    return out;
}

struct GlobalArgs {
    std::uint64_t seed = 12345;
    unsigned threads = 0;
    std::string outdir = "out";
    std::string name;
};

io::ExperimentDir make_dir(const GlobalArgs& g, const std::string& default_name, CLI::App& app)
{
    io::ExperimentDir dir(g.outdir, g.name.empty() ? default_name : g.name);
    dir.write_config_echo(app.config_to_str(true, false));
    return dir;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"fraclap: capacity, dimension and hitting-probability classification "
                 "of singular sets for fractional Laplacians"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; command-line flags win");

    GlobalArgs g;
    app.add_option("--seed", g.seed, "master RNG seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker thread cap (0 = hardware)")->capture_default_str();
    app.add_option("--outdir", g.outdir, "output directory root")->capture_default_str();
    app.add_option("--name", g.name, "experiment name (defaults to the subcommand)");

    // ---- kernel ----
    auto* kernel_cmd = app.add_subcommand("kernel", "dump a radial kernel profile as CSV");
    std::string k_kind = "bessel";
    double k_order = 1.0, k_alpha = 1.0, k_rmin = 1e-6, k_rmax = 1.0;
    int k_dim = 1, k_points = 200;
    kernel_cmd->add_option("--kind", k_kind, "riesz|bessel|resolvent|additive-resolvent")->capture_default_str();
    kernel_cmd->add_option("--order", k_order, "riesz/bessel order")->capture_default_str();
    kernel_cmd->add_option("--alpha", k_alpha, "stability index for resolvent kernels")->capture_default_str();
    kernel_cmd->add_option("--dim", k_dim, "ambient dimension")->capture_default_str();
    kernel_cmd->add_option("--rmin", k_rmin)->capture_default_str();
    kernel_cmd->add_option("--rmax", k_rmax)->capture_default_str();
    kernel_cmd->add_option("--points", k_points, "grid size (log-spaced)")->capture_default_str();

    // ---- capacity ----
    auto* cap_cmd = app.add_subcommand("capacity", "capacity estimate of a set under a kernel");
    std::string c_set = "point", c_kernel = "bessel";
    double c_order = 1.0;
    int c_dim = 1;
    std::vector<int> c_levels{4, 5, 6, 7, 8, 9};
    double c_theta = 0.1, c_r2 = 0.9, c_stab = 0.02;
    cap_cmd->add_option("--set", c_set, "set spec")->capture_default_str();
    cap_cmd->add_option("--kernel", c_kernel, "riesz|bessel")->capture_default_str();
    cap_cmd->add_option("--order", c_order, "kernel order")->capture_default_str();
    cap_cmd->add_option("--dim", c_dim)->capture_default_str();
    cap_cmd->add_option("--levels", c_levels, "discretization levels")->delimiter(',')->capture_default_str();
    cap_cmd->add_option("--zero-slope", c_theta, "Zero verdict growth threshold")->capture_default_str();
    cap_cmd->add_option("--zero-r2", c_r2, "Zero verdict regression quality gate")->capture_default_str();
    cap_cmd->add_option("--stabilize-rel", c_stab, "Positive verdict stabilization threshold")
        ->capture_default_str();

    // ---- dimension ----
    auto* dim_cmd = app.add_subcommand("dimension", "box-counting dimension of a set");
    std::string d_set = "cantor";
    int d_dim = 1;
    std::vector<double> d_scales;
    int d_emit_level = -1;
    dim_cmd->add_option("--set", d_set)->capture_default_str();
    dim_cmd->add_option("--dim", d_dim)->capture_default_str();
    dim_cmd->add_option("--scales", d_scales, "box sizes (default 3^-2..3^-7)")->delimiter(',');
    dim_cmd->add_option("--emit-points", d_emit_level, "also write the level-N discretization as points.csv");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "sample paths/sheets; optional characteristic-function table");
    std::string s_process = "stable";
    double s_alpha = 2.0, s_T = 1.0, s_dt = 0.01;
    int s_dim = 1, s_paths = 1;
    std::vector<double> s_validate;
    std::size_t s_validate_samples = 1000000;
    sim_cmd->add_option("--process", s_process, "stable|additive|sheet")->capture_default_str();
    sim_cmd->add_option("--alpha", s_alpha)->capture_default_str();
    sim_cmd->add_option("--dim", s_dim)->capture_default_str();
    sim_cmd->add_option("--T", s_T, "horizon per axis")->capture_default_str();
    sim_cmd->add_option("--dt", s_dt)->capture_default_str();
    sim_cmd->add_option("--paths", s_paths, "number of paths/sheets")->capture_default_str();
    sim_cmd->add_option("--validate", s_validate, "xi values for the characteristic-function table")->delimiter(',');
    sim_cmd->add_option("--validate-samples", s_validate_samples)->capture_default_str();

    // ---- hit ----
    auto* hit_cmd = app.add_subcommand("hit", "epsilon-fattened hitting frequencies and polarity verdict");
    std::string h_process = "stable", h_set = "point", h_start;
    double h_alpha = 2.0, h_T = 1.0, h_refine = 1.0;
    int h_dim = 1;
    std::vector<double> h_eps{0.4, 0.2, 0.1, 0.05};
    std::size_t h_trials = 100000, h_max_trials = 0;
    double h_kappa_low = 0.15, h_kappa_high = 0.5, h_pmax = 1e-4;
    hit_cmd->add_option("--process", h_process, "stable|additive|sheet")->capture_default_str();
    hit_cmd->add_option("--set", h_set)->capture_default_str();
    hit_cmd->add_option("--alpha", h_alpha)->capture_default_str();
    hit_cmd->add_option("--dim", h_dim)->capture_default_str();
    hit_cmd->add_option("--start", h_start, "start point x (comma separated); default (1,0,..)");
    hit_cmd->add_option("--T", h_T, "horizon per axis")->capture_default_str();
    hit_cmd->add_option("--eps", h_eps, "epsilon levels, decreasing")->delimiter(',')->capture_default_str();
    hit_cmd->add_option("--trials", h_trials)->capture_default_str();
    hit_cmd->add_option("--max-trials", h_max_trials, "auto-scaling cap (0 = off)")->capture_default_str();
    hit_cmd->add_option("--refine", h_refine, "step refinement factor")->capture_default_str();
    bool h_per_level = false;
    hit_cmd->add_flag("--per-level", h_per_level,
                      "couple the grid step to each epsilon level independently (bias-free exponents)");
    hit_cmd->add_option("--kappa-low", h_kappa_low)->capture_default_str();
    hit_cmd->add_option("--kappa-high", h_kappa_high)->capture_default_str();
    hit_cmd->add_option("--pmax", h_pmax)->capture_default_str();

    // ---- classify / crosscheck ----
    auto add_classify_flags = [&](CLI::App* cmd, std::string& set, double& alpha, int& dim,
                                  std::vector<int>& levels, double& margin, std::vector<double>& eps,
                                  std::size_t& trials, std::vector<std::string>& routes) {
        cmd->add_option("--set", set)->capture_default_str();
        cmd->add_option("--alpha", alpha)->capture_default_str();
        cmd->add_option("--dim", dim)->capture_default_str();
        cmd->add_option("--levels", levels, "capacity discretization levels")->delimiter(',')->capture_default_str();
        cmd->add_option("--margin", margin, "geometric dimension margin")->capture_default_str();
        cmd->add_option("--eps", eps, "hitting epsilon levels")->delimiter(',')->capture_default_str();
        cmd->add_option("--trials", trials, "hitting trials")->capture_default_str();
        cmd->add_option("--routes", routes, "routes to run: analytic,geometric,probabilistic")
            ->delimiter(',')
            ->capture_default_str();
    };
    auto* cls_cmd = app.add_subcommand("classify", "MU/ESA verdicts by all applicable routes");
    std::string cl_set = "point";
    std::vector<std::string> cl_routes{"analytic", "geometric", "probabilistic"};
    double cl_alpha = 2.0, cl_margin = 0.05;
    int cl_dim = 3;
    std::vector<int> cl_levels{4, 5, 6, 7, 8, 9};
    std::vector<double> cl_eps{0.4, 0.2, 0.1, 0.05};
    std::size_t cl_trials = 20000;
    add_classify_flags(cls_cmd, cl_set, cl_alpha, cl_dim, cl_levels, cl_margin, cl_eps, cl_trials, cl_routes);

    auto* cc_cmd = app.add_subcommand("crosscheck", "run all routes and flag contradictions (exit 4)");
    std::string cc_set = "point";
    std::vector<std::string> cc_routes{"analytic", "geometric", "probabilistic"};
    double cc_alpha = 2.0, cc_margin = 0.05;
    int cc_dim = 3;
    std::vector<int> cc_levels{4, 5, 6, 7, 8, 9};
    std::vector<double> cc_eps{0.4, 0.2, 0.1, 0.05};
    std::size_t cc_trials = 20000;
    add_classify_flags(cc_cmd, cc_set, cc_alpha, cc_dim, cc_levels, cc_margin, cc_eps, cc_trials, cc_routes);

    // ---- battery ----
    auto* bat_cmd = app.add_subcommand("battery", "run the acceptance battery");

    // global flags may appear after the subcommand
    for (auto* sc : app.get_subcommands([](const CLI::App*) { return true; })) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config_error;
    }

    if (g.threads > 0) set_max_threads(g.threads);

    try {
        if (*kernel_cmd) {
            auto dir = make_dir(g, "kernel", app);
            kernels::KernelSpec spec = [&] {
                if (k_kind == "riesz") return kernels::KernelSpec::riesz(k_order, k_dim);
                if (k_kind == "bessel") return kernels::KernelSpec::bessel(k_order, k_dim);
                if (k_kind == "resolvent") return kernels::KernelSpec::stable_resolvent(k_alpha, k_dim);
                if (k_kind == "additive-resolvent")
                    return kernels::KernelSpec::additive_resolvent(k_alpha, k_dim);
                throw std::invalid_argument("unknown kernel kind '" + k_kind + "'");
            }();
            const kernels::RadialKernel kernel(spec);
            io::CsvWriter csv({"r", "value"});
            for (int i = 0; i < k_points; ++i) {
                const double r =
                    k_rmin * std::pow(k_rmax / k_rmin, static_cast<double>(i) / std::max(1, k_points - 1));
                csv.cell(r).cell(kernel(r));
                csv.end_row();
            }
            dir.write_csv("profile.csv", csv);
            dir.write_results(io::json{{"kernel", io::to_json(spec)},
                                       {"rmin", io::json_number(k_rmin)},
                                       {"rmax", io::json_number(k_rmax)},
                                       {"points", k_points}});
            dir.write_meta();
            std::printf("kernel profile written to %s\n", dir.path().string().c_str());
            return exit_ok;
        }

        if (*cap_cmd) {
            auto dir = make_dir(g, "capacity", app);
            const auto set = parse_set(c_set, c_dim);
            kernels::KernelSpec spec = (c_kernel == "riesz") ? kernels::KernelSpec::riesz(c_order, c_dim)
                                                             : kernels::KernelSpec::bessel(c_order, c_dim);
            capacity::CapacityOptions opts;
            opts.thresholds.zero_slope = c_theta;
            opts.thresholds.zero_r2 = c_r2;
            opts.thresholds.stabilize_rel = c_stab;
            const auto est = capacity::capacity_estimate(set, spec, c_levels, opts);
            io::CsvWriter csv({"n", "min_energy", "slope_so_far"});
            std::vector<double> xs, ys;
            for (const auto& l : est.levels) {
                xs.push_back(std::log(static_cast<double>(std::max<std::size_t>(l.n_points, 1))));
                ys.push_back(l.min_energy);
                double slope = 0.0;
                if (xs.size() >= 2 && xs.back() != xs.front())
                    slope = stats::least_squares(xs, ys).slope;
                csv.cell(static_cast<std::uint64_t>(l.n_points)).cell(l.min_energy).cell(slope);
                csv.end_row();
            }
            dir.write_csv("levels.csv", csv);
            dir.write_results(io::to_json(est));
            dir.write_meta();
            std::printf("capacity verdict: %s\n", capacity::to_string(est.verdict));
            return exit_ok;
        }

        if (*dim_cmd) {
            auto dir = make_dir(g, "dimension", app);
            const auto set = parse_set(d_set, d_dim);
            std::vector<double> scales = d_scales;
            if (scales.empty())
                for (int k = 2; k <= 7; ++k) scales.push_back(std::pow(3.0, -k));
            const auto est = sets::box_dimension(set, scales);
            io::CsvWriter csv({"delta", "boxes"});
            for (const auto& [delta, n] : est.counts) {
                csv.cell(delta).cell(static_cast<std::uint64_t>(n));
                csv.end_row();
            }
            dir.write_csv("counts.csv", csv);
            if (d_emit_level >= 0) {
                const auto net = set.discretize(d_emit_level);
                io::CsvWriter pts([&] {
                    std::vector<std::string> cols;
                    for (int c = 0; c < d_dim; ++c) cols.push_back("x" + std::to_string(c + 1));
                    return cols;
                }());
                for (std::size_t i = 0; i < net.size(); ++i) {
                    for (int c = 0; c < d_dim; ++c) pts.cell(net.point(i)[c]);
                    pts.end_row();
                }
                dir.write_csv("points.csv", pts);
            }
            dir.write_results(io::to_json(est));
            dir.write_meta();
            std::printf("box dimension = %.6f (r2 %.4f)\n", est.value, est.r2);
            return exit_ok;
        }

        if (*sim_cmd) {
            auto dir = make_dir(g, "simulate", app);
            io::json results;
            if (!s_validate.empty()) {
                const auto rows =
                    levy::char_function_table(s_alpha, s_dim, 1.0, s_validate, s_validate_samples, g.seed);
                io::json arr = io::json::array();
                for (const auto& row : rows)
                    arr.push_back(io::json{{"xi", row.xi},
                                           {"target", io::json_number(row.target)},
                                           {"empirical_re", io::json_number(row.empirical_re)},
                                           {"empirical_im", io::json_number(row.empirical_im)},
                                           {"std_error", io::json_number(row.std_error)}});
                results["char_function"] = arr;
            }
            if (s_process == "stable") {
                io::CsvWriter csv([&] {
                    std::vector<std::string> cols{"path", "t"};
                    for (int c = 0; c < s_dim; ++c) cols.push_back("x" + std::to_string(c + 1));
                    return cols;
                }());
                for (int p = 0; p < s_paths; ++p) {
                    rng::Stream rng(g.seed, static_cast<std::uint64_t>(p));
                    levy::PathConfig cfg;
                    cfg.alpha = s_alpha;
                    cfg.dim = s_dim;
                    cfg.horizon = s_T;
                    cfg.dt = s_dt;
                    const auto path = levy::simulate_path(cfg, rng);
                    const std::size_t n = path.size() / static_cast<std::size_t>(s_dim);
                    for (std::size_t i = 0; i < n; ++i) {
                        csv.cell(p).cell(static_cast<double>(i) * s_dt);
                        for (int c = 0; c < s_dim; ++c) csv.cell(path[i * s_dim + c]);
                        csv.end_row();
                    }
                }
                dir.write_csv("paths.csv", csv);
            } else if (s_process == "additive") {
                io::CsvWriter csv([&] {
                    std::vector<std::string> cols{"sheet", "t1", "t2"};
                    for (int c = 0; c < s_dim; ++c) cols.push_back("x" + std::to_string(c + 1));
                    return cols;
                }());
                for (int p = 0; p < s_paths; ++p) {
                    rng::Stream rng(g.seed, static_cast<std::uint64_t>(p));
                    const auto sheet = additive::simulate_additive(s_alpha, s_dim, s_T, s_dt, rng);
                    std::vector<double> v(s_dim);
                    const std::size_t n = sheet.axis_size();
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j) {
                            sheet.value(i, j, v.data());
                            csv.cell(p).cell(static_cast<double>(i) * s_dt).cell(static_cast<double>(j) * s_dt);
                            for (int c = 0; c < s_dim; ++c) csv.cell(v[c]);
                            csv.end_row();
                        }
                }
                dir.write_csv("sheets.csv", csv);
            } else if (s_process == "sheet") {
                const std::size_t n = static_cast<std::size_t>(std::llround(s_T / s_dt));
                std::vector<double> axis(n);
                for (std::size_t i = 0; i < n; ++i) axis[i] = static_cast<double>(i + 1) * s_dt;
                io::CsvWriter csv([&] {
                    std::vector<std::string> cols{"sheet", "t1", "t2"};
                    for (int c = 0; c < s_dim; ++c) cols.push_back("x" + std::to_string(c + 1));
                    return cols;
                }());
                for (int p = 0; p < s_paths; ++p) {
                    rng::Stream rng(g.seed, static_cast<std::uint64_t>(p));
                    const auto field = levy::brownian_sheet(axis, axis, s_dim, rng);
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j) {
                            csv.cell(p).cell(axis[i]).cell(axis[j]);
                            for (int c = 0; c < s_dim; ++c) csv.cell(field[(i * n + j) * s_dim + c]);
                            csv.end_row();
                        }
                }
                dir.write_csv("sheets.csv", csv);
            } else {
                throw std::invalid_argument("unknown process '" + s_process + "'");
            }
            dir.write_results(results.is_null() ? io::json::object() : results);
            dir.write_meta();
            std::printf("simulation written to %s\n", dir.path().string().c_str());
            return exit_ok;
        }

        if (*hit_cmd) {
            auto dir = make_dir(g, "hit", app);
            const auto set = parse_set(h_set, h_dim);
            additive::HittingConfig cfg;
            cfg.kind = (h_process == "stable")     ? additive::ProcessKind::one_param_stable
                       : (h_process == "additive") ? additive::ProcessKind::additive_stable
                       : (h_process == "sheet")    ? additive::ProcessKind::brownian_sheet
                                                   : throw std::invalid_argument("unknown process");
            cfg.alpha = h_alpha;
            cfg.dim = h_dim;
            cfg.start = h_start.empty() ? [&] {
                std::vector<double> x(h_dim, 0.0);
                x[0] = 1.0;
                return x;
            }()
                                        : parse_point(h_start, h_dim);
            cfg.horizon = h_T;
            cfg.eps_levels = h_eps;
            cfg.trials = h_trials;
            cfg.max_trials = h_max_trials;
            cfg.step_refinement = h_refine;
            cfg.thresholds.kappa_low = h_kappa_low;
            cfg.thresholds.kappa_high = h_kappa_high;
            cfg.thresholds.p_max = h_pmax;
            const auto est = h_per_level ? additive::hitting_estimate_per_level(cfg, set, g.seed)
                                         : additive::hitting_estimate(cfg, set, g.seed);
            io::CsvWriter csv({"eps", "hits", "trials", "lo", "hi"});
            for (const auto& l : est.levels) {
                csv.cell(l.eps).cell(l.hits).cell(l.trials).cell(l.ci_lo).cell(l.ci_hi);
                csv.end_row();
            }
            dir.write_csv("frequencies.csv", csv);
            dir.write_results(io::to_json(est));
            dir.write_meta();
            std::printf("polarity verdict: %s (kappa %.4g)\n", additive::to_string(est.verdict), est.kappa);
            return exit_ok;
        }

        if (*cls_cmd || *cc_cmd) {
            const bool crosschecking = static_cast<bool>(*cc_cmd);
            const std::string set_spec = crosschecking ? cc_set : cl_set;
            const double alpha = crosschecking ? cc_alpha : cl_alpha;
            const int dim = crosschecking ? cc_dim : cl_dim;
            const auto levels = crosschecking ? cc_levels : cl_levels;
            const double margin = crosschecking ? cc_margin : cl_margin;
            const auto eps = crosschecking ? cc_eps : cl_eps;
            const std::size_t trials = crosschecking ? cc_trials : cl_trials;
            const std::vector<std::string> routes = crosschecking ? cc_routes : cl_routes;

            auto dir = make_dir(g, crosschecking ? "crosscheck" : "classify", app);
            const auto set = parse_set(set_spec, dim);
            classify::CrossCheckOptions opts;
            opts.analytic.levels = levels;
            opts.geometric.margin = margin;
            opts.probabilistic.eps_levels = eps;
            opts.probabilistic.trials = trials;
            opts.probabilistic.seed = g.seed;
            opts.run_probabilistic = false;
            for (const auto& r : routes) opts.run_probabilistic = opts.run_probabilistic || r == "probabilistic";
            const auto rep = classify::cross_check(set, alpha, dim, opts);
            io::json out = io::to_json(rep);
            out["parameters"] = io::json{{"alpha", alpha}, {"dim", dim}, {"set", set_spec}};
            out["toolkit_version"] = version_string;
            out["seed"] = g.seed;
            dir.write_results(out);
            dir.write_meta();
            std::printf("headline: MU=%s ESA=%s%s\n", classify::to_string(rep.headline_mu),
                        classify::to_string(rep.headline_esa),
                        rep.falsification ? "  [FALSIFICATION EVENT]" : "");
            for (const auto& c : rep.contradictions) std::printf("contradiction: %s\n", c.c_str());
            if (crosschecking && rep.falsification) return exit_falsification;
            return exit_ok;
        }

        if (*bat_cmd) {
            auto dir = make_dir(g, "battery", app);
            battery::BatteryContext ctx;
            ctx.seed = g.seed;
            ctx.scratch_dir = dir.path() / "scratch";
            bool all_pass = true;
            io::json arr = io::json::array();
            const auto results = battery::run_battery(ctx, [&](const battery::CriterionResult& r) {
                std::printf("[%s] %d. %s: %s [%.1fs]\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                            r.detail.c_str(), r.seconds);
                std::fflush(stdout);
            });
            for (const auto& r : results) {
                all_pass = all_pass && r.pass;
                arr.push_back(io::json{{"id", r.id},
                                       {"name", r.name},
                                       {"pass", r.pass},
                                       {"detail", r.detail},
                                       {"seconds", io::json_number(r.seconds)}});
            }
            dir.write_results(io::json{{"criteria", arr}, {"all_pass", all_pass}});
            dir.write_meta();
            return all_pass ? exit_ok : 1;
        }
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numeric evaluation error: %s\n", e.what());
        return exit_numeric_error;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config_error;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_numeric_error;
    }
    return exit_ok;
}
