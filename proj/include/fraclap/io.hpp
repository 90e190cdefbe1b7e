#pragma once

// Deterministic result serialization. CSV cells and JSON numbers are
// rendered with shortest-round-trip formatting independent of locale, so a
// fixed config and seed reproduce output files byte for byte. Timestamps
// and host details are confined to meta.json.

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclap/additive.hpp"
#include "fraclap/capacity.hpp"
#include "fraclap/classify.hpp"
#include "fraclap/common.hpp"
#include "fraclap/kernels.hpp"
#include "fraclap/sets.hpp"

namespace fraclap::io {

using json = nlohmann::json;

inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// JSON-safe number: infinities become sentinel strings (nlohmann would emit
// null, losing the sign).
inline json json_number(double v)
{
    if (std::isnan(v)) return json("nan");
    if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
    return json(v);
}

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : cols_(std::move(header))
    {
        for (std::size_t i = 0; i < cols_.size(); ++i) {
            if (i) out_ += ',';
            out_ += cols_[i];
        }
        out_ += '\n';
    }

    CsvWriter& cell(double v)
    {
        next();
        out_ += format_double(v);
        return *this;
    }
    CsvWriter& cell(std::uint64_t v)
    {
        next();
        out_ += std::to_string(v);
        return *this;
    }
    CsvWriter& cell(int v)
    {
        next();
        out_ += std::to_string(v);
        return *this;
    }
    CsvWriter& cell(const std::string& v)
    {
        next();
        out_ += v;
        return *this;
    }
    void end_row()
    {
        out_ += '\n';
        col_ = 0;
    }

    const std::string& str() const { return out_; }

  private:
    void next()
    {
        if (col_ > 0) out_ += ',';
        ++col_;
    }
    std::vector<std::string> cols_;
    std::string out_;
    std::size_t col_ = 0;
};

inline void write_text(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_text: cannot open " + path.string());
    f << content;
}

// ---------------------------------------------------------------------------
// JSON views of the toolkit records (stable key order: nlohmann::json keeps
// keys sorted alphabetically).

inline json to_json(const kernels::KernelSpec& spec)
{
    const char* kind = nullptr;
    switch (spec.kind) {
        case kernels::KernelKind::riesz: kind = "riesz"; break;
        case kernels::KernelKind::bessel: kind = "bessel"; break;
        case kernels::KernelKind::stable_resolvent: kind = "stable_resolvent"; break;
        case kernels::KernelKind::additive_resolvent: kind = "additive_resolvent"; break;
    }
    return json{{"kind", kind}, {"order", json_number(spec.order)}, {"dim", spec.dim}};
}

inline json to_json(const capacity::CapacityEstimate& est)
{
    json levels = json::array();
    for (const auto& l : est.levels)
        levels.push_back(json{{"level", l.level},
                              {"n_points", l.n_points},
                              {"min_energy", json_number(l.min_energy)},
                              {"kkt_residual", json_number(l.kkt_residual)},
                              {"converged", l.converged}});
    return json{{"kernel", to_json(est.kernel)},
                {"diagonal_rule", capacity::to_string(est.rule)},
                {"levels", levels},
                {"growth_slope", json_number(est.growth_slope)},
                {"growth_r2", json_number(est.growth_r2)},
                {"last_rel_change", json_number(est.last_rel_change)},
                {"verdict", capacity::to_string(est.verdict)},
                {"capacity_value", json_number(est.capacity_value)},
                {"thresholds",
                 json{{"zero_slope", est.thresholds.zero_slope},
                      {"zero_r2", est.thresholds.zero_r2},
                      {"stabilize_rel", est.thresholds.stabilize_rel}}},
                {"notes", est.notes}};
}

inline json to_json(const capacity::ConsistencyReport& rep)
{
    return json{{"bessel_side", to_json(rep.bessel_side)},
                {"riesz_side", to_json(rep.riesz_side)},
                {"outcome", capacity::to_string(rep.outcome)},
                {"toolkit_defect", rep.toolkit_defect}};
}

inline json to_json(const sets::DimensionEstimate& est)
{
    json counts = json::array();
    for (const auto& [delta, n] : est.counts) counts.push_back(json{{"delta", delta}, {"boxes", n}});
    return json{{"value", json_number(est.value)},
                {"r2", json_number(est.r2)},
                {"refused", est.refused},
                {"reason", est.reason},
                {"counts", counts}};
}

inline json to_json(const additive::HittingEstimate& est)
{
    json levels = json::array();
    for (const auto& l : est.levels)
        levels.push_back(json{{"eps", l.eps},
                              {"hits", l.hits},
                              {"trials", l.trials},
                              {"freq", json_number(l.freq)},
                              {"ci_lo", json_number(l.ci_lo)},
                              {"ci_hi", json_number(l.ci_hi)}});
    return json{{"levels", levels},
                {"kappa", json_number(est.kappa)},
                {"kappa_se", json_number(est.kappa_se)},
                {"kappa_tail", json_number(est.kappa_tail)},
                {"slope_contraction", json_number(est.slope_contraction)},
                {"kappa_levels", est.kappa_levels},
                {"limit_freq", json_number(est.limit_freq)},
                {"limit_se", json_number(est.limit_se)},
                {"limit_ci_excludes_zero", est.limit_ci_excludes_zero},
                {"zero_hit_bound", json_number(est.zero_hit_bound)},
                {"verdict", additive::to_string(est.verdict)},
                {"dt", json_number(est.dt)},
                {"n_steps", est.n_steps},
                {"notes", est.notes}};
}

inline json to_json(const classify::Verdict& v)
{
    json out{{"route", classify::to_string(v.route)},
             {"markov_unique", classify::to_string(v.markov_unique)},
             {"essentially_self_adjoint", classify::to_string(v.essentially_self_adjoint)},
             {"alpha", json_number(v.alpha)},
             {"dim", v.dim},
             {"set", v.set_description},
             {"notes", v.notes},
             {"esa_demoted", v.esa_demoted}};
    json evidence;
    if (v.mu_capacity) evidence["mu_capacity"] = to_json(*v.mu_capacity);
    if (v.esa_capacity) evidence["esa_capacity"] = to_json(*v.esa_capacity);
    if (v.dimension) evidence["dimension"] = to_json(*v.dimension);
    if (v.thresholds)
        evidence["thresholds"] = json{{"mu", json_number(v.thresholds->mu_threshold)},
                                      {"esa", json_number(v.thresholds->esa_threshold)},
                                      {"margin", json_number(v.margin)}};
    if (!v.mu_hitting.empty()) {
        json arr = json::array();
        for (const auto& h : v.mu_hitting) arr.push_back(to_json(h));
        evidence["mu_hitting"] = arr;
    }
    if (!v.esa_hitting.empty()) {
        json arr = json::array();
        for (const auto& h : v.esa_hitting) arr.push_back(to_json(h));
        evidence["esa_hitting"] = arr;
    }
    if (!v.start_points.empty()) {
        json arr = json::array();
        for (const auto& p : v.start_points) arr.push_back(p);
        evidence["start_points"] = arr;
    }
    out["evidence"] = evidence;
    return out;
}

inline json to_json(const classify::CrossCheckReport& rep)
{
    json verdicts = json::array();
    for (const auto& v : rep.verdicts) verdicts.push_back(to_json(v));
    return json{{"verdicts", verdicts},
                {"contradictions", rep.contradictions},
                {"falsification", rep.falsification},
                {"headline",
                 json{{"markov_unique", classify::to_string(rep.headline_mu)},
                      {"markov_unique_route", classify::to_string(rep.headline_mu_route)},
                      {"essentially_self_adjoint", classify::to_string(rep.headline_esa)},
                      {"essentially_self_adjoint_route", classify::to_string(rep.headline_esa_route)}}}};
}

// ---------------------------------------------------------------------------
// Experiment output directory: <outdir>/<name>/{config.echo, results.json,
// *.csv, meta.json}; meta.json is the only file carrying timestamps.

class ExperimentDir {
  public:
    ExperimentDir(std::filesystem::path outdir, const std::string& name) : dir_(std::move(outdir))
    {
        dir_ /= name;
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& path() const { return dir_; }

    void write_config_echo(const std::string& content) const { write_text(dir_ / "config.echo", content); }

    void write_results(const json& results) const { write_text(dir_ / "results.json", results.dump(2) + "\n"); }

    void write_csv(const std::string& filename, const CsvWriter& csv) const
    {
        write_text(dir_ / filename, csv.str());
    }

    void write_meta(const json& extra = json::object()) const
    {
        json meta = extra;
        meta["toolkit_version"] = version_string;
        const auto now = std::chrono::system_clock::now();
        meta["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
        write_text(dir_ / "meta.json", meta.dump(2) + "\n");
    }

  private:
    std::filesystem::path dir_;
};

} // namespace fraclap::io
