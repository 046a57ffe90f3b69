#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slopewatch/slopewatch.hpp"

namespace fs = std::filesystem;
using namespace slopewatch;

namespace {

enum Exit { ok = 0, validation = 2, no_candidate = 3, io = 4 };

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoError: return io;
        case ErrorCode::NoCandidateQualifies: return no_candidate;
        default: return validation;
    }
}

void add_pipeline_flags(CLI::App& cmd, PipelineConfig& c, std::string& detrend) {
    cmd.add_option("--window_length", c.window_length, "samples per window")->capture_default_str();
    cmd.add_option("--step", c.step, "window step")->capture_default_str();
    cmd.add_option("--detrend", detrend, "none | mean_only | linear")
        ->check(CLI::IsMember({"none", "mean_only", "linear"}))
        ->capture_default_str();
    cmd.add_option("--smooth_candidates", c.smooth_candidates, "3-point median before candidate search")
        ->capture_default_str();
    cmd.add_option("--k_min", c.k_min)->capture_default_str();
    cmd.add_option("--k_max", c.k_max)->capture_default_str();
    cmd.add_option("--inter_cluster_threshold", c.inter_cluster_threshold)->capture_default_str();
    cmd.add_option("--pca_var_target", c.pca_var_target)->capture_default_str();
    cmd.add_option("--t_R_level", c.t_R_level)->capture_default_str();
    cmd.add_option("--t_I_level", c.t_I_level)->capture_default_str();
    cmd.add_option("--persistence", c.persistence)->capture_default_str();
    cmd.add_option("--seed", c.seed)->capture_default_str();
}

std::vector<EmitFormat> formats_from(const std::vector<std::string>& names) {
    std::vector<EmitFormat> out;
    for (const auto& n : names) out.push_back(*parse_emit_format(n));
    return out;
}

void emit_all(const AnalysisReport& r, const std::vector<EmitFormat>& formats, const fs::path& out) {
    for (auto f : formats)
        for (const auto& p : emit(r, f, out)) std::cout << "wrote " << p.string() << "\n";
}

void summarize(const AnalysisReport& r) {
    std::cout << "series " << r.n_series << ", windows " << r.window_count << ", candidates";
    for (const auto& c : r.candidates) std::cout << ' ' << c.window.index;
    std::cout << "\n";
    if (r.baseline)
        std::cout << "w_t0 " << r.baseline->window.index << " (" << r.baseline->window.start << " : "
                  << r.baseline->window.end << "), k " << r.baseline->k << ", inter-cluster "
                  << 100.0 * r.baseline->inter_cluster_fraction << "%\n";
    auto warn = [](const char* name, const std::optional<WindowRef>& w) {
        std::cout << name << ' ' << (w ? std::to_string(w->index) + " (" + w->start + " : " + w->end + ")" : "none")
                  << "\n";
    };
    warn("t_R", r.warnings.t_R);
    warn("t_I", r.warnings.t_I);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral regime-change and slope-failure risk monitoring for displacement time series"};
    app.require_subcommand(1);

    std::string input;
    auto* validate = app.add_subcommand("validate", "check a displacement CSV against the schema");
    validate->add_option("input", input, "CSV file")->required();

    PipelineConfig config;
    std::string detrend = "linear";
    std::string out_dir = "slopewatch_out";
    std::vector<std::string> formats{"json", "csv_tables", "svg_plots"};
    auto format_check = CLI::IsMember({"json", "csv_tables", "svg_plots"});

    auto* analyze = app.add_subcommand("analyze", "run both phases and write the report");
    analyze->add_option("input", input, "CSV file")->required();
    analyze->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
    analyze->add_option("--format", formats, "json, csv_tables, svg_plots")->check(format_check)->capture_default_str();
    add_pipeline_flags(*analyze, config, detrend);

    synth::SynthConfig sc;
    std::optional<std::size_t> change_window;
    std::string noise = "white";
    std::string synth_out;
    std::string start_date = sc.start_date.iso();
    auto* gen = app.add_subcommand("synth", "write a synthetic dataset as CSV");
    gen->add_option("-o,--out", synth_out, "CSV file to write")->required();
    gen->add_option("--seed", sc.seed)->capture_default_str();
    gen->add_option("--n_locations", sc.n_locations)->capture_default_str();
    gen->add_option("--pixels_per_location", sc.pixels_per_location)->capture_default_str();
    gen->add_option("--count", sc.count)->capture_default_str();
    gen->add_option("--interval_days", sc.interval_days)->capture_default_str();
    gen->add_option("--start_date", start_date)->capture_default_str();
    gen->add_option("--noise_model", noise)->check(CLI::IsMember({"white", "ar1"}))->capture_default_str();
    gen->add_option("--phi", sc.phi)->capture_default_str();
    gen->add_option("--noise_sd", sc.noise_sd)->capture_default_str();
    gen->add_option("--common_sd", sc.common_sd)->capture_default_str();
    gen->add_option("--location_effect_spread", sc.location_effect_spread)->capture_default_str();
    gen->add_option("--change_window", change_window, "1-based window where the change starts");
    gen->add_option("--reference_window_length", sc.reference_window_length)->capture_default_str();
    gen->add_option("--trend_slope", sc.post_change.trend_slope)->capture_default_str();
    gen->add_option("--variance_ramp", sc.post_change.variance_ramp)->capture_default_str();
    gen->add_option("--spectral_shift", sc.post_change.spectral_shift);
    gen->add_option("--spectral_amplitude", sc.post_change.spectral_amplitude)->capture_default_str();
    bool benchmark = false;
    gen->add_flag("--benchmark", benchmark, "start from the regime-change benchmark settings");

    std::string report_path;
    auto* report = app.add_subcommand("report", "re-emit tables and plots from a JSON report");
    report->add_option("report", report_path, "report.json")->required();
    report->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
    report->add_option("--format", formats, "json, csv_tables, svg_plots")->check(format_check)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : validation;
    }

    try {
        if (*validate) {
            const auto data = ingest_csv(fs::path(input));
            std::map<std::string, std::size_t> per_location;
            for (const auto& s : data) ++per_location[s.location_id];
            std::cout << "ok: " << data.size() << " series in " << per_location.size() << " locations\n";
            for (const auto& s : data)
                if (per_location.count(s.location_id)) {
                    std::cout << "  " << s.location_id << ": " << per_location[s.location_id] << " pixels, "
                              << s.grid.count << " samples from " << s.grid.start.iso() << " every "
                              << s.grid.interval_days << " days\n";
                    per_location.erase(s.location_id);
                }
            return ok;
        }
        if (*analyze) {
            config.detrend = parse_detrend(detrend);
            const auto data = ingest_csv(fs::path(input));
            const auto r = run(data, config);
            emit_all(r, formats_from(formats), out_dir);
            summarize(r);
            if (!r.ok()) {
                std::cerr << "no candidate qualifies: " << r.message << "\n";
                return no_candidate;
            }
            return ok;
        }
        if (*gen) {
            if (benchmark) {
                const auto base = synth::regime_change_benchmark(sc.seed, change_window.value_or(16));
                sc.common_sd = base.common_sd;
                sc.location_effect_spread = base.location_effect_spread;
                sc.post_change.variance_ramp = base.post_change.variance_ramp;
                sc.post_change.trend_slope = base.post_change.trend_slope;
                change_window = base.change_window;
            }
            const auto date = Date::parse(start_date);
            if (!date) throw Error(ErrorCode::InvalidConfig, "bad --start_date '" + start_date + "'");
            sc.start_date = *date;
            sc.noise_model = noise == "ar1" ? synth::NoiseModel::ar1 : synth::NoiseModel::white;
            sc.change_window = change_window;
            write_csv(fs::path(synth_out), synth::generate(sc));
            std::cout << "wrote " << synth_out << "\n";
            return ok;
        }
        if (*report) {
            const auto r = read_report(report_path);
            emit_all(r, formats_from(formats), out_dir);
            summarize(r);
            return ok;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return io;
    }
    return ok;
}
