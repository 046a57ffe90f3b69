#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "slopewatch/date.hpp"
#include "slopewatch/errors.hpp"
#include "slopewatch/pipeline.hpp"
#include "slopewatch/series.hpp"

namespace slopewatch {

// ---------------------------------------------------------------------------
// CSV: location_id,pixel_id,date,displacement_mm

inline constexpr std::string_view csv_header = "location_id,pixel_id,date,displacement_mm";

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t from = 0;
    for (;;) {
        const auto at = line.find(',', from);
        out.push_back(trim(line.substr(from, at == std::string_view::npos ? std::string_view::npos : at - from)));
        if (at == std::string_view::npos) return out;
        from = at + 1;
    }
}

inline std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

[[noreturn]] inline void fail_at(ErrorCode code, const std::string& source, std::size_t line, const std::string& what) {
    throw Error(code, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

/// Parses a displacement CSV. Pixels keep their first-appearance order; rows of a pixel
/// may come in any date order.
inline Dataset ingest_csv(std::istream& in, const std::string& source = "<input>") {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::string_view head = detail::trim(line);
        if (head.size() >= 3 && head.substr(0, 3) == "\xEF\xBB\xBF") head.remove_prefix(3);
        auto fields = detail::split_commas(head);
        const bool ok = fields.size() == 4 && fields[0] == "location_id" && fields[1] == "pixel_id" &&
                        fields[2] == "date" && fields[3] == "displacement_mm";
        if (!ok)
            detail::fail_at(ErrorCode::SchemaError, source, line_no,
                            "expected header '" + std::string(csv_header) + "'");
        have_header = true;
        break;
    }
    if (!have_header) throw Error(ErrorCode::SchemaError, source + ": missing header");

    struct Rows {
        std::string location;
        std::string pixel;
        std::vector<std::pair<Date, double>> samples;
        std::map<Date, std::size_t> seen;
    };
    std::vector<Rows> pixels;
    std::map<std::pair<std::string, std::string>, std::size_t> index;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_commas(line);
        if (fields.size() != 4)
            detail::fail_at(ErrorCode::SchemaError, source, line_no,
                            "expected 4 fields, found " + std::to_string(fields.size()));
        if (fields[0].empty() || fields[1].empty())
            detail::fail_at(ErrorCode::SchemaError, source, line_no, "empty location_id or pixel_id");
        const auto date = Date::parse(fields[2]);
        if (!date) detail::fail_at(ErrorCode::SchemaError, source, line_no, "bad date '" + std::string(fields[2]) + "'");
        const auto value = detail::parse_double(fields[3]);
        if (!value)
            detail::fail_at(ErrorCode::SchemaError, source, line_no,
                            "bad displacement '" + std::string(fields[3]) + "'");
        if (!std::isfinite(*value)) detail::fail_at(ErrorCode::NonFinite, source, line_no, "non-finite displacement");

        const std::pair key{std::string(fields[0]), std::string(fields[1])};
        auto [it, fresh] = index.try_emplace(key, pixels.size());
        if (fresh) pixels.push_back(Rows{key.first, key.second, {}, {}});
        auto& rows = pixels[it->second];
        const auto [dup, inserted] = rows.seen.try_emplace(*date, line_no);
        if (!inserted)
            detail::fail_at(ErrorCode::SchemaError, source, line_no,
                            "duplicate sample for " + key.first + "/" + key.second + " on " + date->iso() +
                                " (first at line " + std::to_string(dup->second) + ")");
        rows.samples.emplace_back(*date, *value);
    }
    if (pixels.empty()) throw Error(ErrorCode::SchemaError, source + ": no data rows");

    Dataset out;
    out.reserve(pixels.size());
    std::map<std::string, std::size_t> first_of_location;
    for (auto& rows : pixels) {
        std::sort(rows.samples.begin(), rows.samples.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        DisplacementSeries s;
        try {
            s = validate_series(rows.samples, rows.location, rows.pixel);
        } catch (const Error& e) {
            throw Error(e.code(), source + ": " + rows.location + "/" + rows.pixel + ": " + e.what());
        }
        const auto [first, fresh] = first_of_location.try_emplace(rows.location, out.size());
        if (!fresh) {
            const auto& g = out[first->second].grid;
            if (!(g.start == s.grid.start && g.interval_days == s.grid.interval_days && g.count == s.grid.count))
                throw Error(ErrorCode::MixedGrids,
                            source + ": location " + rows.location + ": pixel " + rows.pixel +
                                " is not sampled on the same dates as pixel " + out[first->second].pixel_id);
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline Dataset ingest_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return ingest_csv(in, path.string());
}

inline void write_csv(std::ostream& out, const Dataset& dataset) {
    out << csv_header << '\n';
    char buf[40];
    for (const auto& s : dataset)
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            std::snprintf(buf, sizeof buf, "%.17g", s.values[t]);
            out << s.location_id << ',' << s.pixel_id << ',' << s.grid.date_at(t).iso() << ',' << buf << '\n';
        }
}

inline void write_csv(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_csv(out, dataset);
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
    j = {{"window_length", c.window_length},
         {"step", c.step},
         {"detrend", to_string(c.detrend)},
         {"smooth_candidates", c.smooth_candidates},
         {"k_min", c.k_min},
         {"k_max", c.k_max},
         {"inter_cluster_threshold", c.inter_cluster_threshold},
         {"pca_var_target", c.pca_var_target},
         {"t_R_level", c.t_R_level},
         {"t_I_level", c.t_I_level},
         {"persistence", c.persistence},
         {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
    j.at("window_length").get_to(c.window_length);
    j.at("step").get_to(c.step);
    c.detrend = parse_detrend(j.at("detrend").get<std::string>());
    j.at("smooth_candidates").get_to(c.smooth_candidates);
    j.at("k_min").get_to(c.k_min);
    j.at("k_max").get_to(c.k_max);
    j.at("inter_cluster_threshold").get_to(c.inter_cluster_threshold);
    j.at("pca_var_target").get_to(c.pca_var_target);
    j.at("t_R_level").get_to(c.t_R_level);
    j.at("t_I_level").get_to(c.t_I_level);
    j.at("persistence").get_to(c.persistence);
    j.at("seed").get_to(c.seed);
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(WindowRef, index, start, end)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LocationSummary, location_id, n_pixels, start_date, interval_days, sample_count,
                                   mean_displacement, moving_window_variance, detrended_moving_window_variance,
                                   mean_local_periodograms, median_local_variance, window_dates)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CandidateRecord, window, trigger, trajectory_value)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ClusterRow, k, within_fractions, inter_cluster_fraction, qualifies)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CandidateDiagnosticsRecord, window, pca_components, failure, rows)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MedoidRecord, location_id, pixel_id, cluster_size)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BaselineRecord, window, k, inter_cluster_fraction, within_fractions, pca_components,
                                   pca_explained, eigenvalues, dispersion_scale, medoids)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RiskRecord, window, median_pq, iqr_pq, n_pixels)

namespace detail {

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const WarningRecord& w) {
    j = {{"t_R", detail::optional_json(w.t_R)},
         {"t_I", detail::optional_json(w.t_I)},
         {"t_R_level", w.t_R_level},
         {"t_I_level", w.t_I_level},
         {"persistence", w.persistence}};
}

inline void from_json(const nlohmann::json& j, WarningRecord& w) {
    w.t_R = detail::optional_from<WindowRef>(j, "t_R");
    w.t_I = detail::optional_from<WindowRef>(j, "t_I");
    j.at("t_R_level").get_to(w.t_R_level);
    j.at("t_I_level").get_to(w.t_I_level);
    j.at("persistence").get_to(w.persistence);
}

inline void to_json(nlohmann::json& j, const AnalysisReport& r) {
    j = nlohmann::json::object();
    j["schema_version"] = r.schema_version;
    j["status"] = r.status;
    j["message"] = r.message;
    j["config"] = r.config;
    j["input_digest"] = r.input_digest;
    j["n_series"] = r.n_series;
    j["window_count"] = r.window_count;
    j["windows"] = r.windows;
    j["locations"] = r.locations;
    j["median_local_variance"] = r.median_local_variance;
    j["candidates"] = r.candidates;
    j["cluster_diagnostics"] = r.cluster_diagnostics;
    j["baseline"] = detail::optional_json(r.baseline);
    j["risk"] = r.risk;
    j["warnings"] = r.warnings;
}

inline void from_json(const nlohmann::json& j, AnalysisReport& r) {
    j.at("schema_version").get_to(r.schema_version);
    j.at("status").get_to(r.status);
    j.at("message").get_to(r.message);
    j.at("config").get_to(r.config);
    j.at("input_digest").get_to(r.input_digest);
    j.at("n_series").get_to(r.n_series);
    j.at("window_count").get_to(r.window_count);
    j.at("windows").get_to(r.windows);
    j.at("locations").get_to(r.locations);
    j.at("median_local_variance").get_to(r.median_local_variance);
    j.at("candidates").get_to(r.candidates);
    j.at("cluster_diagnostics").get_to(r.cluster_diagnostics);
    r.baseline = detail::optional_from<BaselineRecord>(j, "baseline");
    j.at("risk").get_to(r.risk);
    j.at("warnings").get_to(r.warnings);
}

inline constexpr int report_schema_version = 1;

inline std::string to_json_text(const AnalysisReport& r) { return nlohmann::json(r).dump(2) + "\n"; }

inline AnalysisReport report_from_json_text(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        const int version = j.at("schema_version").get<int>();
        if (version != report_schema_version)
            throw Error(ErrorCode::SchemaError, "unsupported report schema_version " + std::to_string(version));
        return j.get<AnalysisReport>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed report: ") + e.what());
    }
}

inline AnalysisReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return report_from_json_text(buf.str());
}

// ---------------------------------------------------------------------------
// SVG line plots

namespace svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string colour = "#1f77b4";
    bool dashed = false;
};

struct Marker {
    double x = 0.0;
    std::string label;
    std::string colour;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<Marker> markers;  // vertical lines
};

inline const char* palette(std::size_t i) {
    static constexpr const char* colours[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};
    return colours[i % 8];
}

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string render(const Plot& plot) {
    constexpr double W = 720, H = 420, left = 70, right = 170, top = 40, bottom = 55;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool any = false;
    auto widen = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        if (!any) {
            x0 = x1 = x;
            y0 = y1 = y;
            any = true;
        }
        x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    };
    for (const auto& s : plot.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) widen(s.x[i], s.y[i]);
    for (const auto& m : plot.markers) widen(m.x, any ? y0 : 0.0);
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + (y0 == 0 ? 1 : std::abs(y0) * 0.1);
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
      << "</text>\n";
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x0 + (x1 - x0) * t / 4.0, fy = y0 + (y1 - y0) * t / 4.0;
        o << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">" << num(fx)
          << "</text>\n";
        o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">" << num(fy)
          << "</text>\n";
    }
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 12) << "\" text-anchor=\"middle\">"
      << escape(plot.x_label) << "</text>\n";
    o << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(plot.y_label) << "</text>\n";

    for (std::size_t s = 0; s < plot.series.size(); ++s) {
        const auto& ser = plot.series[s];
        o << "<polyline fill=\"none\" stroke=\"" << ser.colour << "\" stroke-width=\"1.5\""
          << (ser.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
        for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i)
            if (std::isfinite(ser.x[i]) && std::isfinite(ser.y[i]))
                o << num(px(ser.x[i])) << ',' << num(py(ser.y[i])) << ' ';
        o << "\"/>\n";
        const double ly = top + 14 + 16 * static_cast<double>(s);
        o << "<line x1=\"" << num(W - right + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(W - right + 30)
          << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << ser.colour << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << num(W - right + 35) << "\" y=\"" << num(ly) << "\">" << escape(ser.label) << "</text>\n";
    }
    for (const auto& m : plot.markers) {
        o << "<line class=\"marker\" x1=\"" << num(px(m.x)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(m.x))
          << "\" y2=\"" << num(top + ph) << "\" stroke=\"" << m.colour << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << num(px(m.x) + 4) << "\" y=\"" << num(top + 14) << "\" fill=\"" << m.colour << "\">"
          << escape(m.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace svg

// ---------------------------------------------------------------------------
// Emission

enum class EmitFormat { json, csv_tables, svg_plots };

inline std::optional<EmitFormat> parse_emit_format(std::string_view s) {
    if (s == "json") return EmitFormat::json;
    if (s == "csv_tables") return EmitFormat::csv_tables;
    if (s == "svg_plots") return EmitFormat::svg_plots;
    return std::nullopt;
}

inline constexpr const char* t_R_colour = "gold";
inline constexpr const char* t_I_colour = "red";

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline std::vector<double> iota_from(std::size_t n, double first) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = first + static_cast<double>(i);
    return v;
}

}  // namespace detail

/// One row per (candidate, k), shaped like the tabulated cluster diagnostics.
inline std::string cluster_diagnostics_csv(const AnalysisReport& r) {
    std::ostringstream o;
    o << "window,start,end,k,inter_cluster_fraction,within_fractions,qualifies,selected\n";
    for (const auto& d : r.cluster_diagnostics)
        for (const auto& row : d.rows) {
            std::string within;
            for (std::size_t c = 0; c < row.within_fractions.size(); ++c)
                within += (c ? ";" : "") + svg::num(row.within_fractions[c]);
            const bool selected = r.baseline && r.baseline->window.index == d.window.index && r.baseline->k == row.k;
            o << d.window.index << ',' << d.window.start << ',' << d.window.end << ',' << row.k << ','
              << svg::num(row.inter_cluster_fraction) << ',' << within << ',' << (row.qualifies ? 1 : 0) << ','
              << (selected ? 1 : 0) << '\n';
        }
    return o.str();
}

inline std::string risk_trajectory_csv(const AnalysisReport& r) {
    std::ostringstream o;
    o << "window,start,end,median_pq,iqr_pq,n_pixels,t_R,t_I\n";
    for (const auto& p : r.risk) {
        const bool is_r = r.warnings.t_R && r.warnings.t_R->index == p.window.index;
        const bool is_i = r.warnings.t_I && r.warnings.t_I->index == p.window.index;
        o << p.window.index << ',' << p.window.start << ',' << p.window.end << ',' << svg::num(p.median_pq) << ','
          << svg::num(p.iqr_pq) << ',' << p.n_pixels << ',' << (is_r ? 1 : 0) << ',' << (is_i ? 1 : 0) << '\n';
    }
    return o.str();
}

inline std::vector<std::pair<std::string, std::string>> svg_plots(const AnalysisReport& r) {
    std::vector<std::pair<std::string, std::string>> out;

    svg::Plot mean{"Mean RLOSD per location", "sample", "displacement (mm)", {}, {}};
    svg::Plot var{"Moving-window variance of mean RLOSD", "window", "variance (mm^2)", {}, {}};
    svg::Plot per{"Mean local periodogram", "Fourier index k", "I(w_k)", {}, {}};
    svg::Plot med{"Median local variance", "window", "local variance", {}, {}};
    const std::size_t pwin = r.baseline ? r.baseline->window.index : r.window_count;
    per.title += " at window " + std::to_string(pwin);
    for (std::size_t i = 0; i < r.locations.size(); ++i) {
        const auto& loc = r.locations[i];
        const std::string colour = svg::palette(i);
        mean.series.push_back({loc.location_id, detail::iota_from(loc.mean_displacement.size(), 1),
                               loc.mean_displacement, colour, false});
        var.series.push_back({loc.location_id, detail::iota_from(loc.moving_window_variance.size(), 1),
                              loc.moving_window_variance, colour, false});
        var.series.push_back({loc.location_id + " detrended",
                              detail::iota_from(loc.detrended_moving_window_variance.size(), 1),
                              loc.detrended_moving_window_variance, colour, true});
        if (pwin >= 1 && pwin <= loc.mean_local_periodograms.size()) {
            const auto& p = loc.mean_local_periodograms[pwin - 1];
            per.series.push_back({loc.location_id, detail::iota_from(p.size(), 1), p, colour, false});
        }
        med.series.push_back({loc.location_id, detail::iota_from(loc.median_local_variance.size(), 1),
                              loc.median_local_variance, colour, true});
    }
    med.series.push_back({"all pixels", detail::iota_from(r.median_local_variance.size(), 1), r.median_local_variance,
                          "black", false});
    for (const auto& c : r.candidates)
        med.markers.push_back({static_cast<double>(c.window.index), std::to_string(c.window.index), "#999999"});

    svg::Plot risk{"Risk of failure", "window", "pq", {}, {}};
    std::vector<double> x, m, q;
    for (const auto& p : r.risk) {
        x.push_back(static_cast<double>(p.window.index));
        m.push_back(p.median_pq);
        q.push_back(p.iqr_pq);
    }
    risk.series.push_back({"Median(pq)", x, m, "black", false});
    risk.series.push_back({"IQR(pq)", x, q, "#1f77b4", true});
    if (r.warnings.t_R) risk.markers.push_back({static_cast<double>(r.warnings.t_R->index), "t_R", t_R_colour});
    if (r.warnings.t_I) risk.markers.push_back({static_cast<double>(r.warnings.t_I->index), "t_I", t_I_colour});

    out.emplace_back("mean_rlosd.svg", svg::render(mean));
    out.emplace_back("moving_window_variance.svg", svg::render(var));
    out.emplace_back("local_periodograms.svg", svg::render(per));
    out.emplace_back("median_local_variance.svg", svg::render(med));
    out.emplace_back("risk.svg", svg::render(risk));
    return out;
}

/// Writes the requested artefacts into `out_dir` (created if missing); returns the paths written.
inline std::vector<std::filesystem::path> emit(const AnalysisReport& r, EmitFormat format,
                                               const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir))
        throw Error(ErrorCode::IoError, "cannot create directory " + out_dir.string());
    std::vector<std::pair<std::string, std::string>> files;
    switch (format) {
        case EmitFormat::json: files.emplace_back("report.json", to_json_text(r)); break;
        case EmitFormat::csv_tables:
            files.emplace_back("cluster_diagnostics.csv", cluster_diagnostics_csv(r));
            files.emplace_back("risk_trajectory.csv", risk_trajectory_csv(r));
            break;
        case EmitFormat::svg_plots: files = svg_plots(r); break;
    }
    std::vector<std::filesystem::path> written;
    for (const auto& [name, text] : files) {
        detail::write_text(out_dir / name, text);
        written.push_back(out_dir / name);
    }
    return written;
}

}  // namespace slopewatch
