#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "slopewatch/io.hpp"
#include "slopewatch/synth.hpp"

using namespace slopewatch;
namespace fs = std::filesystem;

namespace {

Error error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e;
    }
    return Error(ErrorCode::IoError, "nothing thrown");
}

Dataset parse(const std::string& text) {
    std::istringstream in(text);
    return ingest_csv(in, "mem.csv");
}

std::string rows(const std::string& loc, const std::string& pix, const std::string& start, int n, int step = 12) {
    std::string out;
    Date d = *Date::parse(start);
    for (int t = 0; t < n; ++t, d = d.plus_days(step)) out += loc + "," + pix + "," + d.iso() + "," + std::to_string(0.5 * t) + "\n";
    return out;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("slopewatch_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(IngestCsv, SixLocationsOfUnequalSize) {
    const std::vector<int> sizes{30, 44, 46, 25, 38, 37};
    std::string text = std::string(csv_header) + "\n";
    for (std::size_t l = 0; l < sizes.size(); ++l)
        for (int p = 0; p < sizes[l]; ++p) text += rows("L" + std::to_string(l + 1), "P" + std::to_string(p), "2017-08-19", 44);
    const auto data = parse(text);
    ASSERT_EQ(data.size(), 220u);
    std::map<std::string, int> count;
    for (const auto& s : data) {
        ++count[s.location_id];
        EXPECT_EQ(s.grid.count, 44u);
        EXPECT_EQ(s.grid.last_date().iso(), "2019-01-17");
    }
    for (std::size_t l = 0; l < sizes.size(); ++l) EXPECT_EQ(count["L" + std::to_string(l + 1)], sizes[l]);
}

TEST(IngestCsv, UnsortedRowsAndSinglePixel) {
    const std::string text = std::string(csv_header) + "\r\n" + "A,1,2020-01-25,3\r\n" + "A,1,2020-01-01,1\r\n" +
                             "A,1,2020-01-13,2\r\n";
    const auto data = parse(text);
    ASSERT_EQ(data.size(), 1u);
    EXPECT_EQ(data[0].values, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(data[0].grid.start.iso(), "2020-01-01");
}

TEST(IngestCsv, DuplicateRowNamesBothLines) {
    const std::string text = std::string(csv_header) + "\n" + rows("A", "1", "2020-01-01", 3) + "A,1,2020-01-13,9\n";
    const auto e = error_of([&] { parse(text); });
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
    const std::string what = e.what();
    EXPECT_NE(what.find("mem.csv:5"), std::string::npos) << what;
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
}

TEST(IngestCsv, SchemaErrors) {
    EXPECT_EQ(error_of([] { parse("loc,pix,date,value\nA,1,2020-01-01,1\n"); }).code(), ErrorCode::SchemaError);
    EXPECT_EQ(error_of([] { parse(""); }).code(), ErrorCode::SchemaError);
    EXPECT_EQ(error_of([] { parse(std::string(csv_header) + "\n"); }).code(), ErrorCode::SchemaError);
    const auto bad_date = error_of([] { parse(std::string(csv_header) + "\nA,1,2020-01-01,1\nA,1,2020/01/13,1\n"); });
    EXPECT_EQ(bad_date.code(), ErrorCode::SchemaError);
    EXPECT_NE(std::string(bad_date.what()).find("mem.csv:3"), std::string::npos);
    EXPECT_EQ(error_of([] { parse(std::string(csv_header) + "\nA,1,2020-01-01,abc\n"); }).code(), ErrorCode::SchemaError);
    EXPECT_EQ(error_of([] { parse(std::string(csv_header) + "\nA,1,2020-01-01\n"); }).code(), ErrorCode::SchemaError);
    EXPECT_EQ(error_of([] { parse(std::string(csv_header) + "\nA,1,2020-01-01,nan\nA,1,2020-01-13,1\n"); }).code(),
              ErrorCode::NonFinite);
}

TEST(IngestCsv, GridErrors) {
    const std::string head = std::string(csv_header) + "\n";
    EXPECT_EQ(error_of([&] { parse(head + rows("A", "1", "2020-01-01", 5) + rows("A", "2", "2020-01-13", 5)); }).code(),
              ErrorCode::MixedGrids);
    const auto irregular = error_of([&] {
        parse(head + "A,1,2020-01-01,1\nA,1,2020-01-13,1\nA,1,2020-02-06,1\n");
    });
    EXPECT_EQ(irregular.code(), ErrorCode::IrregularSampling);
    EXPECT_NE(std::string(irregular.what()).find("A/1"), std::string::npos);
    EXPECT_EQ(error_of([&] { parse(head + "A,1,2020-01-01,1\n"); }).code(), ErrorCode::TooShort);
    // Different locations may use different grids.
    EXPECT_EQ(parse(head + rows("A", "1", "2020-01-01", 5) + rows("B", "1", "2021-03-01", 7, 6)).size(), 2u);
}

TEST(IngestCsv, MissingFile) {
    EXPECT_EQ(error_of([] { ingest_csv(fs::path("/nonexistent/dir/x.csv")); }).code(), ErrorCode::IoError);
}

TEST(Csv, RoundTripIsExact) {
    const auto data = synth::generate(synth::regime_change_benchmark(8));
    std::stringstream ss;
    write_csv(ss, data);
    const auto back = ingest_csv(ss, "rt");
    ASSERT_EQ(back.size(), data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        EXPECT_EQ(back[i].location_id, data[i].location_id);
        EXPECT_EQ(back[i].pixel_id, data[i].pixel_id);
        EXPECT_EQ(back[i].grid, data[i].grid);
        EXPECT_EQ(back[i].values, data[i].values);
    }
}

TEST(Json, ReportRoundTrip) {
    const auto r = run(synth::generate(synth::regime_change_benchmark(9)), PipelineConfig{});
    const auto text = to_json_text(r);
    const auto back = report_from_json_text(text);
    EXPECT_EQ(back, r);
    EXPECT_EQ(to_json_text(back), text);

    auto j = nlohmann::json::parse(text);
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["config"]["detrend"], "linear");
    j["schema_version"] = 99;
    EXPECT_EQ(error_of([&] { report_from_json_text(j.dump()); }).code(), ErrorCode::SchemaError);
    EXPECT_EQ(error_of([] { report_from_json_text("{not json"); }).code(), ErrorCode::SchemaError);
}

TEST(Emit, FileSetAndMarkers) {
    const auto r = run(synth::generate(synth::stationary_benchmark(2)), PipelineConfig{});
    const auto dir = scratch("emit");
    std::size_t files = 0;
    for (auto f : {EmitFormat::svg_plots, EmitFormat::csv_tables, EmitFormat::json}) files += emit(r, f, dir).size();
    EXPECT_EQ(files, 8u);
    for (const char* name : {"report.json", "cluster_diagnostics.csv", "risk_trajectory.csv", "mean_rlosd.svg",
                             "moving_window_variance.svg", "local_periodograms.svg", "median_local_variance.svg",
                             "risk.svg"})
        EXPECT_TRUE(fs::exists(dir / name)) << name;

    const auto risk = slurp(dir / "risk.svg");
    EXPECT_EQ(risk.find("<svg"), 0u);
    if (!r.warnings.t_R) {
        EXPECT_EQ(risk.find("class=\"marker\""), std::string::npos);
    }
    const auto diag = slurp(dir / "cluster_diagnostics.csv");
    EXPECT_EQ(diag.substr(0, diag.find('\n')), "window,start,end,k,inter_cluster_fraction,within_fractions,qualifies,selected");
    const auto traj = slurp(dir / "risk_trajectory.csv");
    EXPECT_EQ(traj.substr(0, traj.find('\n')), "window,start,end,median_pq,iqr_pq,n_pixels,t_R,t_I");
    fs::remove_all(dir);
}

TEST(Emit, WarningMarkersUseThresholdColours) {
    auto r = run(synth::generate(synth::regime_change_benchmark(10)), PipelineConfig{});
    ASSERT_FALSE(r.risk.empty());
    r.warnings.t_R = r.risk.front().window;
    r.warnings.t_I = r.risk.back().window;
    std::string risk;
    for (const auto& [name, text] : svg_plots(r))
        if (name == "risk.svg") risk = text;
    EXPECT_NE(risk.find(t_R_colour), std::string::npos);
    EXPECT_NE(risk.find(t_I_colour), std::string::npos);
    EXPECT_NE(risk.find("class=\"marker\""), std::string::npos);
}

TEST(Emit, UnwritableDirectory) {
    const auto r = run(synth::generate(synth::stationary_benchmark(2)), PipelineConfig{});
    const auto dir = scratch("blocked");
    std::ofstream(dir / "file") << "x";
    EXPECT_EQ(error_of([&] { emit(r, EmitFormat::json, dir / "file" / "sub"); }).code(), ErrorCode::IoError);
    fs::remove_all(dir);
}

TEST(Svg, EscapesText) {
    EXPECT_EQ(svg::escape("a<b & \"c\">"), "a&lt;b &amp; &quot;c&quot;&gt;");
}
