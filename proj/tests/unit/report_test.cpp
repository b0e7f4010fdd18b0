#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "iff/errors.hpp"
#include "iff/report.hpp"

using namespace iff;

namespace
{

std::vector<PhaseTransitionRecord> three_records()
{
    return {
        {0, 4, 0.5, 6.283185307179586, 1e6, 0.7981798683581151, 6.0, true, 4, 1.25e-7},
        {1, 4, 2.1, 1.4959965017094252, 3.3, 0.17493, 0.5185139398778874, false, 2,
         std::numeric_limits<double>::infinity()},
        {2, 4, 0.1, 31.41592653589793, 1e9, 1.4971498726941338, 9.0, false, 3,
         std::numeric_limits<double>::infinity()},
    };
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST(PhaseCsv, EmptyIsHeaderOnly)
{
    EXPECT_EQ(format_phase_csv({}), std::string(kPhaseCsvHeader) + "\n");
    EXPECT_TRUE(parse_phase_csv(format_phase_csv({})).empty());
}

TEST(PhaseCsv, RoundTripsExactly)
{
    const auto rec = three_records();
    const std::string csv = format_phase_csv(rec);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    const auto back = parse_phase_csv(csv);
    ASSERT_EQ(back.size(), rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i)
    {
        EXPECT_EQ(back[i].trial, rec[i].trial);
        EXPECT_EQ(back[i].n, rec[i].n);
        EXPECT_EQ(back[i].tau, rec[i].tau);
        EXPECT_EQ(back[i].srf, rec[i].srf);
        EXPECT_EQ(back[i].snr, rec[i].snr);
        EXPECT_EQ(back[i].log_srf, rec[i].log_srf);
        EXPECT_EQ(back[i].log_snr, rec[i].log_snr);
        EXPECT_EQ(back[i].success, rec[i].success);
        EXPECT_EQ(back[i].n_recovered, rec[i].n_recovered);
        EXPECT_EQ(back[i].max_matched_error, rec[i].max_matched_error);
    }
    EXPECT_EQ(format_phase_csv(back), csv);
}

TEST(PhaseCsv, SuccessWrittenAsBit)
{
    const std::string csv = format_phase_csv(three_records());
    EXPECT_NE(csv.find(",1,4,"), std::string::npos);
    EXPECT_NE(csv.find(",0,2,inf"), std::string::npos);
}

TEST(PhaseCsv, RejectsMalformedInput)
{
    EXPECT_THROW(parse_phase_csv("a,b\n"), InvalidArgument);
    EXPECT_THROW(parse_phase_csv(std::string(kPhaseCsvHeader) + "\n1,2,3\n"), InvalidArgument);
    EXPECT_THROW(parse_phase_csv(std::string(kPhaseCsvHeader) + "\n0,4,x,1,1,1,1,1,4,0\n"),
                 InvalidArgument);
}

TEST(PhaseCsv, EmitWritesFile)
{
    const auto dir = std::filesystem::temp_directory_path() / "iff_report_test";
    std::filesystem::remove_all(dir);
    emit_csv(three_records(), dir / "sub" / "phase.csv");
    EXPECT_EQ(slurp(dir / "sub" / "phase.csv"), format_phase_csv(three_records()));
    std::filesystem::remove_all(dir);
}

TEST(SvgAxes, CoverDataWithDecadeTicks)
{
    std::vector<PhaseTransitionRecord> r(2);
    r[0].log_srf = 0.2;
    r[0].log_snr = 1.5;
    r[1].log_srf = 1.7;
    r[1].log_snr = 3.2;
    const LogAxes a = axes_for(r);
    EXPECT_EQ(a.x_lo, 0.0);
    EXPECT_EQ(a.x_hi, 2.0);
    EXPECT_EQ(a.y_lo, 1.0);
    EXPECT_EQ(a.y_hi, 4.0);
    EXPECT_EQ(a.x_ticks(), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(a.y_ticks(), (std::vector<int>{1, 2, 3, 4}));
    const LogAxes e = axes_for({});
    EXPECT_EQ(e.x_lo, 0.0);
    EXPECT_EQ(e.x_hi, 1.0);
}

TEST(SvgScatter, OneMarkerPerRecordAndClippedLines)
{
    const auto rec = three_records();
    const std::string svg = render_svg_scatter(rec, {{7.0, -2.0, 0.1}, {4.0, 0.0, 0.1}});
    std::size_t circles = 0, pos = 0;
    while ((pos = svg.find("<circle", pos)) != std::string::npos)
    {
        ++circles;
        ++pos;
    }
    EXPECT_EQ(circles, rec.size());
    EXPECT_NE(svg.find("fill=\"red\""), std::string::npos);
    EXPECT_NE(svg.find("fill=\"blue\""), std::string::npos);
    EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
    EXPECT_NE(svg.find(">1e0<"), std::string::npos);
    EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

TEST(WriteTextFile, ReportsPath)
{
    try
    {
        write_text_file("/proc/nonexistent_dir/x.txt", "a");
        FAIL() << "expected IoError";
    }
    catch (const IoError& e)
    {
        EXPECT_NE(std::string(e.what()).find("/proc/nonexistent_dir/x.txt"), std::string::npos);
    }
}
