#include <string>

#include <gtest/gtest.h>

#include "iff/errors.hpp"
#include "iff/scenario.hpp"

using namespace iff;

namespace
{

const char* kScenario = R"({
  "omega": 1, "k_half": 6,
  "sources": [ {"y": -0.5, "re": 1, "im": 0}, {"y": 0.4, "re": 0, "im": 2} ],
  "illumination": {"kind": "uniform", "lo": 1, "hi": 2.7320508, "t_count": 3},
  "sigma": 1e-3, "seed": 17
})";

std::string with(std::string text, const std::string& from, const std::string& to)
{
    text.replace(text.find(from), from.size(), to);
    return text;
}

} // namespace

TEST(Scenario, ParsesFields)
{
    const Scenario s = parse_scenario(kScenario);
    EXPECT_EQ(s.omega, 1.0);
    EXPECT_EQ(s.k_half, 6);
    ASSERT_EQ(s.sources.size(), 2);
    EXPECT_EQ(s.sources.sources()[1].amplitude, cplx(0.0, 2.0));
    EXPECT_EQ(s.illumination.t_count, 3);
    EXPECT_EQ(s.sigma, 1e-3);
    EXPECT_EQ(s.seed, 17u);
}

TEST(Scenario, RoundTripsThroughJson)
{
    const Scenario s = parse_scenario(kScenario);
    const Scenario t = parse_scenario(scenario_to_json(s));
    EXPECT_EQ(scenario_to_json(t), scenario_to_json(s));
    EXPECT_EQ(t.sources.positions(), s.sources.positions());
}

TEST(Scenario, GaussianIllumination)
{
    const std::string g = with(kScenario, R"("kind": "uniform", "lo": 1, "hi": 2.7320508)",
                               R"("kind": "gaussian", "mean": 0, "var": 1)");
    const Scenario s = parse_scenario(g);
    EXPECT_DOUBLE_EQ(s.illumination.variance(), 1.0);
    EXPECT_EQ(parse_scenario(scenario_to_json(s)).illumination.mean(), 0.0);
}

TEST(Scenario, ErrorsNameTheField)
{
    auto message = [](const std::string& text) {
        try
        {
            parse_scenario(text);
        }
        catch (const InvalidArgument& e)
        {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message(with(kScenario, "\"sigma\": 1e-3,", "")).find("sigma"), std::string::npos);
    EXPECT_NE(message(with(kScenario, "\"k_half\": 6", "\"k_half\": 1.5")).find("k_half"),
              std::string::npos);
    EXPECT_NE(message(with(kScenario, "\"seed\": 17", "\"seed\": -1")).find("seed"),
              std::string::npos);
    EXPECT_NE(message(with(kScenario, "uniform", "laplace")).find("kind"), std::string::npos);
    EXPECT_FALSE(message("{not json").empty());
    EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST(Scenario, SynthesisIsSeeded)
{
    const Scenario s = parse_scenario(kScenario);
    const MeasurementSet a = synthesize_scenario(s), b = synthesize_scenario(s);
    EXPECT_EQ(a.data, b.data);
    EXPECT_EQ(a.data.rows(), 3);
    EXPECT_EQ(a.data.cols(), 13);
    Scenario t = s;
    t.seed = 18;
    EXPECT_NE(synthesize_scenario(t).data, a.data);
}

TEST(MeasurementCsv, HeaderAndRows)
{
    const MeasurementSet y = synthesize_scenario(parse_scenario(kScenario));
    const std::string csv = format_measurement_csv(y);
    EXPECT_EQ(csv.substr(0, 9), "t,k,re,im");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 13);
    EXPECT_NE(csv.find("\n0,-6,"), std::string::npos);
    EXPECT_NE(csv.find("\n2,6,"), std::string::npos);
}

TEST(Fnv1a, KnownVectors)
{
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
}

TEST(Manifest, CarriesConfigSeedsAndHash)
{
    const Scenario s = parse_scenario(kScenario);
    IFFConfig cfg;
    cfg.subsample_stride = 3;
    const std::string m = manifest_json(s, cfg, fnv1a(kScenario));
    EXPECT_NE(m.find("\"subsample_stride\": 3"), std::string::npos);
    EXPECT_NE(m.find("\"base\": 17"), std::string::npos);
    EXPECT_NE(m.find("\"input_hash\""), std::string::npos);
    EXPECT_NE(m.find("\"eps\": null"), std::string::npos);
}

TEST(Result, CarriesSupportAndTrace)
{
    const Scenario s = parse_scenario(kScenario);
    const IFFResult r = run_iff(synthesize_scenario(s), s.sigma);
    const std::string j = result_json(r);
    EXPECT_NE(j.find("\"support\""), std::string::npos);
    EXPECT_NE(j.find("\"converged\""), std::string::npos);
    EXPECT_NE(j.find("\"trace\""), std::string::npos);
}
