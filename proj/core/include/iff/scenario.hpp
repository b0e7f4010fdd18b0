#ifndef IFF_SCENARIO_HPP
#define IFF_SCENARIO_HPP

///
/// \file scenario.hpp
///
/// JSON scenarios, the measurement CSV dump and the run manifest/result
/// documents used by the command-line tool.
///
/// Scenario layout:
///
///   { "omega": 1, "k_half": 25,
///     "sources": [ {"y": -0.5, "re": 1, "im": 0}, ... ],
///     "illumination": {"kind": "uniform", "lo": 1, "hi": 2.73, "t_count": 10},
///     "sigma": 1e-4, "seed": 7 }
///
/// A gaussian illumination uses "mean" and "var" instead of "lo"/"hi".
///

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "iff/driver.hpp"
#include "iff/signal_model.hpp"

namespace iff
{

struct Scenario
{
    double omega;
    int k_half;
    SourceModel sources;
    IlluminationSpec illumination;
    double sigma;
    std::uint64_t seed;
};

/// Throws InvalidArgument naming the offending field.
Scenario parse_scenario(std::string_view json_text);
/// Throws IoError when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& s);

/// Illumination and noise drawn from independent streams of s.seed.
MeasurementSet synthesize_scenario(const Scenario& s);

/// Header `t,k,re,im`, one line per sample, k in [-K, K].
std::string format_measurement_csv(const MeasurementSet& y);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Config, seeds and a hash of the input file.
std::string manifest_json(const Scenario& s, const IFFConfig& cfg, std::uint64_t input_hash);

/// Support, final residual, convergence flag and the per-iteration trace.
std::string result_json(const IFFResult& r);

} // namespace iff

#endif
