#include "iff/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "iff/errors.hpp"
#include "iff/experiments.hpp"

namespace iff
{

using nlohmann::json;

namespace
{

const json& field(const json& j, const char* name, const char* where)
{
    if (!j.is_object() || !j.contains(name))
        throw InvalidArgument(std::string("scenario: missing '") + name + "' in " + where);
    return j.at(name);
}

double number(const json& j, const char* name, const char* where)
{
    const json& v = field(j, name, where);
    if (!v.is_number())
        throw InvalidArgument(std::string("scenario: '") + name + "' must be a number");
    return v.get<double>();
}

json optional_number(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

} // namespace

Scenario parse_scenario(std::string_view json_text)
{
    json root;
    try
    {
        root = json::parse(json_text);
    }
    catch (const json::parse_error& e)
    {
        throw InvalidArgument(std::string("scenario: ") + e.what());
    }

    const double omega = number(root, "omega", "scenario");
    const double k = number(root, "k_half", "scenario");
    if (k != std::floor(k) || k < 1)
        throw InvalidArgument("scenario: 'k_half' must be a positive integer");

    std::vector<PointSource> src;
    const json& list = field(root, "sources", "scenario");
    if (!list.is_array())
        throw InvalidArgument("scenario: 'sources' must be an array");
    for (const auto& s : list)
        src.push_back({number(s, "y", "source"),
                       cplx(number(s, "re", "source"), number(s, "im", "source"))});

    const json& il = field(root, "illumination", "scenario");
    const json& kind = field(il, "kind", "illumination");
    const double t = number(il, "t_count", "illumination");
    if (t != std::floor(t) || t < 1)
        throw InvalidArgument("scenario: 't_count' must be a positive integer");
    IlluminationSpec spec{UniformLaw{0.0, 0.0}, static_cast<int>(t)};
    if (kind == "uniform")
        spec.law = UniformLaw{number(il, "lo", "illumination"), number(il, "hi", "illumination")};
    else if (kind == "gaussian")
        spec.law =
            GaussianLaw{number(il, "mean", "illumination"), number(il, "var", "illumination")};
    else
        throw InvalidArgument("scenario: illumination kind must be 'uniform' or 'gaussian'");

    const double sigma = number(root, "sigma", "scenario");
    if (!(sigma >= 0.0))
        throw InvalidArgument("scenario: 'sigma' must be non-negative");
    const json& seed = field(root, "seed", "scenario");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
        throw InvalidArgument("scenario: 'seed' must be a non-negative integer");

    return {omega, static_cast<int>(k), SourceModel(std::move(src)), spec, sigma,
            seed.get<std::uint64_t>()};
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open scenario '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& s)
{
    json src = json::array();
    for (const auto& p : s.sources.sources())
        src.push_back({{"y", p.position}, {"re", p.amplitude.real()}, {"im", p.amplitude.imag()}});
    json il;
    if (const auto* u = std::get_if<UniformLaw>(&s.illumination.law))
        il = {{"kind", "uniform"}, {"lo", u->lo}, {"hi", u->hi}};
    else
    {
        const auto& g = std::get<GaussianLaw>(s.illumination.law);
        il = {{"kind", "gaussian"}, {"mean", g.mean}, {"var", g.variance}};
    }
    il["t_count"] = s.illumination.t_count;
    const json root = {{"omega", s.omega}, {"k_half", s.k_half}, {"sources", src},
                       {"illumination", il}, {"sigma", s.sigma}, {"seed", s.seed}};
    return root.dump(2);
}

MeasurementSet synthesize_scenario(const Scenario& s)
{
    const SamplingGrid grid(s.omega, s.k_half);
    const IlluminationMatrix L =
        draw_illumination(s.illumination, s.sources.size(), trial_seed(s.seed, 0, 0));
    return add_noise(synthesize(s.sources, L, grid),
                     draw_noise({s.sigma, trial_seed(s.seed, 0, 1)}, s.illumination.t_count, grid));
}

std::string format_measurement_csv(const MeasurementSet& y)
{
    std::string out = "t,k,re,im\n";
    const int k_half = y.grid.k_half();
    for (Eigen::Index t = 0; t < y.data.rows(); ++t)
        for (Eigen::Index i = 0; i < y.data.cols(); ++i)
            out += fmt::format("{},{},{},{}\n", t, static_cast<int>(i) - k_half,
                               y.data(t, i).real(), y.data(t, i).imag());
    return out;
}

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string manifest_json(const Scenario& s, const IFFConfig& cfg, std::uint64_t input_hash)
{
    const json config = {
        {"eps", optional_number(cfg.eps)},
        {"c_noise", cfg.c_noise},
        {"d_prior", optional_number(cfg.d_prior)},
        {"cluster_radius", optional_number(cfg.cluster_radius)},
        {"max_outer_iters", cfg.max_outer_iters},
        {"subsample_stride", cfg.subsample_stride},
        {"hankel_half", cfg.hankel_half ? json(*cfg.hankel_half) : json(nullptr)},
        {"snr", optional_number(cfg.snr)},
        {"gamma_override", optional_number(cfg.gamma_override)},
        {"search_half_width", optional_number(cfg.search_half_width)},
        {"max_optimizer_iters", cfg.max_optimizer_iters},
        {"min_residual_gain", cfg.min_residual_gain},
    };
    const json root = {
        {"config", config},
        {"seeds",
         {{"base", s.seed},
          {"illumination", trial_seed(s.seed, 0, 0)},
          {"noise", trial_seed(s.seed, 0, 1)}}},
        {"input_hash", fmt::format("{:016x}", input_hash)},
        {"scenario", json::parse(scenario_to_json(s))},
    };
    return root.dump(2);
}

std::string result_json(const IFFResult& r)
{
    json trace = json::array();
    for (const auto& it : r.trace)
        trace.push_back({
            {"support_before", it.support_before},
            {"filter_degree", it.filter_degree},
            {"hankel_size", it.hankel_size},
            {"spacing", it.spacing},
            {"sigma_r", it.sigma_r},
            {"snr_r", std::isfinite(it.snr_r) ? json(it.snr_r) : json(nullptr)},
            {"gamma_threshold", it.gamma_threshold},
            {"new_positions", it.new_positions},
            {"focus_values", it.focus_values},
            {"candidate_positions", it.candidate_positions},
            {"residual", it.residual},
        });
    const json root = {{"support", r.support.positions()},
                       {"gamma_final", r.gamma_final},
                       {"converged", r.converged},
                       {"diagnostic", r.diagnostic},
                       {"trace", trace}};
    return root.dump(2);
}

} // namespace iff
