// iff: command-line front end for the focusing/filtering solver and the
// Monte-Carlo harness.
//
//   iff run --scenario s.json --out dir [--stride N] [--eps X] [--max-iters R] [--window W]
//   iff synth --scenario s.json --out y.csv
//   iff phase --trials N --n 4 --t-count 10 --out dir
//   iff recon-stats --trials N --out dir
//
// IFF_SEED, when set, replaces the base seed of every subcommand.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "iff/errors.hpp"
#include "iff/experiments.hpp"
#include "iff/report.hpp"
#include "iff/scenario.hpp"

namespace fs = std::filesystem;

namespace
{

std::optional<std::uint64_t> env_seed()
{
    const char* s = std::getenv("IFF_SEED");
    if (s == nullptr || *s == '\0')
        return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0')
        throw iff::InvalidArgument(std::string("IFF_SEED is not an unsigned integer: ") + s);
    return static_cast<std::uint64_t>(v);
}

std::string read_file(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    if (!is)
        throw iff::IoError("cannot open '" + p.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string vec_text(const std::vector<double>& v)
{
    return fmt::format("[{}]", fmt::join(v, ", "));
}

struct RunArgs
{
    std::string scenario;
    std::string out;
    int stride = 1;
    std::optional<double> eps;
    int max_iters = 8;
    std::optional<double> window;
};

int cmd_run(const RunArgs& a)
{
    const std::string text = read_file(a.scenario);
    iff::Scenario s = iff::parse_scenario(text);
    if (auto seed = env_seed())
        s.seed = *seed;

    iff::IFFConfig cfg;
    cfg.subsample_stride = a.stride;
    cfg.eps = a.eps;
    cfg.max_outer_iters = a.max_iters;
    cfg.search_half_width = a.window;

    const iff::MeasurementSet y = iff::synthesize_scenario(s);
    const iff::IFFResult r = iff::run_iff(y, s.sigma, cfg);

    const fs::path out(a.out);
    iff::write_text_file(out / "manifest.json", iff::manifest_json(s, cfg, iff::fnv1a(text)));
    iff::write_text_file(out / "result.json", iff::result_json(r));
    std::cout << fmt::format("support {} gamma {:.6g} converged {}\n",
                             vec_text(r.support.positions()), r.gamma_final,
                             r.converged ? "yes" : "no");
    if (!r.diagnostic.empty())
        std::cout << "diagnostic: " << r.diagnostic << '\n';
    return 0;
}

int cmd_synth(const std::string& scenario, const std::string& out)
{
    iff::Scenario s = iff::load_scenario(scenario);
    if (auto seed = env_seed())
        s.seed = *seed;
    iff::write_text_file(out, iff::format_measurement_csv(iff::synthesize_scenario(s)));
    return 0;
}

int cmd_phase(iff::PhaseTransitionConfig cfg, const std::string& out)
{
    if (auto seed = env_seed())
        cfg.base_seed = *seed;
    cfg.illumination.t_count = cfg.t_count;
    const iff::PhaseTransitionResult r = iff::run_phase_transition(cfg);

    const fs::path dir(out);
    iff::emit_csv(r.records, dir / "phase.csv");
    iff::emit_svg_scatter(r.records, {r.upper, r.lower}, dir / "phase.svg");

    const auto above = iff::region_rate(r.records, r.upper, true);
    const auto below = iff::region_rate(r.records, r.lower, false);
    const nlohmann::json lines = {
        {"base_seed", cfg.base_seed},
        {"trials", cfg.trials},
        {"upper", {{"slope", r.upper.slope}, {"intercept", r.upper.intercept},
                   {"misclassification", r.upper.misclassification},
                   {"region_count", above.count}, {"region_success_rate", above.rate()}}},
        {"lower", {{"slope", r.lower.slope}, {"intercept", r.lower.intercept},
                   {"misclassification", r.lower.misclassification},
                   {"region_count", below.count}, {"region_success_rate", below.rate()}}},
    };
    iff::write_text_file(dir / "lines.json", lines.dump(2) + "\n");

    int ok = 0;
    for (const auto& rec : r.records)
        ok += rec.success ? 1 : 0;
    std::cout << fmt::format("{} trials, {} successes\n", r.records.size(), ok);
    std::cout << fmt::format("slope {:g}: intercept {:.4g}, success above {}/{}\n", r.upper.slope,
                             r.upper.intercept, above.successes, above.count);
    std::cout << fmt::format("slope {:g}: intercept {:.4g}, success below {}/{}\n", r.lower.slope,
                             r.lower.intercept, below.successes, below.count);
    return 0;
}

int cmd_recon(iff::ReconStatsConfig cfg, const std::string& out)
{
    if (auto seed = env_seed())
        cfg.base_seed = *seed;
    const iff::ReconStats st = iff::run_recon_stats(cfg);

    auto moments = [](const iff::MethodMoments& m) {
        return nlohmann::json{{"mean", m.mean}, {"variance", m.variance}, {"used", m.used}};
    };
    const nlohmann::json doc = {
        {"base_seed", cfg.base_seed},  {"trials", st.trials},
        {"truth", cfg.truth},          {"k_half", cfg.k_half},
        {"sigma", cfg.sigma},          {"non_converged", st.non_converged},
        {"count_mismatch", st.count_mismatch},
        {"iff", moments(st.iff)},      {"baseline", moments(st.baseline)},
    };
    iff::write_text_file(fs::path(out) / "recon_stats.json", doc.dump(2) + "\n");

    std::cout << fmt::format("iff      mean {} var {} ({} used, {} not converged, {} wrong count)\n",
                             vec_text(st.iff.mean), vec_text(st.iff.variance), st.iff.used,
                             st.non_converged, st.count_mismatch);
    std::cout << fmt::format("baseline mean {} var {} ({} used)\n", vec_text(st.baseline.mean),
                             vec_text(st.baseline.variance), st.baseline.used);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Iterative focusing-localization and filtering for point-source super-resolution"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Solve one scenario and write manifest/result JSON");
    run_cmd->add_option("--scenario", run.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_option("--stride", run.stride, "Subsampling stride")->check(CLI::PositiveNumber);
    run_cmd->add_option("--eps", run.eps, "Focusing tolerance")->check(CLI::PositiveNumber);
    run_cmd->add_option("--max-iters", run.max_iters, "Outer iteration limit")->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--window", run.window, "Search half width (default pi/omega)")->check(CLI::PositiveNumber);

    std::string synth_scenario, synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Write the measurement CSV of a scenario");
    synth_cmd->add_option("--scenario", synth_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    synth_cmd->add_option("--out", synth_out, "Output CSV")->required();

    iff::PhaseTransitionConfig phase;
    std::string phase_out;
    auto* phase_cmd = app.add_subcommand("phase", "Phase-transition sweep in (log SRF, log SNR)");
    phase_cmd->add_option("--trials", phase.trials, "Number of trials")->check(CLI::PositiveNumber);
    phase_cmd->add_option("--n", phase.n, "Number of sources")->check(CLI::PositiveNumber);
    phase_cmd->add_option("--t-count", phase.t_count, "Illumination patterns")->check(CLI::PositiveNumber);
    phase_cmd->add_option("--k-half", phase.k_half, "Grid half size K")->check(CLI::PositiveNumber);
    phase_cmd->add_option("--seed", phase.base_seed, "Base seed");
    phase_cmd->add_option("--out", phase_out, "Output directory")->required();

    iff::ReconStatsConfig recon;
    std::string recon_out;
    auto* recon_cmd = app.add_subcommand("recon-stats", "Position statistics on the four-source scenario");
    recon_cmd->add_option("--trials", recon.trials, "Number of trials")->check(CLI::PositiveNumber);
    recon_cmd->add_option("--k-half", recon.k_half, "Grid half size K")->check(CLI::PositiveNumber);
    recon_cmd->add_option("--seed", recon.base_seed, "Base seed");
    recon_cmd->add_option("--out", recon_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run_cmd)
            return cmd_run(run);
        if (*synth_cmd)
            return cmd_synth(synth_scenario, synth_out);
        if (*phase_cmd)
            return cmd_phase(phase, phase_out);
        if (*recon_cmd)
            return cmd_recon(recon, recon_out);
    }
    catch (const std::exception& e)
    {
        std::cerr << "iff: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
