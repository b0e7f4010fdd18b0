#ifndef IFF_EXPERIMENTS_HPP
#define IFF_EXPERIMENTS_HPP

///
/// \file experiments.hpp
///
/// Monte-Carlo harness: the (log SRF, log SNR) phase-transition sweep, the
/// fixed-scenario reconstruction statistics and a stacked-measurement MUSIC
/// baseline that needs the source count.
///
/// Every trial i draws its randomness from trial_seed(base, i, stream), so a
/// sweep is reproducible from (base_seed, trials) alone.
///

#include <cstdint>
#include <optional>
#include <vector>

#include "iff/driver.hpp"
#include "iff/signal_model.hpp"

namespace iff
{

/// Independent 64-bit seed for stream `stream` of trial `trial` (splitmix64).
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial, std::uint64_t stream);

/// Stacks the T (K+1) x (K+1) Hankel matrices of the full rows, takes the
/// n_est-dimensional signal subspace from the SVD of the stack and returns
/// the n_est largest MUSIC peaks in the window, sorted. Throws
/// InvalidArgument unless 1 <= n_est <= K.
std::vector<double> baseline_stacked_music(const MeasurementSet& y, int n_est,
                                           std::optional<SearchWindow> window = std::nullopt);

struct MatchOutcome
{
    bool success;
    double max_matched_error;
};

/// Success iff the counts agree and the sorted-order pairing has every error
/// below tau/2 (pi/Omega for a single source). max_matched_error is +inf on
/// a count mismatch.
MatchOutcome classify_success(const SourceModel& truth, const RecoveredSupport& recovered,
                              double omega);

/// Driver settings used by the sweeps: stride-5 decimation, the rest default.
IFFConfig experiment_iff_config();

struct PhaseTransitionRecord
{
    int trial;
    int n;
    double tau;
    double srf;
    double snr;
    double log_srf;
    double log_snr;
    bool success;
    int n_recovered;
    double max_matched_error;
};

struct PhaseTransitionConfig
{
    int trials = 300;
    int n = 4;
    int t_count = 10;
    int k_half = 25;
    double omega = 1.0;
    /// log10 SRF and log10 SNR are drawn uniformly from these ranges.
    double log_srf_lo = 0.0;
    double log_srf_hi = 1.0;
    double log_snr_lo = 0.0;
    double log_snr_hi = 9.0;
    IlluminationSpec illumination{UniformLaw{1.0, 2.7320508075688772}, 10};
    std::uint64_t base_seed = 20240501;
    IFFConfig iff = experiment_iff_config();
};

/// Separating line log_snr = slope * log_srf + intercept.
struct FittedLine
{
    double slope;
    double intercept;
    /// Fraction of all records on the wrong side of the line.
    double misclassification;
};

struct PhaseTransitionResult
{
    std::vector<PhaseTransitionRecord> records;
    /// Slope 2n - 1 (sufficient regime) and slope n (necessary regime).
    FittedLine upper;
    FittedLine lower;
};

/// One IFF run on n uniformly spaced unit sources at separation tau and
/// noise level sigma; the building block of every sweep.
PhaseTransitionRecord run_phase_trial(const PhaseTransitionConfig& cfg, int trial, double tau,
                                      double sigma);

PhaseTransitionResult run_phase_transition(const PhaseTransitionConfig& cfg);

/// Intercept minimising the number of successes below plus failures above a
/// line of the given slope.
FittedLine fit_separating_line(const std::vector<PhaseTransitionRecord>& records, double slope);

struct RegionRate
{
    int count;
    int successes;

    double rate() const { return count > 0 ? static_cast<double>(successes) / count : 0.0; }
};

/// Records strictly above (above = true) or below a line.
RegionRate region_rate(const std::vector<PhaseTransitionRecord>& records, const FittedLine& line,
                       bool above);

struct SnrLevelRate
{
    double snr;
    int trials;
    int successes;

    double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
    /// Binomial standard error sqrt(p (1 - p) / trials).
    double standard_error() const;
};

/// trials_per_level runs at SRF = srf for each SNR value.
std::vector<SnrLevelRate> run_fixed_srf_sweep(const PhaseTransitionConfig& cfg, double srf,
                                              const std::vector<double>& snrs,
                                              int trials_per_level);

struct ReconStatsConfig
{
    int trials = 300;
    int k_half = 25;
    double omega = 1.0;
    double sigma = 1e-4;
    std::vector<double> truth{-0.75, -0.25, 0.25, 0.75};
    IlluminationSpec illumination{UniformLaw{1.0, 2.7320508075688772}, 10};
    std::uint64_t base_seed = 20240501;
    IFFConfig iff = experiment_iff_config();
};

struct MethodMoments
{
    std::vector<double> mean;
    std::vector<double> variance;
    /// Trials entering the moments.
    int used = 0;
};

struct ReconStats
{
    MethodMoments iff;
    MethodMoments baseline;
    int trials = 0;
    /// IFF runs that ended with gamma above the stopping threshold.
    int non_converged = 0;
    /// Converged IFF runs whose support size differs from the truth.
    int count_mismatch = 0;
};

/// Fixed four-source scenario; IFF moments use converged runs with the right
/// source count, baseline moments use every trial.
ReconStats run_recon_stats(const ReconStatsConfig& cfg);

} // namespace iff

#endif
