#ifndef IFF_DRIVER_HPP
#define IFF_DRIVER_HPP

///
/// \file driver.hpp
///
/// The outer focusing/filtering loop. Each outer iteration
///
///  1. decimates the raw rows by `subsample_stride`,
///  2. removes every source found so far with an annihilating filter,
///  3. forms s x s Hankel matrices from the filtered rows,
///  4. runs multi-start focusing and localisation on them,
///  5. merges the new positions into the support and recomputes the residual
///
///       gamma = max_t min_a || V(S) a - Y_t ||_2,
///
/// stopping once gamma < sqrt(2K+1) sigma, or when an iteration finds nothing
/// new or fails to reduce gamma (that iteration is then rolled back). A merged
/// support that falls short of the threshold is refined by least squares, and
/// after convergence points the residual does not need are pruned.
///

#include <optional>
#include <string>
#include <vector>

#include "iff/localize.hpp"
#include "iff/signal_model.hpp"

namespace iff
{

struct IFFConfig
{
    /// Focusing tolerance; default_tolerance(snr) when unset.
    std::optional<double> eps;
    /// Order-one constant C in the per-iteration noise update.
    double c_noise = 1.0;
    /// Prior cluster distance d; pi/(2 Omega) when unset, then the smallest
    /// gap of the recovered support once it has two points.
    std::optional<double> d_prior;
    /// Merge radius; pi/(10 Omega) when unset.
    std::optional<double> cluster_radius;
    int max_outer_iters = 8;
    int subsample_stride = 1;
    /// Target Hankel size s; largest feasible odd size when unset.
    std::optional<int> hankel_half;
    /// SNR for the clean-up threshold; estimated from the data when unset.
    std::optional<double> snr;
    std::optional<double> gamma_override;
    /// MUSIC half window; one Rayleigh length pi/Omega when unset (always
    /// clipped to the aliasing period of the decimated grid).
    std::optional<double> search_half_width;
    int max_optimizer_iters = 500;
    /// An iteration is kept only if it lowers the residual by at least this
    /// many noise floors sqrt(2K+1) sigma (and never raises it); otherwise
    /// the loop stops with the previous support.
    double min_residual_gain = 1.0;
    /// Least-squares refinement of the merged support, kept only when it
    /// brings the residual below the stopping threshold.
    bool refine_positions = true;
    /// After convergence, drop points whose removal (with refinement) keeps
    /// the residual below the stopping threshold.
    bool prune_support = true;
};

/// Residual of the best least-squares fit of every row on the support.
/// Empty support gives max_t ||Y_t||_2. Throws RankDeficient for duplicate
/// support points.
double residual_gamma(std::span<const double> support, const MeasurementSet& y);
double residual_gamma(const RecoveredSupport& support, const MeasurementSet& y);

/// Gauss-Newton with Levenberg damping on sum_t min_a ||V(S) a - Y_t||^2 over
/// the positions S, each point moving at most max_shift from its start.
/// Returns the input when no step lowers the sum.
std::vector<double> refine_support(std::span<const double> support, const MeasurementSet& y,
                                   double max_shift, int max_iters = 30);

/// Greedy backward elimination: while some point can be removed (and the rest
/// refined) with residual_gamma below threshold, removes the one leaving the
/// smallest residual.
std::vector<double> prune_support(std::vector<double> support, const MeasurementSet& y,
                                  double threshold, double max_shift);

/// sqrt(2K+1) sigma.
double stopping_threshold(const SamplingGrid& grid, double sigma);

/// C (step / d)^P sigma, with step the sample spacing the filter acts on.
double noise_update(double sigma, double step, double d_prior, int p_count, double c_noise);
double noise_update(double sigma, const SamplingGrid& grid, double d_prior, int p_count,
                    double c_noise);

struct SubsamplePlan
{
    /// 2s - 1 indices into the row, uniformly strided.
    std::vector<int> indices;
    /// Hankel size s.
    int hankel_size;
    /// stride * base_step.
    double spacing;
};

/// Picks s = min(target, largest odd s with 2s - 1 <= number of strided
/// samples) and the first 2s - 1 strided indices. Throws InsufficientSamples
/// when s < 2 and InvalidArgument for available_len < 3 or stride < 1.
SubsamplePlan subsample_plan(int available_len, std::optional<int> target_hankel, int stride,
                             double base_step = 1.0);

/// Centred decimation of the full grid: indices offset + i * stride covering
/// as many nodes as fit, symmetric about w_0 when the count allows.
std::vector<int> decimation_indices(const SamplingGrid& grid, int stride);

/// Data-driven SNR proxy: min over rows of ||Y_t||_2 / sqrt(2K+1), divided by sigma.
double estimate_snr(const MeasurementSet& y, double sigma);

struct IterationRecord
{
    std::vector<double> support_before;
    int filter_degree;
    int hankel_size;
    double spacing;
    double sigma_r;
    double snr_r;
    double gamma_threshold;
    std::vector<double> new_positions;
    std::vector<double> focus_values;
    std::vector<double> candidate_positions;
    double residual;
};

struct IFFResult
{
    RecoveredSupport support;
    double gamma_final;
    bool converged;
    std::vector<IterationRecord> trace;
    std::string diagnostic;
};

IFFResult run_iff(const MeasurementSet& y, double sigma, const IFFConfig& cfg = {});

} // namespace iff

#endif
