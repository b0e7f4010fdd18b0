#ifndef IFF_LOCALIZE_HPP
#define IFF_LOCALIZE_HPP

///
/// \file localize.hpp
///
/// Source focusing and localisation: multi-start minimisation of the
/// trace-ratio objective, single-source MUSIC on each focused Hankel matrix,
/// threshold clean-up and cluster averaging.
///

#include <optional>
#include <span>
#include <vector>

#include "iff/hankel_focus.hpp"

namespace iff
{

struct SearchWindow
{
    double lo;
    double hi;

    double width() const noexcept { return hi - lo; }
};

/// Symmetric window [-half_width, half_width] shrunk, if needed, to lie
/// strictly inside one aliasing period 2 pi / spacing.
SearchWindow safe_window(double half_width, double spacing);

/// 2048 coarse points per Rayleigh length pi/omega across the window.
int default_coarse_points(const SearchWindow& window, double omega);

/// max(1e-30, 1e-2/snr^2).
double default_tolerance(double snr);

struct OptimizeOptions
{
    double eps = 1e-10;
    int max_iters = 500;
    /// Stop once f - 1 improves by less than this relative amount over
    /// several consecutive iterations.
    double stall_tol = 1e-14;
    int max_restarts = 3;
};

struct FocusOptimum
{
    FocusCoefficients q;
    double f;
    /// f - 1 without the rounding of f itself.
    double excess;
    int iterations;
    /// f - 1 < eps at exit.
    bool reached_tolerance;
};

/// BFGS with analytic gradient and Armijo backtracking from q0. A degenerate
/// start is perturbed and retried up to options.max_restarts times before
/// DegenerateCombination is thrown.
FocusOptimum optimize_focus(const HankelStack& stack, const FocusCoefficients& q0,
                            const OptimizeOptions& options = {});

/// MUSIC imaging function ||phi(y)|| / ||(I - u u^*) phi(y)|| for the top left
/// singular vector u of h, with phi(y)_i = exp(i y (origin + i spacing)).
class SingleSourceImaging
{
public:
    SingleSourceImaging(const HankelMatrix& h, double spacing, double origin = 0.0);

    double operator()(double y) const;
    /// |u^* phi(y)|^2 / ||phi||^2 in [0, 1]; monotone in the imaging function.
    double coherence(double y) const;

    const Eigen::VectorXcd& top_vector() const noexcept { return u_; }
    double spacing() const noexcept { return spacing_; }
    double origin() const noexcept { return origin_; }

private:
    Eigen::VectorXcd u_;
    double spacing_;
    double origin_;
};

/// Coarse scan of the imaging function followed by golden-section refinement
/// to 1e-10 of the window width. Throws InvalidArgument for an empty window
/// and DegenerateCombination for a zero matrix.
double music_localize_single(const HankelMatrix& h, double spacing, const SearchWindow& window,
                             int coarse_points, double origin = 0.0);

/// (1 + 4K / snr^2)^2.
double gamma_threshold(double snr, int k_half);

struct FocusOutcome
{
    FocusCoefficients q_final;
    double f_value;
    double position;
    int start_index;
};

struct CleanupConfig
{
    double snr;
    /// Hankel size minus one.
    int k_half;
    std::optional<double> gamma_override;
    double cluster_radius;

    double gamma() const;
};

/// Keeps outcomes with f_value <= gamma, in input order.
std::vector<FocusOutcome> clean_up(std::span<const FocusOutcome> outcomes, double gamma);

/// Sorted, strictly increasing positions.
class RecoveredSupport
{
public:
    RecoveredSupport() = default;
    explicit RecoveredSupport(std::vector<double> positions);

    const std::vector<double>& positions() const noexcept { return positions_; }
    int size() const noexcept { return static_cast<int>(positions_.size()); }
    bool empty() const noexcept { return positions_.empty(); }

private:
    std::vector<double> positions_;
};

/// Single-linkage clustering: sort, split at gaps larger than radius, return
/// per-cluster means.
RecoveredSupport cluster_average(std::span<const double> positions, double radius);

struct LocalizeOptions
{
    OptimizeOptions optimizer;
    SearchWindow window;
    int coarse_points;
};

struct LocalizeResult
{
    RecoveredSupport support;
    std::vector<FocusOutcome> outcomes;
    std::vector<FocusOutcome> retained;
    double gamma;
    /// Starts that failed on a degenerate combination.
    int failed_starts = 0;
    /// Outcomes whose MUSIC maximum sat on the window boundary.
    int edge_rejects = 0;
};

/// One focusing start per unit vector e_1..e_T, MUSIC on each focused matrix,
/// clean-up with cfg.gamma() and cluster averaging at cfg.cluster_radius.
/// Outcomes localised within one coarse step of the window boundary are
/// dropped before clean-up.
LocalizeResult algorithm1(const HankelStack& stack, const LocalizeOptions& options,
                          const CleanupConfig& cfg);

} // namespace iff

#endif
