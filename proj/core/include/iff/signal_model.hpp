#ifndef IFF_SIGNAL_MODEL_HPP
#define IFF_SIGNAL_MODEL_HPP

///
/// \file signal_model.hpp
///
/// Ground-truth sources, illumination patterns, bounded noise and the sampled
/// multi-measurement data
///
///   Y = L A E + W,   Y[t][k] = sum_j L[t][j] a_j exp(i y_j w_k) + W[t][k],
///
/// on the uniform grid w_k = (k/K) Omega, k = -K..K.
///

#include <complex>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "iff/types.hpp"

namespace iff
{

/// Uniform frequency grid w_k = (k/K) Omega, k = -K..K.
class SamplingGrid
{
public:
    SamplingGrid(double omega, int k_half);

    double omega() const noexcept { return omega_; }
    int k_half() const noexcept { return k_half_; }
    /// Number of nodes, 2K+1.
    int size() const noexcept { return 2 * k_half_ + 1; }
    /// Node spacing Omega/K.
    double step() const noexcept { return omega_ / k_half_; }
    /// Node w_k for k in [-K, K].
    double node(int k) const noexcept { return k * omega_ / k_half_; }
    /// Node at zero-based column index i (i = 0 is w_{-K}).
    double node_at(int i) const noexcept { return node(i - k_half_); }
    /// Rayleigh length pi/Omega.
    double rayleigh() const noexcept;

    Eigen::VectorXd nodes() const;

    friend bool operator==(const SamplingGrid&, const SamplingGrid&) = default;

private:
    double omega_;
    int k_half_;
};

SamplingGrid make_grid(double omega, int k_half);

struct PointSource
{
    double position;
    cplx amplitude;
};

/// mu = sum_j a_j delta_{y_j} with pairwise distinct positions.
class SourceModel
{
public:
    SourceModel() = default;
    explicit SourceModel(std::vector<PointSource> sources);
    SourceModel(std::span<const double> positions, std::span<const cplx> amplitudes);

    int size() const noexcept { return static_cast<int>(sources_.size()); }
    const std::vector<PointSource>& sources() const noexcept { return sources_; }
    std::vector<double> positions() const;
    std::vector<cplx> amplitudes() const;

    /// tau = min_{p != q} |y_p - y_q|; +inf for a single source.
    double min_separation() const;
    /// min_j |a_j|.
    double min_amplitude() const;
    /// True when every position lies in [-pi/(2 Omega), pi/(2 Omega)].
    bool within_theory_window(double omega) const;

private:
    std::vector<PointSource> sources_;
};

/// n sources of equal amplitude, uniformly spaced by `separation`, centred on 0.
SourceModel uniformly_spaced_sources(int n, double separation, cplx amplitude = 1.0);

struct UniformLaw
{
    double lo;
    double hi;
};

struct GaussianLaw
{
    double mean;
    double variance;
};

/// Law of the i.i.d. illumination entries plus the pattern count T.
struct IlluminationSpec
{
    std::variant<UniformLaw, GaussianLaw> law;
    int t_count;

    /// Entry mean u.
    double mean() const;
    /// Entry variance v^2.
    double variance() const;
};

/// T x n real matrix L with L[t][j] = I_t(y_j).
struct IlluminationMatrix
{
    Eigen::MatrixXd values;

    int t_count() const noexcept { return static_cast<int>(values.rows()); }
    int n_sources() const noexcept { return static_cast<int>(values.cols()); }
};

IlluminationMatrix draw_illumination(const IlluminationSpec& spec, int n,
                                     std::uint64_t seed);

struct NoiseSpec
{
    double sigma;
    std::uint64_t seed;
};

/// T x (2K+1) complex samples on a grid.
struct MeasurementSet
{
    Eigen::MatrixXcd data;
    SamplingGrid grid;

    int t_count() const noexcept { return static_cast<int>(data.rows()); }
};

/// Noiseless Y = L A E.
MeasurementSet synthesize(const SourceModel& sources, const IlluminationMatrix& L,
                          const SamplingGrid& grid);

/// Noise with real and imaginary parts i.i.d. uniform on (-sigma/sqrt2, sigma/sqrt2);
/// every entry has modulus strictly below sigma.
Eigen::MatrixXcd draw_noise(const NoiseSpec& spec, int t_count, const SamplingGrid& grid);

/// Y + W; shapes must agree.
MeasurementSet add_noise(MeasurementSet y, const Eigen::MatrixXcd& noise);

/// (2K+1) x m matrix whose column p is (exp(i y_p w_k))_{k=-K..K}.
Eigen::MatrixXcd vandermonde_row(std::span<const double> support, const SamplingGrid& grid);

/// m_min / sigma; +inf when sigma == 0.
double snr_of(const SourceModel& sources, double sigma);

} // namespace iff

#endif
