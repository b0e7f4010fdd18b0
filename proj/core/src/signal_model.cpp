#include "iff/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "iff/errors.hpp"

namespace iff
{

SamplingGrid::SamplingGrid(double omega, int k_half) : omega_(omega), k_half_(k_half)
{
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw InvalidArgument("SamplingGrid: cutoff frequency must be positive, got " +
                              std::to_string(omega));
    if (k_half < 1)
        throw InvalidArgument("SamplingGrid: K must be >= 1, got " + std::to_string(k_half));
}

double SamplingGrid::rayleigh() const noexcept { return std::numbers::pi / omega_; }

Eigen::VectorXd SamplingGrid::nodes() const
{
    Eigen::VectorXd w(size());
    for (int i = 0; i < size(); ++i)
        w[i] = node_at(i);
    return w;
}

SamplingGrid make_grid(double omega, int k_half) { return SamplingGrid(omega, k_half); }

SourceModel::SourceModel(std::vector<PointSource> sources) : sources_(std::move(sources))
{
    if (sources_.empty())
        throw InvalidArgument("SourceModel: at least one source is required");
    for (std::size_t p = 0; p < sources_.size(); ++p)
    {
        if (!std::isfinite(sources_[p].position))
            throw InvalidArgument("SourceModel: non-finite position");
        for (std::size_t q = 0; q < p; ++q)
            if (sources_[p].position == sources_[q].position)
                throw InvalidArgument("SourceModel: positions must be pairwise distinct");
    }
}

SourceModel::SourceModel(std::span<const double> positions, std::span<const cplx> amplitudes)
{
    if (positions.size() != amplitudes.size())
        throw DimensionMismatch("SourceModel: positions and amplitudes differ in length");
    std::vector<PointSource> s;
    s.reserve(positions.size());
    for (std::size_t j = 0; j < positions.size(); ++j)
        s.push_back({positions[j], amplitudes[j]});
    *this = SourceModel(std::move(s));
}

std::vector<double> SourceModel::positions() const
{
    std::vector<double> y;
    y.reserve(sources_.size());
    for (const auto& s : sources_)
        y.push_back(s.position);
    return y;
}

std::vector<cplx> SourceModel::amplitudes() const
{
    std::vector<cplx> a;
    a.reserve(sources_.size());
    for (const auto& s : sources_)
        a.push_back(s.amplitude);
    return a;
}

double SourceModel::min_separation() const
{
    auto y = positions();
    std::sort(y.begin(), y.end());
    double tau = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < y.size(); ++i)
        tau = std::min(tau, y[i] - y[i - 1]);
    return tau;
}

double SourceModel::min_amplitude() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : sources_)
        m = std::min(m, std::abs(s.amplitude));
    return m;
}

bool SourceModel::within_theory_window(double omega) const
{
    const double half = std::numbers::pi / (2.0 * omega);
    return std::all_of(sources_.begin(), sources_.end(), [half](const PointSource& s) {
        return std::abs(s.position) <= half;
    });
}

SourceModel uniformly_spaced_sources(int n, double separation, cplx amplitude)
{
    if (n < 1 || !(separation > 0.0))
        throw InvalidArgument("uniformly_spaced_sources: need n >= 1 and positive separation");
    std::vector<PointSource> s;
    s.reserve(n);
    for (int j = 0; j < n; ++j)
        s.push_back({(j - 0.5 * (n - 1)) * separation, amplitude});
    return SourceModel(std::move(s));
}

double IlluminationSpec::mean() const
{
    return std::visit(
        [](const auto& law) -> double {
            using L = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<L, UniformLaw>)
                return 0.5 * (law.lo + law.hi);
            else
                return law.mean;
        },
        law);
}

double IlluminationSpec::variance() const
{
    return std::visit(
        [](const auto& law) -> double {
            using L = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<L, UniformLaw>)
                return (law.hi - law.lo) * (law.hi - law.lo) / 12.0;
            else
                return law.variance;
        },
        law);
}

IlluminationMatrix draw_illumination(const IlluminationSpec& spec, int n, std::uint64_t seed)
{
    if (n < 1)
        throw InvalidArgument("draw_illumination: n must be >= 1");
    if (spec.t_count < n)
        throw InsufficientMeasurements("draw_illumination: T=" + std::to_string(spec.t_count) +
                                       " patterns for n=" + std::to_string(n) + " sources");

    std::mt19937_64 rng(seed);
    IlluminationMatrix L{Eigen::MatrixXd(spec.t_count, n)};
    std::visit(
        [&](const auto& law) {
            using Law = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<Law, UniformLaw>)
            {
                if (!(law.hi > law.lo))
                    throw InvalidArgument("draw_illumination: uniform law needs lo < hi");
                std::uniform_real_distribution<double> dist(law.lo, law.hi);
                for (int t = 0; t < spec.t_count; ++t)
                    for (int j = 0; j < n; ++j)
                        L.values(t, j) = dist(rng);
            }
            else
            {
                if (!(law.variance >= 0.0))
                    throw InvalidArgument("draw_illumination: negative variance");
                std::normal_distribution<double> dist(law.mean, std::sqrt(law.variance));
                for (int t = 0; t < spec.t_count; ++t)
                    for (int j = 0; j < n; ++j)
                        L.values(t, j) = dist(rng);
            }
        },
        spec.law);
    return L;
}

MeasurementSet synthesize(const SourceModel& sources, const IlluminationMatrix& L,
                          const SamplingGrid& grid)
{
    if (L.n_sources() != sources.size())
        throw DimensionMismatch("synthesize: illumination has " + std::to_string(L.n_sources()) +
                                " columns for " + std::to_string(sources.size()) + " sources");

    const auto y = sources.positions();
    const auto a = sources.amplitudes();
    // E[j][k] = exp(i y_j w_k); Y = L diag(a) E
    Eigen::MatrixXcd AE(sources.size(), grid.size());
    for (int j = 0; j < sources.size(); ++j)
        for (int k = 0; k < grid.size(); ++k)
            AE(j, k) = a[j] * std::polar(1.0, y[j] * grid.node_at(k));
    return MeasurementSet{L.values.cast<cplx>() * AE, grid};
}

Eigen::MatrixXcd draw_noise(const NoiseSpec& spec, int t_count, const SamplingGrid& grid)
{
    if (!(spec.sigma >= 0.0))
        throw InvalidArgument("draw_noise: sigma must be non-negative");
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(t_count, grid.size());
    if (spec.sigma == 0.0)
        return w;

    std::mt19937_64 rng(spec.seed);
    const double half = spec.sigma / std::numbers::sqrt2;
    std::uniform_real_distribution<double> dist(-half, half);
    for (int t = 0; t < t_count; ++t)
        for (int k = 0; k < grid.size(); ++k)
        {
            // the square corner reaches modulus sigma only on a measure-zero set
            cplx z;
            do
                z = cplx(dist(rng), dist(rng));
            while (!(std::abs(z) < spec.sigma));
            w(t, k) = z;
        }
    return w;
}

MeasurementSet add_noise(MeasurementSet y, const Eigen::MatrixXcd& noise)
{
    if (noise.rows() != y.data.rows() || noise.cols() != y.data.cols())
        throw DimensionMismatch("add_noise: noise shape differs from measurement shape");
    y.data += noise;
    return y;
}

Eigen::MatrixXcd vandermonde_row(std::span<const double> support, const SamplingGrid& grid)
{
    Eigen::MatrixXcd V(grid.size(), static_cast<Eigen::Index>(support.size()));
    for (Eigen::Index p = 0; p < V.cols(); ++p)
        for (int k = 0; k < grid.size(); ++k)
            V(k, p) = std::polar(1.0, support[p] * grid.node_at(k));
    return V;
}

double snr_of(const SourceModel& sources, double sigma)
{
    if (sigma < 0.0)
        throw InvalidArgument("snr_of: negative noise level");
    if (sigma == 0.0)
        return std::numeric_limits<double>::infinity();
    return sources.min_amplitude() / sigma;
}

} // namespace iff
