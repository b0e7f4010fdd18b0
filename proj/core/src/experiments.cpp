#include "iff/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/SVD>

#include "iff/errors.hpp"
#include "iff/hankel_focus.hpp"

namespace iff
{

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial, std::uint64_t stream)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base_seed) ^ trial) ^ stream);
}

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

namespace
{

// |B^* phi(y)|^2 / m with derivatives, phi_i = exp(i y (i - centre) h).
struct SubspaceFit
{
    double c, dc, d2c;
};

SubspaceFit subspace_fit(const Eigen::MatrixXcd& basis, double spacing, double y)
{
    const auto m = basis.rows();
    const double centre = 0.5 * static_cast<double>(m - 1);
    Eigen::VectorXcd phi(m), dphi(m), d2phi(m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        const double w = (static_cast<double>(i) - centre) * spacing;
        phi[i] = std::polar(1.0, y * w);
        dphi[i] = cplx(0.0, w) * phi[i];
        d2phi[i] = -w * w * phi[i];
    }
    const Eigen::VectorXcd s = basis.adjoint() * phi;
    const Eigen::VectorXcd ds = basis.adjoint() * dphi;
    const Eigen::VectorXcd d2s = basis.adjoint() * d2phi;
    const double md = static_cast<double>(m);
    return {s.squaredNorm() / md, 2.0 * s.dot(ds).real() / md,
            2.0 * (ds.squaredNorm() + s.dot(d2s).real()) / md};
}

double refine_peak(const Eigen::MatrixXcd& basis, double spacing, double lo, double hi)
{
    constexpr double inv_phi = 0.6180339887498949;
    const double tol = 1e-10 * (hi - lo);
    auto c = [&](double y) { return subspace_fit(basis, spacing, y).c; };
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = c(x1), f2 = c(x2);
    while (b - a > tol)
    {
        if (f1 < f2)
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = c(x2);
        }
        else
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = c(x1);
        }
    }
    double y = 0.5 * (a + b);
    for (int k = 0; k < 4; ++k)
    {
        const SubspaceFit f = subspace_fit(basis, spacing, y);
        if (!(f.d2c < 0.0))
            break;
        const double next = y - f.dc / f.d2c;
        if (next < lo || next > hi || next == y || c(next) < f.c)
            break;
        y = next;
    }
    return y;
}

} // namespace

std::vector<double> baseline_stacked_music(const MeasurementSet& y, int n_est,
                                           std::optional<SearchWindow> window)
{
    const int k = y.grid.k_half();
    if (n_est < 1 || n_est > k)
        throw InvalidArgument("baseline_stacked_music: need 1 <= n_est <= K");
    if (y.data.cols() != y.grid.size())
        throw DimensionMismatch("baseline_stacked_music: data width does not match the grid");

    const int m = k + 1;
    Eigen::MatrixXcd stacked(static_cast<Eigen::Index>(y.t_count()) * m, m);
    for (int t = 0; t < y.t_count(); ++t)
        stacked.middleRows(static_cast<Eigen::Index>(t) * m, m) =
            build_hankel(y.data.row(t).transpose()).matrix();

    // right singular vectors span conj(phi(y_j)) for the sources
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeThinV);
    const Eigen::MatrixXcd basis = svd.matrixV().leftCols(n_est).conjugate();

    const double spacing = y.grid.step();
    const SearchWindow win =
        window ? *window
               : safe_window(std::numbers::pi / y.grid.omega(), spacing);
    const int coarse = default_coarse_points(win, y.grid.omega());
    const double dy = win.width() / (coarse - 1);

    std::vector<double> values(coarse);
    for (int i = 0; i < coarse; ++i)
        values[i] = subspace_fit(basis, spacing, win.lo + i * dy).c;

    std::vector<int> peaks;
    for (int i = 1; i + 1 < coarse; ++i)
        if (values[i] >= values[i - 1] && values[i] > values[i + 1])
            peaks.push_back(i);
    std::stable_sort(peaks.begin(), peaks.end(),
                     [&](int a, int b) { return values[a] > values[b]; });
    if (static_cast<int>(peaks.size()) > n_est)
        peaks.resize(n_est);

    std::vector<double> out;
    out.reserve(peaks.size());
    for (int i : peaks)
        out.push_back(refine_peak(basis, spacing, win.lo + (i - 1) * dy, win.lo + (i + 1) * dy));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// success rule
// ---------------------------------------------------------------------------

MatchOutcome classify_success(const SourceModel& truth, const RecoveredSupport& recovered,
                              double omega)
{
    if (truth.size() != recovered.size())
        return {false, std::numeric_limits<double>::infinity()};
    if (truth.size() == 0)
        return {true, 0.0};

    std::vector<double> pos = truth.positions();
    std::sort(pos.begin(), pos.end());
    const double radius = truth.size() > 1 ? 0.5 * truth.min_separation()
                                           : std::numbers::pi / omega;
    double worst = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i)
        worst = std::max(worst, std::abs(pos[i] - recovered.positions()[i]));
    return {worst < radius, worst};
}

// ---------------------------------------------------------------------------
// phase transition
// ---------------------------------------------------------------------------

IFFConfig experiment_iff_config()
{
    IFFConfig cfg;
    cfg.subsample_stride = 5;
    return cfg;
}

namespace
{

enum Stream : std::uint64_t
{
    kIllumination = 0,
    kNoise = 1,
    kParameters = 2,
};

} // namespace

PhaseTransitionRecord run_phase_trial(const PhaseTransitionConfig& cfg, int trial, double tau,
                                      double sigma)
{
    if (!(tau > 0.0) || !(sigma > 0.0))
        throw InvalidArgument("run_phase_trial: tau and sigma must be positive");

    const SamplingGrid grid(cfg.omega, cfg.k_half);
    const SourceModel truth = uniformly_spaced_sources(cfg.n, tau);
    IlluminationSpec law = cfg.illumination;
    law.t_count = cfg.t_count;

    const auto id = static_cast<std::uint64_t>(trial);
    const IlluminationMatrix L = draw_illumination(law, cfg.n, trial_seed(cfg.base_seed, id, kIllumination));
    const MeasurementSet y = add_noise(
        synthesize(truth, L, grid),
        draw_noise({sigma, trial_seed(cfg.base_seed, id, kNoise)}, cfg.t_count, grid));

    PhaseTransitionRecord rec{};
    rec.trial = trial;
    rec.n = cfg.n;
    rec.tau = tau;
    rec.srf = std::numbers::pi / (cfg.omega * tau);
    rec.snr = snr_of(truth, sigma);
    rec.log_srf = std::log10(rec.srf);
    rec.log_snr = std::log10(rec.snr);

    IFFConfig icfg = cfg.iff;
    if (!icfg.snr)
        icfg.snr = rec.snr;
    if (!icfg.search_half_width)
    {
        // the sources span (n - 1) tau; keep half a Rayleigh length beyond
        const double rayleigh = std::numbers::pi / cfg.omega;
        icfg.search_half_width = std::max(rayleigh, 0.5 * (cfg.n - 1) * tau + 0.5 * rayleigh);
    }

    try
    {
        const IFFResult res = run_iff(y, sigma, icfg);
        const MatchOutcome m = classify_success(truth, res.support, cfg.omega);
        rec.success = m.success;
        rec.n_recovered = res.support.size();
        rec.max_matched_error = m.max_matched_error;
    }
    catch (const std::exception&)
    {
        rec.success = false;
        rec.n_recovered = 0;
        rec.max_matched_error = std::numeric_limits<double>::infinity();
    }
    return rec;
}

PhaseTransitionResult run_phase_transition(const PhaseTransitionConfig& cfg)
{
    if (cfg.trials < 1)
        throw InvalidArgument("run_phase_transition: trials must be >= 1");
    if (cfg.n < 1 || cfg.t_count < cfg.n)
        throw InvalidArgument("run_phase_transition: need 1 <= n <= t_count");
    if (!(cfg.log_srf_hi >= cfg.log_srf_lo) || !(cfg.log_snr_hi >= cfg.log_snr_lo))
        throw InvalidArgument("run_phase_transition: empty parameter range");

    PhaseTransitionResult out;
    out.records.reserve(cfg.trials);
    for (int i = 0; i < cfg.trials; ++i)
    {
        std::mt19937_64 rng(trial_seed(cfg.base_seed, static_cast<std::uint64_t>(i), kParameters));
        std::uniform_real_distribution<double> srf_law(cfg.log_srf_lo, cfg.log_srf_hi);
        std::uniform_real_distribution<double> snr_law(cfg.log_snr_lo, cfg.log_snr_hi);
        const double log_srf = srf_law(rng);
        const double log_snr = snr_law(rng);
        const double tau = std::numbers::pi / (cfg.omega * std::pow(10.0, log_srf));
        // unit amplitudes, so SNR = 1 / sigma
        const double sigma = std::pow(10.0, -log_snr);
        out.records.push_back(run_phase_trial(cfg, i, tau, sigma));
    }
    out.upper = fit_separating_line(out.records, 2.0 * cfg.n - 1.0);
    out.lower = fit_separating_line(out.records, static_cast<double>(cfg.n));
    return out;
}

FittedLine fit_separating_line(const std::vector<PhaseTransitionRecord>& records, double slope)
{
    if (records.empty())
        return {slope, 0.0, 0.0};

    struct Point
    {
        double c;
        bool success;
    };
    std::vector<Point> pts;
    pts.reserve(records.size());
    for (const auto& r : records)
        pts.push_back({r.log_snr - slope * r.log_srf, r.success});
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.c < b.c; });

    // line below every point: all failures are misclassified
    int wrong = 0;
    for (const auto& p : pts)
        wrong += p.success ? 0 : 1;
    int best = wrong;
    double intercept = pts.front().c - 1.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
        // move the line just above point i
        wrong += pts[i].success ? 1 : -1;
        if (i + 1 < pts.size() && pts[i + 1].c == pts[i].c)
            continue;
        if (wrong < best)
        {
            best = wrong;
            intercept = i + 1 < pts.size() ? 0.5 * (pts[i].c + pts[i + 1].c) : pts[i].c + 1.0;
        }
    }
    return {slope, intercept, static_cast<double>(best) / static_cast<double>(pts.size())};
}

RegionRate region_rate(const std::vector<PhaseTransitionRecord>& records, const FittedLine& line,
                       bool above)
{
    RegionRate out{0, 0};
    for (const auto& r : records)
    {
        const double c = r.log_snr - line.slope * r.log_srf;
        if (above ? c > line.intercept : c < line.intercept)
        {
            ++out.count;
            out.successes += r.success ? 1 : 0;
        }
    }
    return out;
}

double SnrLevelRate::standard_error() const
{
    if (trials <= 0)
        return 0.0;
    const double p = rate();
    return std::sqrt(p * (1.0 - p) / trials);
}

std::vector<SnrLevelRate> run_fixed_srf_sweep(const PhaseTransitionConfig& cfg, double srf,
                                              const std::vector<double>& snrs,
                                              int trials_per_level)
{
    if (!(srf > 0.0) || trials_per_level < 1)
        throw InvalidArgument("run_fixed_srf_sweep: srf and trial count must be positive");
    const double tau = std::numbers::pi / (cfg.omega * srf);
    std::vector<SnrLevelRate> out;
    for (std::size_t level = 0; level < snrs.size(); ++level)
    {
        if (!(snrs[level] > 0.0))
            throw InvalidArgument("run_fixed_srf_sweep: snr must be positive");
        SnrLevelRate rate{snrs[level], trials_per_level, 0};
        for (int i = 0; i < trials_per_level; ++i)
        {
            const int trial = static_cast<int>(level) * trials_per_level + i;
            rate.successes += run_phase_trial(cfg, trial, tau, 1.0 / snrs[level]).success ? 1 : 0;
        }
        out.push_back(rate);
    }
    return out;
}

// ---------------------------------------------------------------------------
// reconstruction statistics
// ---------------------------------------------------------------------------

namespace
{

class MomentAccumulator
{
public:
    explicit MomentAccumulator(std::size_t n) : sum_(n, 0.0), sq_(n, 0.0) {}

    void add(const std::vector<double>& x)
    {
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            sum_[i] += x[i];
            sq_[i] += x[i] * x[i];
        }
        ++count_;
    }

    MethodMoments finish() const
    {
        MethodMoments m;
        m.used = count_;
        const auto n = sum_.size();
        m.mean.assign(n, std::numeric_limits<double>::quiet_NaN());
        m.variance.assign(n, std::numeric_limits<double>::quiet_NaN());
        if (count_ == 0)
            return m;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double mean = sum_[i] / count_;
            m.mean[i] = mean;
            m.variance[i] = std::max(0.0, sq_[i] / count_ - mean * mean);
        }
        return m;
    }

private:
    std::vector<double> sum_;
    std::vector<double> sq_;
    int count_ = 0;
};

} // namespace

ReconStats run_recon_stats(const ReconStatsConfig& cfg)
{
    if (cfg.trials < 1)
        throw InvalidArgument("run_recon_stats: trials must be >= 1");
    const int n = static_cast<int>(cfg.truth.size());
    if (n < 1)
        throw InvalidArgument("run_recon_stats: empty truth");

    const SamplingGrid grid(cfg.omega, cfg.k_half);
    const std::vector<cplx> amps(cfg.truth.size(), 1.0);
    const SourceModel truth(cfg.truth, amps);
    std::vector<double> sorted_truth = cfg.truth;
    std::sort(sorted_truth.begin(), sorted_truth.end());

    IFFConfig icfg = cfg.iff;
    if (!icfg.snr)
        icfg.snr = snr_of(truth, cfg.sigma);

    MomentAccumulator iff_acc(cfg.truth.size()), base_acc(cfg.truth.size());
    ReconStats stats;
    stats.trials = cfg.trials;
    for (int i = 0; i < cfg.trials; ++i)
    {
        const auto id = static_cast<std::uint64_t>(i);
        const IlluminationMatrix L =
            draw_illumination(cfg.illumination, n, trial_seed(cfg.base_seed, id, kIllumination));
        const MeasurementSet y =
            add_noise(synthesize(truth, L, grid),
                      draw_noise({cfg.sigma, trial_seed(cfg.base_seed, id, kNoise)},
                                 cfg.illumination.t_count, grid));

        const IFFResult res = run_iff(y, cfg.sigma, icfg);
        if (!res.converged)
            ++stats.non_converged;
        else if (res.support.size() != n)
            ++stats.count_mismatch;
        else
            iff_acc.add(res.support.positions());

        const std::vector<double> base = baseline_stacked_music(y, n);
        if (static_cast<int>(base.size()) == n)
            base_acc.add(base);
    }
    stats.iff = iff_acc.finish();
    stats.baseline = base_acc.finish();
    return stats;
}

} // namespace iff
