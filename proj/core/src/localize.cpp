#include "iff/localize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "iff/errors.hpp"

namespace iff
{

SearchWindow safe_window(double half_width, double spacing)
{
    if (!(half_width > 0.0) || !(spacing > 0.0))
        throw InvalidArgument("safe_window: half width and spacing must be positive");
    // one aliasing period is 2 pi / spacing; keep a margin so the two ends
    // of the window never alias onto each other
    const double alias_half = 0.999 * std::numbers::pi / spacing;
    const double w = std::min(half_width, alias_half);
    return {-w, w};
}

int default_coarse_points(const SearchWindow& window, double omega)
{
    const double rayleigh = std::numbers::pi / omega;
    return std::max(16, static_cast<int>(std::ceil(2048.0 * window.width() / rayleigh)));
}

double default_tolerance(double snr)
{
    if (!(snr > 0.0))
        throw InvalidArgument("default_tolerance: snr must be positive");
    return std::max(1e-30, 1e-2 / (snr * snr));
}

// ---------------------------------------------------------------------------
// optimize_focus
// ---------------------------------------------------------------------------

namespace
{

// The iteration runs on phi(q) = log(f(q) - 1). It has the same minimisers
// as f, but f - 1 spans many decades between a generic combination and a
// focused one and the logarithm keeps the quasi-Newton model well scaled.
struct LogEval
{
    bool ok;
    double excess; // f - 1
    double phi;
    Eigen::VectorXd grad; // of phi
};

LogEval log_eval(const HankelStack& stack, const Eigen::VectorXd& q)
{
    try
    {
        ExcessEval e = focus_excess(stack, q);
        if (!(e.excess > 0.0))
            return {true, 0.0, -std::numeric_limits<double>::infinity(), std::move(e.log_gradient)};
        return {true, e.excess, std::log(e.excess), std::move(e.log_gradient)};
    }
    catch (const DegenerateCombination&)
    {
        return {false, 0.0, 0.0, {}};
    }
}

FocusOptimum run_bfgs(const HankelStack& stack, Eigen::VectorXd x, const OptimizeOptions& opt)
{
    constexpr double armijo = 1e-4;
    constexpr int max_halvings = 60;
    constexpr int stall_limit = 5;

    const auto n = x.size();
    LogEval cur = log_eval(stack, x);
    if (!cur.ok)
        throw DegenerateCombination("optimize_focus: degenerate starting combination");

    auto reset_scale = [&]() {
        const double gn = cur.grad.norm();
        return gn > 0.0 ? 0.1 * x.norm() / gn : 1.0;
    };
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n) * reset_scale();
    bool fresh = true;
    int stall = 0;
    int it = 0;

    for (; it < opt.max_iters; ++it)
    {
        if (cur.excess < opt.eps)
            break;
        if (!cur.grad.allFinite() || cur.grad.squaredNorm() == 0.0)
            break;

        Eigen::VectorXd d = -hinv * cur.grad;
        double slope = cur.grad.dot(d);
        if (!(slope < 0.0))
        {
            hinv = Eigen::MatrixXd::Identity(n, n) * reset_scale();
            fresh = true;
            d = -hinv * cur.grad;
            slope = cur.grad.dot(d);
        }

        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new;
        LogEval next;
        for (int h = 0; h < max_halvings; ++h, alpha *= 0.5)
        {
            x_new = x + alpha * d;
            LogEval trial = log_eval(stack, x_new);
            if (trial.ok && trial.phi <= cur.phi + armijo * alpha * slope)
            {
                next = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted)
        {
            if (fresh)
                break;
            hinv = Eigen::MatrixXd::Identity(n, n) * reset_scale();
            fresh = true;
            continue;
        }

        const double gain = (cur.excess - next.excess) / cur.excess;
        if (!std::isfinite(next.phi))
        {
            x = std::move(x_new);
            cur = std::move(next);
            break; // exactly rank one to working precision
        }

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = next.grad - cur.grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0)
        {
            if (fresh)
                hinv = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
            hinv = v * hinv * v.transpose() + rho * s * s.transpose();
            fresh = false;
        }

        x = std::move(x_new);
        cur = std::move(next);
        stall = gain < opt.stall_tol ? stall + 1 : 0;
        if (stall >= stall_limit)
            break;
    }

    const bool reached = cur.excess < opt.eps;
    return {FocusCoefficients(std::move(x)), 1.0 + cur.excess, cur.excess, it, reached};
}

} // namespace

FocusOptimum optimize_focus(const HankelStack& stack, const FocusCoefficients& q0,
                            const OptimizeOptions& options)
{
    if (!(options.eps > 0.0))
        throw InvalidArgument("optimize_focus: eps must be positive");
    if (q0.size() != stack.t_count())
        throw DimensionMismatch("optimize_focus: start has " + std::to_string(q0.size()) +
                                " coefficients for " + std::to_string(stack.t_count()) +
                                " matrices");

    Eigen::VectorXd start = q0.values();
    const double scale = std::max(1.0, start.norm());
    for (int attempt = 0;; ++attempt)
    {
        try
        {
            return run_bfgs(stack, start, options);
        }
        catch (const DegenerateCombination&)
        {
            if (attempt >= options.max_restarts)
                throw;
        }
        std::mt19937_64 rng(0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(attempt));
        std::normal_distribution<double> noise(0.0, 1e-3 * scale * (attempt + 1));
        start = q0.values();
        for (auto& v : start)
            v += noise(rng);
    }
}

// ---------------------------------------------------------------------------
// MUSIC
// ---------------------------------------------------------------------------

SingleSourceImaging::SingleSourceImaging(const HankelMatrix& h, double spacing, double origin)
    : spacing_(spacing), origin_(origin)
{
    if (h.size() < 2)
        throw InvalidArgument("SingleSourceImaging: Hankel matrix must be at least 2x2");
    // top left singular vector as the leading eigenvector of H H^*
    const Eigen::MatrixXcd hh = h.matrix() * h.matrix().adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hh);
    const Eigen::Index top = hh.rows() - 1;
    if (!(eig.eigenvalues()[top] > 0.0))
        throw DegenerateCombination("SingleSourceImaging: matrix has rank 0");
    u_ = eig.eigenvectors().col(top);
}

namespace
{

// s(y) = u^* phi(y) and its first two derivatives in y. The common factor
// exp(i y origin) has unit modulus and drops out of |s|, so sample offsets
// are taken relative to the centre of the row.
struct Projection
{
    cplx s, ds, d2s;
};

Projection project(const Eigen::VectorXcd& u, double spacing, double y)
{
    const auto m = u.size();
    const double centre = 0.5 * static_cast<double>(m - 1);
    Projection p{0.0, 0.0, 0.0};
    for (Eigen::Index i = 0; i < m; ++i)
    {
        const double w = (static_cast<double>(i) - centre) * spacing;
        const cplx term = std::conj(u[i]) * std::polar(1.0, y * w);
        p.s += term;
        p.ds += cplx(0.0, w) * term;
        p.d2s -= w * w * term;
    }
    return p;
}

} // namespace

double SingleSourceImaging::coherence(double y) const
{
    const auto m = static_cast<double>(u_.size());
    const double centre = 0.5 * (m - 1.0);
    const cplx step = std::polar(1.0, y * spacing_);
    cplx phase = std::polar(1.0, -y * spacing_ * centre);
    cplx s = 0.0;
    for (Eigen::Index i = 0; i < u_.size(); ++i)
    {
        s += std::conj(u_[i]) * phase;
        phase *= step;
    }
    return std::min(1.0, std::norm(s) / m);
}

double SingleSourceImaging::operator()(double y) const
{
    const double c = coherence(y);
    const double residual = std::max(1.0 - c, std::numeric_limits<double>::min());
    return 1.0 / std::sqrt(residual);
}

double music_localize_single(const HankelMatrix& h, double spacing, const SearchWindow& window,
                             int coarse_points, double origin)
{
    if (!(window.hi > window.lo))
        throw InvalidArgument("music_localize_single: empty search window");
    if (coarse_points < 3)
        throw InvalidArgument("music_localize_single: need at least 3 coarse points");

    const SingleSourceImaging imaging(h, spacing, origin);
    const double dy = window.width() / (coarse_points - 1);
    int best = 0;
    double best_c = -1.0;
    for (int i = 0; i < coarse_points; ++i)
    {
        const double c = imaging.coherence(window.lo + i * dy);
        if (c > best_c)
        {
            best_c = c;
            best = i;
        }
    }

    const double lo0 = std::max(window.lo, window.lo + (best - 1) * dy);
    const double hi0 = std::min(window.hi, window.lo + (best + 1) * dy);

    // golden-section maximisation of the coherence
    constexpr double inv_phi = 0.6180339887498949;
    const double tol = 1e-10 * window.width();
    double a = lo0, b = hi0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = imaging.coherence(x1), f2 = imaging.coherence(x2);
    while (b - a > tol)
    {
        if (f1 < f2)
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = imaging.coherence(x2);
        }
        else
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = imaging.coherence(x1);
        }
    }
    double y = 0.5 * (a + b);

    // The coherence is flat to O(dy^2) at its peak, so golden-section alone
    // stalls near sqrt(machine eps). A few Newton steps on the derivative,
    // kept inside the coarse bracket, recover full precision.
    // The coherence itself is flat there too, so steps are accepted while
    // they contract rather than by comparing values.
    const Eigen::VectorXcd& u = imaging.top_vector();
    double last_step = hi0 - lo0;
    for (int k = 0; k < 6; ++k)
    {
        const Projection p = project(u, spacing, y);
        const double d1 = 2.0 * (std::conj(p.s) * p.ds).real();
        const double d2 = 2.0 * (std::norm(p.ds) + (std::conj(p.s) * p.d2s).real());
        if (!(d2 < 0.0))
            break;
        const double step = -d1 / d2;
        const double next = y + step;
        if (next < lo0 || next > hi0 || !(std::abs(step) < last_step))
            break;
        last_step = 0.5 * std::abs(step);
        if (next == y)
            break;
        y = next;
    }
    return y;
}

// ---------------------------------------------------------------------------
// clean-up and clustering
// ---------------------------------------------------------------------------

double gamma_threshold(double snr, int k_half)
{
    if (!(snr > 0.0))
        throw InvalidArgument("gamma_threshold: snr must be positive");
    const double r = 1.0 + 4.0 * k_half / (snr * snr);
    return r * r;
}

double CleanupConfig::gamma() const
{
    return gamma_override ? *gamma_override : gamma_threshold(snr, k_half);
}

std::vector<FocusOutcome> clean_up(std::span<const FocusOutcome> outcomes, double gamma)
{
    if (!(gamma >= 1.0))
        throw InvalidArgument("clean_up: gamma must be >= 1");
    std::vector<FocusOutcome> kept;
    for (const auto& o : outcomes)
        if (o.f_value <= gamma)
            kept.push_back(o);
    return kept;
}

RecoveredSupport::RecoveredSupport(std::vector<double> positions) : positions_(std::move(positions))
{
    std::sort(positions_.begin(), positions_.end());
    for (std::size_t i = 1; i < positions_.size(); ++i)
        if (!(positions_[i] > positions_[i - 1]))
            throw InvalidArgument("RecoveredSupport: positions must be distinct");
}

RecoveredSupport cluster_average(std::span<const double> positions, double radius)
{
    if (!(radius > 0.0))
        throw InvalidArgument("cluster_average: radius must be positive");
    std::vector<double> sorted(positions.begin(), positions.end());
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> means;
    std::size_t first = 0;
    for (std::size_t i = 1; i <= sorted.size(); ++i)
    {
        if (i == sorted.size() || sorted[i] - sorted[i - 1] > radius)
        {
            double sum = 0.0;
            for (std::size_t k = first; k < i; ++k)
                sum += sorted[k];
            means.push_back(sum / static_cast<double>(i - first));
            first = i;
        }
    }
    return RecoveredSupport(std::move(means));
}

LocalizeResult algorithm1(const HankelStack& stack, const LocalizeOptions& options,
                          const CleanupConfig& cfg)
{
    LocalizeResult out;
    const int T = stack.t_count();
    for (int j = 0; j < T; ++j)
    {
        try
        {
            auto opt = optimize_focus(stack, FocusCoefficients::unit(T, j), options.optimizer);
            const HankelMatrix focused = combine(stack, opt.q);
            const double y = music_localize_single(focused, stack.spacing(), options.window,
                                                   options.coarse_points, stack.origin());
            out.outcomes.push_back({std::move(opt.q), opt.f, y, j});
        }
        catch (const DegenerateCombination&)
        {
            ++out.failed_starts;
        }
    }

    out.gamma = cfg.gamma();
    // a coherence maximum pinned to the window boundary is not a peak
    const double edge = options.window.width() / (options.coarse_points - 1);
    std::vector<FocusOutcome> interior;
    for (const auto& o : out.outcomes)
    {
        if (o.position - options.window.lo < edge || options.window.hi - o.position < edge)
            ++out.edge_rejects;
        else
            interior.push_back(o);
    }
    out.retained = clean_up(interior, out.gamma);
    std::vector<double> positions;
    positions.reserve(out.retained.size());
    for (const auto& o : out.retained)
        positions.push_back(o.position);
    out.support = cluster_average(positions, cfg.cluster_radius);
    return out;
}

} // namespace iff
