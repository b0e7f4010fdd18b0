#include "iff/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/QR>

#include "iff/annihilate.hpp"
#include "iff/errors.hpp"

namespace iff
{

double residual_gamma(std::span<const double> support, const MeasurementSet& y)
{
    double worst = 0.0;
    if (support.empty())
    {
        for (Eigen::Index t = 0; t < y.data.rows(); ++t)
            worst = std::max(worst, y.data.row(t).norm());
        return worst;
    }

    const Eigen::MatrixXcd V = vandermonde_row(support, y.grid);
    if (V.rows() < V.cols())
        throw RankDeficient("residual_gamma: more support points than samples");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(V);
    if (qr.rank() < V.cols())
        throw RankDeficient("residual_gamma: support points are not distinct");
    for (Eigen::Index t = 0; t < y.data.rows(); ++t)
    {
        const Eigen::VectorXcd row = y.data.row(t).transpose();
        const Eigen::VectorXcd amp = qr.solve(row);
        worst = std::max(worst, (V * amp - row).norm());
    }
    return worst;
}

double residual_gamma(const RecoveredSupport& support, const MeasurementSet& y)
{
    return residual_gamma(std::span<const double>(support.positions()), y);
}

namespace
{

// Stacked real and imaginary parts of the projection residuals of all rows;
// empty when the support is rank deficient.
Eigen::VectorXd projection_residual(std::span<const double> support, const MeasurementSet& y)
{
    const Eigen::MatrixXcd V = vandermonde_row(support, y.grid);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(V);
    if (V.rows() < V.cols() || qr.rank() < V.cols())
        return {};
    const Eigen::Index m = V.rows();
    Eigen::VectorXd out(2 * m * y.data.rows());
    for (Eigen::Index t = 0; t < y.data.rows(); ++t)
    {
        const Eigen::VectorXcd row = y.data.row(t).transpose();
        const Eigen::VectorXcd res = V * qr.solve(row) - row;
        out.segment(2 * m * t, m) = res.real();
        out.segment(2 * m * t + m, m) = res.imag();
    }
    return out;
}

} // namespace

std::vector<double> refine_support(std::span<const double> support, const MeasurementSet& y,
                                   double max_shift, int max_iters)
{
    if (!(max_shift >= 0.0) || max_iters < 0)
        throw InvalidArgument("refine_support: invalid limits");
    const std::vector<double> start(support.begin(), support.end());
    const Eigen::Index n = static_cast<Eigen::Index>(start.size());
    std::vector<double> cur = start;
    Eigen::VectorXd r = projection_residual(cur, y);
    if (n == 0 || r.size() == 0 || max_shift == 0.0)
        return cur;

    double cost = r.squaredNorm();
    double lambda = 1e-3;
    const double h = 1e-7 / y.grid.omega();
    for (int it = 0; it < max_iters && lambda < 1e12; ++it)
    {
        Eigen::MatrixXd J(r.size(), n);
        bool ok = true;
        for (Eigen::Index j = 0; j < n && ok; ++j)
        {
            std::vector<double> up = cur, dn = cur;
            up[j] += h;
            dn[j] -= h;
            const Eigen::VectorXd ru = projection_residual(up, y);
            const Eigen::VectorXd rd = projection_residual(dn, y);
            ok = ru.size() == r.size() && rd.size() == r.size();
            if (ok)
                J.col(j) = (ru - rd) / (2.0 * h);
        }
        if (!ok)
            break;

        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        bool accepted = false;
        while (!accepted && lambda < 1e12)
        {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-300);
            const Eigen::VectorXd step = A.ldlt().solve(-g);
            std::vector<double> trial = cur;
            for (Eigen::Index j = 0; j < n; ++j)
                trial[j] = std::clamp(cur[j] + step(j), start[j] - max_shift, start[j] + max_shift);
            const Eigen::VectorXd rt = projection_residual(trial, y);
            const double c = rt.size() == r.size() ? rt.squaredNorm() : HUGE_VAL;
            if (c < cost)
            {
                const bool stalled = cost - c <= 1e-14 * cost;
                cur = std::move(trial);
                r = rt;
                cost = c;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (stalled)
                    lambda = 1e12;
            }
            else
                lambda *= 4.0;
        }
    }
    std::sort(cur.begin(), cur.end());
    return cur;
}

std::vector<double> prune_support(std::vector<double> support, const MeasurementSet& y,
                                  double threshold, double max_shift)
{
    while (support.size() > 1)
    {
        std::vector<double> best;
        double best_gamma = threshold;
        for (std::size_t i = 0; i < support.size(); ++i)
        {
            std::vector<double> rest = support;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
            rest = refine_support(rest, y, max_shift);
            const double g = residual_gamma(rest, y);
            if (g < best_gamma)
            {
                best_gamma = g;
                best = std::move(rest);
            }
        }
        if (best.empty())
            break;
        support = std::move(best);
    }
    return support;
}

double stopping_threshold(const SamplingGrid& grid, double sigma)
{
    return std::sqrt(static_cast<double>(grid.size())) * sigma;
}

double noise_update(double sigma, double step, double d_prior, int p_count, double c_noise)
{
    if (!(sigma >= 0.0) || !(step > 0.0) || !(d_prior > 0.0) || !(c_noise > 0.0) || p_count < 0)
        throw InvalidArgument("noise_update: parameters must be positive");
    return c_noise * std::pow(step / d_prior, p_count) * sigma;
}

double noise_update(double sigma, const SamplingGrid& grid, double d_prior, int p_count,
                    double c_noise)
{
    return noise_update(sigma, grid.step(), d_prior, p_count, c_noise);
}

SubsamplePlan subsample_plan(int available_len, std::optional<int> target_hankel, int stride,
                             double base_step)
{
    if (available_len < 3)
        throw InvalidArgument("subsample_plan: need at least 3 samples, got " +
                              std::to_string(available_len));
    if (stride < 1)
        throw InvalidArgument("subsample_plan: stride must be >= 1");

    const int count = (available_len - 1) / stride + 1;
    int s = (count + 1) / 2; // largest s with 2s - 1 <= count
    if (s >= 3 && s % 2 == 0)
        --s; // odd sizes only, unless the samples only allow s = 2
    if (target_hankel)
        s = std::min(s, *target_hankel);
    if (s < 2)
        throw InsufficientSamples("subsample_plan: " + std::to_string(count) +
                                  " strided samples cannot form a 2x2 Hankel matrix");

    SubsamplePlan plan{{}, s, stride * base_step};
    plan.indices.reserve(2 * s - 1);
    for (int i = 0; i < 2 * s - 1; ++i)
        plan.indices.push_back(i * stride);
    return plan;
}

std::vector<int> decimation_indices(const SamplingGrid& grid, int stride)
{
    if (stride < 1)
        throw InvalidArgument("decimation_indices: stride must be >= 1");
    const int span = 2 * grid.k_half();
    const int count = span / stride + 1;
    const int offset = (span - (count - 1) * stride) / 2;
    std::vector<int> idx(count);
    for (int i = 0; i < count; ++i)
        idx[i] = offset + i * stride;
    return idx;
}

double estimate_snr(const MeasurementSet& y, double sigma)
{
    if (sigma <= 0.0)
        return std::numeric_limits<double>::infinity();
    double level = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < y.data.rows(); ++t)
        level = std::min(level, y.data.row(t).norm());
    return level / std::sqrt(static_cast<double>(y.grid.size())) / sigma;
}

namespace
{

// New positions within `radius` of an existing point are averaged into it.
std::vector<double> merge_support(std::vector<double> support, std::span<const double> fresh,
                                  double radius)
{
    for (double p : fresh)
    {
        auto nearest = support.end();
        double best = radius;
        for (auto it = support.begin(); it != support.end(); ++it)
        {
            const double d = std::abs(*it - p);
            if (d <= best)
            {
                best = d;
                nearest = it;
            }
        }
        if (nearest != support.end())
            *nearest = 0.5 * (*nearest + p);
        else
            support.push_back(p);
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    return support;
}

double min_gap(const std::vector<double>& sorted)
{
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < sorted.size(); ++i)
        g = std::min(g, sorted[i] - sorted[i - 1]);
    return g;
}

} // namespace

IFFResult run_iff(const MeasurementSet& y, double sigma, const IFFConfig& cfg)
{
    if (y.t_count() < 1)
        throw InvalidArgument("run_iff: need at least one measurement");
    if (y.data.cols() != y.grid.size())
        throw DimensionMismatch("run_iff: data width does not match the grid");
    if (!(sigma >= 0.0))
        throw InvalidArgument("run_iff: sigma must be non-negative");
    if (cfg.subsample_stride < 1 || cfg.max_outer_iters < 0 || !(cfg.c_noise > 0.0))
        throw InvalidArgument("run_iff: invalid configuration");
    if (!(cfg.min_residual_gain >= 0.0))
        throw InvalidArgument("run_iff: min_residual_gain must be non-negative");
    if (cfg.d_prior && !(*cfg.d_prior > 0.0))
        throw InvalidArgument("run_iff: d_prior must be positive");

    const SamplingGrid& grid = y.grid;
    const double omega = grid.omega();
    const double threshold = stopping_threshold(grid, sigma);
    const double snr0 = cfg.snr ? *cfg.snr : estimate_snr(y, sigma);
    const double radius = cfg.cluster_radius.value_or(std::numbers::pi / (10.0 * omega));
    const double eps = cfg.eps ? *cfg.eps
                               : (std::isfinite(snr0) ? default_tolerance(snr0) : 1e-30);

    const std::vector<int> dec = decimation_indices(grid, cfg.subsample_stride);
    const int n_dec = static_cast<int>(dec.size());
    const double step = cfg.subsample_stride * grid.step();
    const double origin = grid.node_at(dec.front());

    Eigen::MatrixXcd decimated(y.t_count(), n_dec);
    for (int i = 0; i < n_dec; ++i)
        decimated.col(i) = y.data.col(dec[i]);

    LocalizeOptions loc_opts;
    loc_opts.optimizer.eps = eps;
    loc_opts.optimizer.max_iters = cfg.max_optimizer_iters;
    loc_opts.window =
        safe_window(cfg.search_half_width.value_or(std::numbers::pi / omega), step);
    loc_opts.coarse_points = default_coarse_points(loc_opts.window, omega);

    // the empty-support plan has to be feasible; later shortfalls end the loop
    (void)subsample_plan(n_dec, cfg.hankel_half, 1, step);

    IFFResult result;
    std::vector<double> support;
    double gamma = residual_gamma(support, y);

    for (int r = 0; r < cfg.max_outer_iters && !(gamma < threshold); ++r)
    {
        const int P = static_cast<int>(support.size());
        if (n_dec - P < 3)
        {
            result.diagnostic = "insufficient samples left after filtering " + std::to_string(P) +
                                " sources";
            break;
        }
        const AnnihilatingFilter filt = build_filter(support, step);
        const Eigen::MatrixXcd filtered = apply_filter_rows(decimated, filt);

        SubsamplePlan plan;
        try
        {
            plan = subsample_plan(static_cast<int>(filtered.cols()), cfg.hankel_half, 1, step);
        }
        catch (const InsufficientSamples& e)
        {
            result.diagnostic = e.what();
            break;
        }
        Eigen::MatrixXcd rows(filtered.rows(), static_cast<Eigen::Index>(plan.indices.size()));
        for (std::size_t i = 0; i < plan.indices.size(); ++i)
            rows.col(static_cast<Eigen::Index>(i)) = filtered.col(plan.indices[i]);
        const HankelStack stack = HankelStack::from_rows(rows, step, origin);

        const double d = cfg.d_prior ? *cfg.d_prior
                         : support.size() >= 2 ? min_gap(support)
                                               : std::numbers::pi / (2.0 * omega);
        const double sigma_r = noise_update(sigma, step, d, P, cfg.c_noise);
        // After filtering, the surviving sources are attenuated by an unknown
        // factor while the noise grows by at most sum |c_l|; the SNR for the
        // clean-up threshold is measured on the filtered rows.
        double snr_r = snr0;
        if (P > 0 && sigma > 0.0)
        {
            double level = std::numeric_limits<double>::infinity();
            for (Eigen::Index t = 0; t < rows.rows(); ++t)
                level = std::min(level, rows.row(t).norm());
            level /= std::sqrt(static_cast<double>(rows.cols()));
            snr_r = level / (noise_gain(filt) * sigma);
        }
        if (!(snr_r > 0.0))
            snr_r = std::numeric_limits<double>::min();

        CleanupConfig cleanup{snr_r, plan.hankel_size - 1, cfg.gamma_override, radius};
        if (!cleanup.gamma_override)
            cleanup.gamma_override =
                std::max(gamma_threshold(snr_r, plan.hankel_size - 1), 1.0 + eps);

        const LocalizeResult loc = algorithm1(stack, loc_opts, cleanup);

        IterationRecord rec;
        rec.support_before = support;
        rec.filter_degree = P;
        rec.hankel_size = plan.hankel_size;
        rec.spacing = step;
        rec.sigma_r = sigma_r;
        rec.snr_r = snr_r;
        rec.gamma_threshold = loc.gamma;
        rec.new_positions = loc.support.positions();
        for (const auto& o : loc.outcomes)
        {
            rec.focus_values.push_back(o.f_value);
            rec.candidate_positions.push_back(o.position);
        }

        if (loc.support.empty())
        {
            rec.residual = gamma;
            result.trace.push_back(std::move(rec));
            result.diagnostic = "no focusing outcome passed the clean-up threshold";
            break;
        }

        std::vector<double> merged = merge_support(support, loc.support.positions(), radius);
        const bool grew = merged.size() > support.size();
        double next_gamma = residual_gamma(merged, y);
        if (cfg.refine_positions && !(next_gamma < threshold))
        {
            // refining an incomplete support biases it, so the refined
            // positions are only kept when they explain the data
            std::vector<double> refined = refine_support(merged, y, radius);
            const double g = residual_gamma(refined, y);
            if (g < threshold)
            {
                merged = std::move(refined);
                next_gamma = g;
            }
        }
        if (!(next_gamma <= gamma - cfg.min_residual_gain * threshold))
        {
            // a drop below the noise floor is what fitting noise would give
            rec.residual = gamma;
            result.trace.push_back(std::move(rec));
            result.diagnostic = "new positions did not reduce the residual";
            break;
        }
        support = std::move(merged);
        gamma = next_gamma;
        rec.residual = gamma;
        result.trace.push_back(std::move(rec));
        if (!grew)
        {
            result.diagnostic = "no new source found";
            break;
        }
    }

    if (cfg.prune_support && gamma < threshold)
    {
        support = prune_support(std::move(support), y, threshold,
                                cfg.refine_positions ? radius : 0.0);
        gamma = residual_gamma(support, y);
    }

    result.support = RecoveredSupport(support);
    result.gamma_final = gamma;
    result.converged = gamma < threshold;
    if (result.converged)
        result.diagnostic.clear();
    else if (result.diagnostic.empty())
        result.diagnostic = "outer iteration limit reached";
    return result;
}

} // namespace iff
