#include "iff/annihilate.hpp"

#include <cmath>
#include <string>

#include "iff/errors.hpp"

namespace iff
{

// `coeffs` holds the convolution kernel F = (1, -z_1) * ... * (1, -z_P).
// Reversed, it is the ascending coefficient list of Q(x) = prod (x - z_p),
// which is what the forward stencil uses.

cplx AnnihilatingFilter::evaluate(cplx x) const
{
    cplx acc = 0.0;
    for (Eigen::Index l = 0; l < coeffs.size(); ++l) // Horner over Q's descending = F ascending
        acc = acc * x + coeffs[l];
    return acc;
}

AnnihilatingFilter build_filter(std::span<const double> roots, double grid_step)
{
    if (!(grid_step > 0.0))
        throw InvalidArgument("build_filter: grid step must be positive");
    Eigen::VectorXcd f = Eigen::VectorXcd::Ones(1);
    for (double r : roots)
    {
        const cplx z = std::polar(1.0, r * grid_step);
        Eigen::VectorXcd next = Eigen::VectorXcd::Zero(f.size() + 1);
        next.head(f.size()) += f;
        next.tail(f.size()) -= z * f;
        f = std::move(next);
    }
    return {std::move(f), std::vector<double>(roots.begin(), roots.end()), grid_step};
}

AnnihilatingFilter build_filter(std::span<const double> roots, const SamplingGrid& grid)
{
    return build_filter(roots, grid.step());
}

Eigen::VectorXcd apply_filter(const Eigen::Ref<const Eigen::VectorXcd>& row,
                              const AnnihilatingFilter& filt)
{
    const auto P = static_cast<Eigen::Index>(filt.degree());
    const auto n = row.size();
    if (P >= n)
        throw FilterTooLong("apply_filter: degree " + std::to_string(P) + " filter on a row of " +
                            std::to_string(n) + " samples");
    Eigen::VectorXcd out(n - P);
    for (Eigen::Index s = 0; s < n - P; ++s)
    {
        cplx acc = 0.0;
        for (Eigen::Index l = 0; l <= P; ++l)
            acc += filt.coeffs[P - l] * row[s + l];
        out[s] = acc;
    }
    return out;
}

Eigen::MatrixXcd apply_filter_rows(const Eigen::MatrixXcd& rows, const AnnihilatingFilter& filt)
{
    const auto P = static_cast<Eigen::Index>(filt.degree());
    if (P >= rows.cols())
        throw FilterTooLong("apply_filter_rows: degree " + std::to_string(P) + " filter on rows of " +
                            std::to_string(rows.cols()) + " samples");
    Eigen::MatrixXcd out(rows.rows(), rows.cols() - P);
    for (Eigen::Index t = 0; t < rows.rows(); ++t)
        out.row(t) = apply_filter(rows.row(t).transpose(), filt).transpose();
    return out;
}

cplx attenuation_factor(double y, std::span<const double> roots, double grid_step)
{
    const cplx x = std::polar(1.0, y * grid_step);
    cplx a = 1.0;
    for (double r : roots)
        a *= x - std::polar(1.0, r * grid_step);
    return a;
}

double noise_gain(const AnnihilatingFilter& filt) { return filt.coeffs.cwiseAbs().sum(); }

} // namespace iff
