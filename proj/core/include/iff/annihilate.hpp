#ifndef IFF_ANNIHILATE_HPP
#define IFF_ANNIHILATE_HPP

///
/// \file annihilate.hpp
///
/// Removal of already-localised sources with the annihilating filter
///
///   Q(x) = prod_p (x - exp(i yhat_p h)) = c_0 + c_1 x + ... + c_P x^P,
///
/// applied as the boundary-free stencil out(s) = sum_l c_l row(s + l).
///

#include <span>
#include <vector>

#include <Eigen/Core>

#include "iff/signal_model.hpp"

namespace iff
{

struct AnnihilatingFilter
{
    /// c_0..c_P.
    Eigen::VectorXcd coeffs;
    std::vector<double> roots;
    /// Frequency step h between consecutive samples the filter acts on.
    double grid_step;

    int degree() const noexcept { return static_cast<int>(roots.size()); }
    /// Q(x) by Horner's rule.
    cplx evaluate(cplx x) const;
};

/// Sequential convolution of the factors (1, -exp(i yhat_p h)), reordered so
/// that the stencil sum_l c_l row(s + l) annihilates every exp(i yhat_p w_k).
/// An empty root list gives the identity filter (1).
AnnihilatingFilter build_filter(std::span<const double> roots, double grid_step);
AnnihilatingFilter build_filter(std::span<const double> roots, const SamplingGrid& grid);

/// Middle part of the convolution: length row.size() - P. Throws
/// FilterTooLong when P >= row.size().
Eigen::VectorXcd apply_filter(const Eigen::Ref<const Eigen::VectorXcd>& row,
                              const AnnihilatingFilter& filt);

/// apply_filter on every row.
Eigen::MatrixXcd apply_filter_rows(const Eigen::MatrixXcd& rows, const AnnihilatingFilter& filt);

/// A_j = prod_p (exp(i y h) - exp(i yhat_p h)).
cplx attenuation_factor(double y, std::span<const double> roots, double grid_step);

/// sum_l |c_l|; the worst-case noise gain, bounded by 2^P.
double noise_gain(const AnnihilatingFilter& filt);

} // namespace iff

#endif
