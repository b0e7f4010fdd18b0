#ifndef IFF_HANKEL_FOCUS_HPP
#define IFF_HANKEL_FOCUS_HPP

///
/// \file hankel_focus.hpp
///
/// Hankel matrices of sampled rows and the trace-ratio focusing objective
///
///   f(q) = Tr(N)^2 / Tr(N^* N),   N = G^* G,   G = sum_t q_t H_t.
///
/// f >= 1 with equality exactly when G has rank one; it depends only on the
/// ratios of singular values and is invariant under q -> c q.
///

#include <vector>

#include <Eigen/Core>

#include "iff/types.hpp"

namespace iff
{

/// Square Hankel matrix, H[i][j] = row[i + j].
class HankelMatrix
{
public:
    HankelMatrix() = default;
    explicit HankelMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {}

    const Eigen::MatrixXcd& matrix() const noexcept { return m_; }
    int size() const noexcept { return static_cast<int>(m_.rows()); }

private:
    Eigen::MatrixXcd m_;
};

/// Builds the m x m Hankel matrix from a row of length 2m - 1, m >= 2.
/// Throws InvalidArgument on even or too short rows.
HankelMatrix build_hankel(const Eigen::Ref<const Eigen::VectorXcd>& row);

/// T Hankel matrices of identical size sharing one sampling geometry.
///
/// `spacing` is the frequency step between consecutive row samples and
/// `origin` the frequency of sample 0; MUSIC steering vectors are
/// exp(i y (origin + i * spacing)).
class HankelStack
{
public:
    HankelStack(std::vector<HankelMatrix> mats, double spacing, double origin = 0.0);

    /// One Hankel matrix per row of `rows` (T x (2m-1)).
    static HankelStack from_rows(const Eigen::MatrixXcd& rows, double spacing,
                                 double origin = 0.0);

    int t_count() const noexcept { return static_cast<int>(mats_.size()); }
    int size() const noexcept { return mats_.front().size(); }
    double spacing() const noexcept { return spacing_; }
    double origin() const noexcept { return origin_; }
    const HankelMatrix& operator[](int t) const { return mats_[t]; }
    const std::vector<HankelMatrix>& matrices() const noexcept { return mats_; }

private:
    std::vector<HankelMatrix> mats_;
    double spacing_;
    double origin_;
};

/// Real combination coefficients q (length T); only the direction matters.
class FocusCoefficients
{
public:
    FocusCoefficients() = default;
    explicit FocusCoefficients(Eigen::VectorXd q) : q_(std::move(q)) {}

    /// Unit vector e_j of length t_count.
    static FocusCoefficients unit(int t_count, int j);

    const Eigen::VectorXd& values() const noexcept { return q_; }
    int size() const noexcept { return static_cast<int>(q_.size()); }

private:
    Eigen::VectorXd q_;
};

/// Below this Frobenius norm a combination is treated as zero.
inline constexpr double kDegenerateNorm = 1e-300;

/// sum_t q_t H_t. Throws DimensionMismatch when |q| != T.
HankelMatrix combine(const HankelStack& stack, const FocusCoefficients& q);

/// ||H||_F^4 / ||H^* H||_F^2. Throws DegenerateCombination for a zero matrix.
double focus_objective(const HankelMatrix& h);

/// Gradient of q -> focus_objective(combine(stack, q)).
Eigen::VectorXd focus_gradient(const HankelStack& stack, const FocusCoefficients& q);

struct ObjectiveEval
{
    double value;
    Eigen::VectorXd gradient;
};

/// Value and gradient sharing one combination; what the optimizer calls.
ObjectiveEval focus_value_and_gradient(const HankelStack& stack, const Eigen::VectorXd& q);

/// f - 1 evaluated from the singular values of G without cancellation,
///
///   f - 1 = sum_i s_i^2 (sum_{j != i} s_j^2) / sum_i s_i^4,
///
/// together with the gradient of log(f - 1) in q. The trace formula loses
/// f - 1 below roughly 1e-15; this form resolves it to the accuracy of the
/// singular values. It is evaluated from a rank-one split of G along its top
/// right singular vector rather than a full SVD. log_gradient is zero when G
/// is exactly rank one.
struct ExcessEval
{
    double excess;
    Eigen::VectorXd log_gradient;
};

/// Throws DegenerateCombination for a zero combination.
ExcessEval focus_excess(const HankelStack& stack, const Eigen::VectorXd& q);

/// Exact focusing from a known illumination matrix: q is the last column of
/// Q in the QR factorisation of L with column j moved last, and
/// r_nn = ||(I - P_{L_j}) alpha_j||_2 is the effective amplitude on source j.
struct IdealFocus
{
    Eigen::VectorXd q;
    double r_nn;
};

IdealFocus ideal_focus(const Eigen::MatrixXd& L, int j);

/// ||(I - P_{L_j}) alpha_j||_2 by explicit projection onto the span of the
/// other columns, independent of the QR route in ideal_focus.
double focusing_gain_by_projection(const Eigen::MatrixXd& L, int j);

} // namespace iff

#endif
