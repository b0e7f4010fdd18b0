#include "iff/hankel_focus.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "iff/errors.hpp"

namespace iff
{

namespace
{

// Re Tr(A^* B) = Re sum_ij conj(A_ij) B_ij
double re_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    return (a.conjugate().cwiseProduct(b)).sum().real();
}

Eigen::MatrixXcd combine_raw(const HankelStack& stack, const Eigen::VectorXd& q)
{
    if (q.size() != stack.t_count())
        throw DimensionMismatch("combine: " + std::to_string(q.size()) + " coefficients for " +
                                std::to_string(stack.t_count()) + " Hankel matrices");
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(stack.size(), stack.size());
    for (int t = 0; t < stack.t_count(); ++t)
        if (q[t] != 0.0)
            g += q[t] * stack[t].matrix();
    return g;
}

} // namespace

HankelMatrix build_hankel(const Eigen::Ref<const Eigen::VectorXcd>& row)
{
    const auto len = row.size();
    if (len % 2 == 0)
        throw InvalidArgument("build_hankel: row length must be odd, got " + std::to_string(len));
    if (len < 3)
        throw InvalidArgument("build_hankel: row length must be at least 3");
    const auto m = (len + 1) / 2;
    Eigen::MatrixXcd h(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            h(i, j) = row[i + j];
    return HankelMatrix(std::move(h));
}

HankelStack::HankelStack(std::vector<HankelMatrix> mats, double spacing, double origin)
    : mats_(std::move(mats)), spacing_(spacing), origin_(origin)
{
    if (mats_.empty())
        throw InvalidArgument("HankelStack: empty stack");
    for (const auto& h : mats_)
        if (h.size() != mats_.front().size())
            throw DimensionMismatch("HankelStack: matrices differ in size");
    if (!(spacing > 0.0))
        throw InvalidArgument("HankelStack: spacing must be positive");
}

HankelStack HankelStack::from_rows(const Eigen::MatrixXcd& rows, double spacing, double origin)
{
    std::vector<HankelMatrix> mats;
    mats.reserve(rows.rows());
    for (Eigen::Index t = 0; t < rows.rows(); ++t)
        mats.push_back(build_hankel(rows.row(t).transpose()));
    return HankelStack(std::move(mats), spacing, origin);
}

FocusCoefficients FocusCoefficients::unit(int t_count, int j)
{
    Eigen::VectorXd q = Eigen::VectorXd::Zero(t_count);
    q[j] = 1.0;
    return FocusCoefficients(std::move(q));
}

HankelMatrix combine(const HankelStack& stack, const FocusCoefficients& q)
{
    return HankelMatrix(combine_raw(stack, q.values()));
}

double focus_objective(const HankelMatrix& h)
{
    const auto& g = h.matrix();
    const double fro2 = g.squaredNorm();
    if (!(std::sqrt(fro2) > kDegenerateNorm))
        throw DegenerateCombination("focus_objective: combination is numerically zero");
    const Eigen::MatrixXcd n = g.adjoint() * g;
    return fro2 * fro2 / n.squaredNorm();
}

ObjectiveEval focus_value_and_gradient(const HankelStack& stack, const Eigen::VectorXd& q)
{
    const Eigen::MatrixXcd g = combine_raw(stack, q);
    const double a = g.squaredNorm(); // Tr(G^* G)
    if (!(std::sqrt(a) > kDegenerateNorm))
        throw DegenerateCombination("focus_gradient: combination is numerically zero");
    const Eigen::MatrixXcd n = g.adjoint() * g;
    const double b = n.squaredNorm(); // Tr((G^* G)^2)
    const Eigen::MatrixXcd gn = g * n;

    // da/dq_t = 2 Re Tr(H_t^* G),  db/dq_t = 4 Re Tr(H_t^* G G^* G)
    ObjectiveEval out{a * a / b, Eigen::VectorXd(stack.t_count())};
    for (int t = 0; t < stack.t_count(); ++t)
    {
        const auto& h = stack[t].matrix();
        const double da = 2.0 * re_inner(h, g);
        const double db = 4.0 * re_inner(h, gn);
        out.gradient[t] = (2.0 * a * da * b - a * a * db) / (b * b);
    }
    return out;
}

Eigen::VectorXd focus_gradient(const HankelStack& stack, const FocusCoefficients& q)
{
    return focus_value_and_gradient(stack, q.values()).gradient;
}

ExcessEval focus_excess(const HankelStack& stack, const Eigen::VectorXd& q)
{
    const Eigen::MatrixXcd g = combine_raw(stack, q);
    if (!(g.norm() > kDegenerateNorm))
        throw DegenerateCombination("focus_excess: combination is numerically zero");

    // Split G = A + R with A = (G v) v^* for the top right singular vector v
    // and R = G (I - v v^*). Then R v = 0 and A R^* = 0 hold by construction,
    // and with a = |G v|, rho = |R|_F^2, c = R^* G v:
    //   e  = (sum s^2)^2 - sum s^4 = 2 a^2 rho + rho^2 - |R^* R|^2 - 2 |c|^2
    //   s4 = sum s^4               = a^4 + |R^* R|^2 + 2 |c|^2
    // Every term in e is formed from R directly, so nothing cancels.
    const Eigen::MatrixXcd gram = g.adjoint() * g;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
    const Eigen::VectorXcd v = eig.eigenvectors().col(gram.rows() - 1);
    const Eigen::VectorXcd gv = g * v;
    const Eigen::MatrixXcd r = g - gv * v.adjoint();
    const Eigen::MatrixXcd rr = r.adjoint() * r;
    const Eigen::VectorXcd c = r.adjoint() * gv;
    const double a2 = gv.squaredNorm();
    const double rho = r.squaredNorm();
    const double rr2 = rr.squaredNorm();
    const double c2 = c.squaredNorm();
    const double e = 2.0 * a2 * rho + rho * rho - rr2 - 2.0 * c2;
    const double s4 = a2 * a2 + rr2 + 2.0 * c2;

    ExcessEval out{std::max(e, 0.0) / s4, Eigen::VectorXd::Zero(stack.t_count())};
    if (!(e > 0.0))
        return out;

    // de = 4 Re<M, dG> with M = |G|^2 G - G G^* G and ds4 = 4 Re<G G^* G, dG>,
    // both expanded in A and R:
    //   G G^* G = a^2 A + A A^* R + R R^* A + R R^* R
    //   M       = rho A + (a^2 + rho) R - A A^* R - R R^* A - R R^* R
    const Eigen::MatrixXcd a = gv * v.adjoint();
    const Eigen::MatrixXcd aar = gv * c.adjoint();
    const Eigen::MatrixXcd rra = (r * c) * v.adjoint();
    const Eigen::MatrixXcd rrr = r * rr;
    const Eigen::MatrixXcd ggg = a2 * a + aar + rra + rrr;
    const Eigen::MatrixXcd m = rho * a + (a2 + rho) * r - aar - rra - rrr;
    const Eigen::MatrixXcd w = (4.0 / e) * m - (4.0 / s4) * ggg;
    for (int t = 0; t < stack.t_count(); ++t)
        out.log_gradient[t] = re_inner(w, stack[t].matrix());
    return out;
}

IdealFocus ideal_focus(const Eigen::MatrixXd& L, int j)
{
    const auto n = L.cols();
    if (j < 0 || j >= n)
        throw InvalidArgument("ideal_focus: source index out of range");
    if (L.rows() < n)
        throw InsufficientMeasurements("ideal_focus: fewer patterns than sources");

    Eigen::MatrixXd permuted = L;
    permuted.col(j).swap(permuted.col(n - 1));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(permuted);
    const Eigen::MatrixXd Q = qr.householderQ();
    const double r = qr.matrixQR()(n - 1, n - 1);
    Eigen::VectorXd q = Q.col(n - 1);
    if (r < 0.0)
        q = -q;
    return {std::move(q), std::abs(r)};
}

double focusing_gain_by_projection(const Eigen::MatrixXd& L, int j)
{
    const auto n = L.cols();
    if (j < 0 || j >= n)
        throw InvalidArgument("focusing_gain_by_projection: source index out of range");
    const Eigen::VectorXd alpha = L.col(j);
    if (n == 1)
        return alpha.norm();

    Eigen::MatrixXd others(L.rows(), n - 1);
    for (Eigen::Index c = 0, k = 0; c < n; ++c)
        if (c != j)
            others.col(k++) = L.col(c);
    // P alpha = L_j (L_j^T L_j)^{-1} L_j^T alpha
    const Eigen::MatrixXd gram = others.transpose() * others;
    const Eigen::VectorXd coef = gram.ldlt().solve(others.transpose() * alpha);
    return (alpha - others * coef).norm();
}

} // namespace iff
