#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "iff/driver.hpp"
#include "iff/errors.hpp"
#include "iff/experiments.hpp"
#include "oracles.hpp"

using namespace iff;

namespace
{

const IlluminationSpec kPaperLaw{UniformLaw{1.0, 1.0 + std::numbers::sqrt3}, 10};

MeasurementSet scenario(const SourceModel& src, int k_half, double sigma, std::uint64_t seed,
                        const IlluminationSpec& law = kPaperLaw)
{
    const SamplingGrid grid(1.0, k_half);
    const IlluminationMatrix L = draw_illumination(law, src.size(), seed);
    return add_noise(synthesize(src, L, grid), draw_noise({sigma, seed + 1}, law.t_count, grid));
}

} // namespace

TEST(Residual, ExactSupportNoiselessIsZero)
{
    const SourceModel src({{-0.5, 1.0}, {0.4, cplx(0.0, 2.0)}});
    const MeasurementSet y = scenario(src, 10, 0.0, 40);
    const double scale = y.data.rowwise().norm().maxCoeff();
    EXPECT_LE(residual_gamma(src.positions(), y), 1e-10 * scale);
}

TEST(Residual, EmptySupportIsLargestRowNorm)
{
    const MeasurementSet y = scenario(SourceModel({{0.1, 1.0}}), 5, 0.1, 41);
    EXPECT_DOUBLE_EQ(residual_gamma(std::span<const double>{}, y),
                     y.data.rowwise().norm().maxCoeff());
}

TEST(Residual, MatchesSvdProjection)
{
    const MeasurementSet y = scenario(uniformly_spaced_sources(3, 0.6), 12, 1e-2, 42);
    const std::vector<double> s{-0.55, 0.02, 0.61};
    const double ref = oracle::residual_by_svd(vandermonde_row(s, y.grid), y.data);
    EXPECT_NEAR(residual_gamma(s, y), ref, 1e-12);
}

TEST(Residual, NoiseOnlyResidualBelowThreshold)
{
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 100; ++trial)
    {
        const SourceModel src = uniformly_spaced_sources(1 + trial % 4, 0.7);
        const double sigma = std::pow(10.0, -1.0 - trial % 6);
        const MeasurementSet y = scenario(src, 25, sigma, rng());
        EXPECT_LE(residual_gamma(src.positions(), y), stopping_threshold(y.grid, sigma));
    }
}

TEST(Residual, DuplicateSupportThrows)
{
    const MeasurementSet y = scenario(SourceModel({{0.1, 1.0}}), 5, 0.0, 44);
    const double s[] = {0.2, 0.2};
    EXPECT_THROW(residual_gamma(s, y), RankDeficient);
}

TEST(NoiseUpdate, Examples)
{
    EXPECT_DOUBLE_EQ(noise_update(2e-3, 0.04, 0.5, 0, 1.0), 2e-3);
    EXPECT_NEAR(noise_update(1.0, 0.04, 0.5, 2, 1.0), 0.0064, 1e-15);
    EXPECT_NEAR(noise_update(1.0, SamplingGrid(1.0, 25), 0.5, 2, 3.0), 0.0192, 1e-15);
    EXPECT_THROW(noise_update(1.0, 0.04, 0.0, 2, 1.0), InvalidArgument);
}

TEST(SubsamplePlan, LargestOddSize)
{
    const SubsamplePlan p = subsample_plan(51, std::nullopt, 1, 0.04);
    EXPECT_EQ(p.hankel_size, 25);
    EXPECT_EQ(p.indices.size(), 49u);
    EXPECT_DOUBLE_EQ(p.spacing, 0.04);
}

TEST(SubsamplePlan, StridedSamples)
{
    const SubsamplePlan p = subsample_plan(9, std::nullopt, 2);
    EXPECT_EQ(p.hankel_size, 3);
    EXPECT_EQ(p.indices, (std::vector<int>{0, 2, 4, 6, 8}));
    EXPECT_DOUBLE_EQ(p.spacing, 2.0);
}

TEST(SubsamplePlan, MinimalTarget)
{
    const SubsamplePlan p = subsample_plan(51, 2, 1, 0.04);
    EXPECT_EQ(p.hankel_size, 2);
    EXPECT_EQ(p.indices, (std::vector<int>{0, 1, 2}));
    EXPECT_DOUBLE_EQ(p.spacing, 0.04);
}

TEST(SubsamplePlan, Errors)
{
    EXPECT_THROW(subsample_plan(2, std::nullopt, 1), InvalidArgument);
    EXPECT_THROW(subsample_plan(9, std::nullopt, 0), InvalidArgument);
    EXPECT_THROW(subsample_plan(3, std::nullopt, 2), InsufficientSamples);
}

TEST(Decimation, CentredIndices)
{
    EXPECT_EQ(decimation_indices(SamplingGrid(1.0, 25), 5),
              (std::vector<int>{0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50}));
    EXPECT_EQ(decimation_indices(SamplingGrid(1.0, 4), 3), (std::vector<int>{1, 4, 7}));
    EXPECT_THROW(decimation_indices(SamplingGrid(1.0, 4), 0), InvalidArgument);
}

TEST(Refine, RecoversPerturbedSupport)
{
    const SourceModel src({{-0.8, 1.0}, {-0.1, 1.0}, {0.9, 1.0}});
    const MeasurementSet y = scenario(src, 25, 1e-8, 45);
    const std::vector<double> start{-0.79, -0.11, 0.905};
    const auto r = refine_support(start, y, 0.05);
    ASSERT_EQ(r.size(), 3u);
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(r[i], src.positions()[i], 1e-6);
    EXPECT_LT(residual_gamma(r, y), residual_gamma(start, y));
}

TEST(Refine, MovesAtMostMaxShift)
{
    const MeasurementSet y = scenario(SourceModel({{0.5, 1.0}}), 10, 0.0, 46);
    const double start[] = {0.3};
    const auto r = refine_support(start, y, 0.05);
    EXPECT_LE(std::abs(r[0] - 0.3), 0.05 + 1e-15);
    EXPECT_EQ(refine_support(start, y, 0.0), std::vector<double>{0.3});
}

TEST(Prune, DropsRedundantPoint)
{
    const SourceModel src({{-0.6, 1.0}, {0.6, 1.0}});
    const double sigma = 1e-6;
    const MeasurementSet y = scenario(src, 25, sigma, 47);
    const auto p = prune_support({-0.6, 0.0, 0.6}, y, stopping_threshold(y.grid, sigma), 0.1);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_NEAR(p[0], -0.6, 1e-5);
    EXPECT_NEAR(p[1], 0.6, 1e-5);
}

TEST(Prune, KeepsNecessaryPoints)
{
    const SourceModel src({{-0.6, 1.0}, {0.6, 1.0}});
    const double sigma = 1e-6;
    const MeasurementSet y = scenario(src, 25, sigma, 48);
    const std::vector<double> s{-0.6, 0.6};
    EXPECT_EQ(prune_support(s, y, stopping_threshold(y.grid, sigma), 0.1), s);
}

TEST(RunIff, SingleSourceConvergesInOneIteration)
{
    std::mt19937_64 rng(49);
    std::uniform_real_distribution<double> pos(-1.2, 1.2);
    for (int trial = 0; trial < 10; ++trial)
    {
        const double y0 = pos(rng), sigma = 1e-3;
        const MeasurementSet y = scenario(SourceModel({{y0, 1.0}}), 25, sigma, rng());
        const IFFResult r = run_iff(y, sigma);
        ASSERT_TRUE(r.converged) << r.diagnostic;
        EXPECT_EQ(r.trace.size(), 1u);
        ASSERT_EQ(r.support.size(), 1);
        EXPECT_LT(std::abs(r.support.positions()[0] - y0), std::numbers::pi * sigma);
    }
}

TEST(RunIff, FourSourcesAtModerateNoise)
{
    const SourceModel src = uniformly_spaced_sources(4, 0.5);
    const double sigma = 1e-4;
    const MeasurementSet y = scenario(src, 25, sigma, 50);
    const IFFResult r = run_iff(y, sigma, experiment_iff_config());
    ASSERT_TRUE(r.converged) << r.diagnostic;
    ASSERT_EQ(r.support.size(), 4);
    for (int i = 0; i < 4; ++i)
        EXPECT_NEAR(r.support.positions()[i], src.positions()[i], 0.02);
    EXPECT_LT(r.gamma_final, stopping_threshold(y.grid, sigma));
}

TEST(RunIff, NoiseExplainsEverything)
{
    const SamplingGrid grid(1.0, 10);
    const IlluminationMatrix L = draw_illumination({UniformLaw{0.1, 0.2}, 3}, 1, 51);
    const double sigma = 10.0;
    const MeasurementSet y = synthesize(SourceModel({{0.2, 1e-3}}), L, grid);
    const IFFResult r = run_iff(y, sigma);
    EXPECT_TRUE(r.converged);
    EXPECT_TRUE(r.support.empty());
    EXPECT_TRUE(r.trace.empty());
}

TEST(RunIff, TerminatesWithinIterationLimit)
{
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 6; ++trial)
    {
        const MeasurementSet y = scenario(uniformly_spaced_sources(4, 0.3), 25, 1e-2, rng());
        IFFConfig cfg = experiment_iff_config();
        cfg.max_outer_iters = 1 + trial % 3;
        const IFFResult r = run_iff(y, 1e-2, cfg);
        EXPECT_LE(static_cast<int>(r.trace.size()), cfg.max_outer_iters);
        if (!r.converged)
            EXPECT_FALSE(r.diagnostic.empty());
    }
}

TEST(RunIff, ConvergedResultsPassResidualCertificate)
{
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> sep(0.4, 1.0);
    for (int trial = 0; trial < 8; ++trial)
    {
        const double sigma = 1e-5;
        const MeasurementSet y = scenario(uniformly_spaced_sources(1 + trial % 4, sep(rng)), 25,
                                          sigma, rng());
        const IFFResult r = run_iff(y, sigma, experiment_iff_config());
        if (!r.converged)
            continue;
        const double g =
            r.support.empty() ? y.data.rowwise().norm().maxCoeff()
                              : oracle::residual_by_svd(vandermonde_row(r.support.positions(), y.grid),
                                                        y.data);
        EXPECT_LT(g, stopping_threshold(y.grid, sigma));
    }
}

TEST(RunIff, Deterministic)
{
    const MeasurementSet y = scenario(uniformly_spaced_sources(3, 0.6), 25, 1e-4, 54);
    const IFFResult a = run_iff(y, 1e-4, experiment_iff_config());
    const IFFResult b = run_iff(y, 1e-4, experiment_iff_config());
    EXPECT_EQ(a.support.positions(), b.support.positions());
    EXPECT_EQ(a.gamma_final, b.gamma_final);
}

TEST(RunIff, RejectsBadInput)
{
    const MeasurementSet y = scenario(SourceModel({{0.1, 1.0}}), 5, 0.0, 55);
    EXPECT_THROW(run_iff(y, -1.0), InvalidArgument);
    IFFConfig cfg;
    cfg.subsample_stride = 0;
    EXPECT_THROW(run_iff(y, 0.1, cfg), InvalidArgument);
    cfg = {};
    cfg.min_residual_gain = -1.0;
    EXPECT_THROW(run_iff(y, 0.1, cfg), InvalidArgument);
    MeasurementSet bad = y;
    bad.data = Eigen::MatrixXcd::Zero(2, 4);
    EXPECT_THROW(run_iff(bad, 0.1), DimensionMismatch);
}
