#include <cmath>

#include "doctest.h"
#include "rsma/channel.hpp"

using namespace rsma;

namespace {

SystemConfig cfg(int M, int K, double alpha, double snr_db)
{
    SystemConfig c;
    c.M = M;
    c.K = K;
    c.alpha = alpha;
    c.snr_db = snr_db;
    return c;
}

}  // namespace

TEST_CASE("error variance closed forms")
{
    CHECK(csit_error_variance(37.0, 0.0) == 1.0);
    CHECK(csit_error_variance(100.0, 1.0) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(csit_error_variance(100.0, 0.5) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_THROWS_AS(csit_error_variance(100.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(csit_error_variance(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("config validation")
{
    CHECK_THROWS_AS(cfg(3, 2, 0.5, 10).validate(), std::invalid_argument);
    CHECK_NOTHROW(cfg(2, 2, 0.5, 10).validate());
    CHECK_THROWS_AS(cfg(0, 2, 0.5, 10).validate(), std::invalid_argument);
    SystemConfig c = cfg(2, 4, 0.5, 10);
    c.qos_zero = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = cfg(2, 4, 1.7, 10).normalized();
    CHECK(c.alpha == 1.0);
    CHECK(c.theta0(0) == 0.5);
    CHECK(c.theta0(1) == 0.5);
}

TEST_CASE("draw structure: zero estimate columns and additive error")
{
    const SystemConfig c = cfg(2, 4, 0.5, 20);
    const ChannelRealization r = draw_channel(c, 11);
    CHECK(r.h_true.rows() == 2);
    CHECK(r.h_true.cols() == 4);
    CHECK(r.h_est.col(2).norm() == 0.0);
    CHECK(r.h_est.col(3).norm() == 0.0);
    CHECK((r.h_true - r.h_est - r.h_err).norm() < 1e-15);
}

TEST_CASE("near-perfect CSIT gives estimate equal to truth")
{
    // sigma^2 = 10^-13 at alpha = 1.
    const SystemConfig c = cfg(2, 3, 1.0, 130);
    const ChannelRealization r = draw_channel(c, 3);
    CHECK((r.h_true.leftCols(2) - r.h_est.leftCols(2)).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("draws are deterministic per seed")
{
    const SystemConfig c = cfg(2, 3, 0.5, 20);
    CHECK((draw_channel(c, 5).h_true - draw_channel(c, 5).h_true).norm() == 0.0);
    CHECK((draw_channel(c, 5).h_true - draw_channel(c, 6).h_true).norm() > 0.0);
}

TEST_CASE("error power matches configured variance (Monte Carlo)")
{
    const SystemConfig c = cfg(2, 3, 0.5, 10);  // sigma^2 = 10^-0.5
    const double expected = std::pow(10.0, -0.5);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
    {
        const ChannelRealization r = draw_channel(c, static_cast<std::uint64_t>(i));
        acc += r.h_err.col(0).squaredNorm() / 2.0;
    }
    CHECK(std::abs(acc / n / expected - 1.0) < 0.02);
}

TEST_CASE("zero-variance error: samples repeat the estimate on alpha-users")
{
    const SystemConfig c = cfg(2, 3, 1.0, 400);  // P^-1 underflows to 0
    const ChannelRealization r = draw_channel(c, 1);
    const ChannelSampleSet s = draw_conditional_samples(r, c, 20, 2);
    for (const CMat& H : s.samples)
        CHECK((H.leftCols(2) - r.h_est.leftCols(2)).norm() == 0.0);
}

TEST_CASE("single-sample set")
{
    const SystemConfig c = cfg(2, 3, 0.5, 20);
    const ChannelRealization r = draw_channel(c, 1);
    const ChannelSampleSet s = draw_conditional_samples(r, c, 1, 2);
    CHECK(s.n_samples() == 1);
    CHECK(true_channel_set(r).samples.front() == r.h_true);
}

TEST_CASE("conditional error covariance matches sigma^2 I (Monte Carlo)")
{
    const SystemConfig c = cfg(2, 3, 0.5, 10);
    const double s2 = std::pow(10.0, -0.5);
    const ChannelRealization r = draw_channel(c, 4);
    const ChannelSampleSet s = draw_conditional_samples(r, c, 100000, 8);
    CMat cov = CMat::Zero(2, 2);
    for (const CMat& H : s.samples)
    {
        const CVec e = H.col(1) - r.h_est.col(1);
        cov += e * e.adjoint();
    }
    cov /= static_cast<double>(s.n_samples());
    CHECK(std::abs(cov(0, 0).real() / s2 - 1.0) < 0.02);
    CHECK(std::abs(cov(1, 1).real() / s2 - 1.0) < 0.02);
    CHECK(std::abs(cov(0, 1)) / s2 < 0.02);
}

TEST_CASE("0-user columns carry full power and the long-term offset")
{
    SystemConfig c = cfg(1, 2, 0.5, 20);
    c.zero_user_snr_offset_db = 10.0;
    double acc = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i)
        acc += std::norm(draw_channel(c, static_cast<std::uint64_t>(i)).h_true(0, 1));
    CHECK(std::abs(acc / n - 0.1) < 0.1 * 0.03);
}
