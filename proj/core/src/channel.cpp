#include "rsma/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsma/random.hpp"

namespace rsma {

namespace {

constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kSampleStream = 2;

// Error variance actually used for drawing; an estimate cannot carry negative
// power, so P < 1 is treated as no instantaneous CSIT.
double effective_error_variance(const SystemConfig& c)
{
    return std::min(1.0, csit_error_variance(c.snr_linear(), c.alpha));
}

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double SystemConfig::snr_linear() const { return db_to_linear(snr_db); }

double SystemConfig::theta0(int j) const
{
    if (theta_zero.empty())
        return 1.0 / num_zero();
    return theta_zero.at(static_cast<std::size_t>(j));
}

double SystemConfig::user_gain(int k) const
{
    return is_alpha_user(k) ? 1.0 : std::pow(10.0, -zero_user_snr_offset_db / 20.0);
}

void SystemConfig::validate() const
{
    if (M < 1)
        throw std::invalid_argument("M must be positive");
    if (K < M)
        throw std::invalid_argument("K must be at least M");
    if (!std::isfinite(alpha) || !std::isfinite(snr_db))
        throw std::invalid_argument("alpha and snr_db must be finite");
    if (qos_alpha < 0.0 || qos_zero < 0.0)
        throw std::invalid_argument("QoS thresholds must be nonnegative");
    if (!theta_zero.empty())
    {
        if (static_cast<int>(theta_zero.size()) != num_zero())
            throw std::invalid_argument("theta_zero needs K-M entries");
        for (double t : theta_zero)
            if (t < 0.0)
                throw std::invalid_argument("theta_zero entries must be nonnegative");
        const double s = std::accumulate(theta_zero.begin(), theta_zero.end(), 0.0);
        if (std::abs(s - 1.0) > 1e-9)
            throw std::invalid_argument("theta_zero must sum to 1");
    }
}

SystemConfig SystemConfig::normalized() const
{
    validate();
    SystemConfig c = *this;
    c.alpha = std::clamp(alpha, 0.0, 1.0);
    if (c.theta_zero.empty())
        c.theta_zero.assign(static_cast<std::size_t>(num_zero()), 1.0 / num_zero());
    return c;
}

double csit_error_variance(double snr_linear, double alpha)
{
    if (!(snr_linear > 0.0))
        throw std::invalid_argument("snr_linear must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in [0,1]");
    if (alpha == 0.0)
        return 1.0;
    return std::pow(snr_linear, -alpha);
}

ChannelRealization draw_channel(const SystemConfig& config, std::uint64_t seed)
{
    const SystemConfig c = config.normalized();
    const double var_err = effective_error_variance(c);
    const double var_est = 1.0 - var_err;

    Philox4x32 rng(seed, kChannelStream);
    ChannelRealization r;
    r.h_true.resize(c.M, c.K);
    r.h_est = CMat::Zero(c.M, c.K);
    r.h_err.resize(c.M, c.K);
    for (int k = 0; k < c.K; ++k)
    {
        for (int m = 0; m < c.M; ++m)
        {
            // Two unit draws per entry regardless of user type keeps the
            // stream layout independent of alpha and SNR.
            const cplx a = rng.complex_normal();
            const cplx b = rng.complex_normal();
            if (c.is_alpha_user(k))
            {
                r.h_est(m, k) = std::sqrt(var_est) * a;
                r.h_err(m, k) = std::sqrt(var_err) * b;
                r.h_true(m, k) = r.h_est(m, k) + r.h_err(m, k);
            }
            else
            {
                r.h_true(m, k) = c.user_gain(k) * a;
                r.h_err(m, k) = r.h_true(m, k);
            }
        }
    }
    return r;
}

ChannelSampleSet draw_conditional_samples(const ChannelRealization& realization,
                                          const SystemConfig& config,
                                          int n_samples,
                                          std::uint64_t seed)
{
    if (n_samples < 1)
        throw std::invalid_argument("n_samples must be at least 1");
    const SystemConfig c = config.normalized();
    const double sd_err = std::sqrt(effective_error_variance(c));

    Philox4x32 rng(seed, kSampleStream);
    ChannelSampleSet set;
    set.estimate = realization.h_est;
    set.samples.reserve(static_cast<std::size_t>(n_samples));
    for (int n = 0; n < n_samples; ++n)
    {
        CMat h(c.M, c.K);
        for (int k = 0; k < c.K; ++k)
        {
            const double sd = c.is_alpha_user(k) ? sd_err : c.user_gain(k);
            for (int m = 0; m < c.M; ++m)
                h(m, k) = realization.h_est(m, k) + sd * rng.complex_normal();
        }
        set.samples.push_back(std::move(h));
    }
    return set;
}

ChannelSampleSet true_channel_set(const ChannelRealization& realization)
{
    ChannelSampleSet set;
    set.estimate = realization.h_est;
    set.samples.push_back(realization.h_true);
    return set;
}

}  // namespace rsma
