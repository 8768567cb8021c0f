#include "rsma/ratemodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsma {

namespace {

inline double gain(const CVec& h, const CVec& p) { return std::norm(h.dot(p)); }

double private_power_sum(const CVec& h, const PrecoderSet& pre)
{
    double s = 0.0;
    for (int j = 0; j < pre.p_private.cols(); ++j)
        s += gain(h, pre.p_private.col(j));
    return s;
}

// Common-split actually honoured by a report; a sum exceeding the common AR
// by solver-level slack is scaled back, anything larger is a caller error.
RVec honoured_split(const PrecoderSet& pre, double common_rate)
{
    RVec c = pre.common_split.cwiseMax(0.0);
    const double total = c.sum();
    if (total <= common_rate)
        return c;
    if (total > common_rate + 1e-6)
        throw std::invalid_argument("common split exceeds the common-stream average rate");
    return total > 0.0 ? RVec(c * (common_rate / total)) : c;
}

double min_common_rate(const ChannelSampleSet& samples, const PrecoderSet& pre, int M)
{
    double r = std::numeric_limits<double>::infinity();
    for (int k = 0; k < M; ++k)
        r = std::min(r, average_rate(samples, pre, Stream::Common, k));
    return r;
}

}  // namespace

PrecoderSet PrecoderSet::zeros(int M)
{
    PrecoderSet p;
    p.p_zero = CVec::Zero(M);
    p.p_common = CVec::Zero(M);
    p.p_private = CMat::Zero(M, M);
    p.common_split = RVec::Zero(M);
    return p;
}

double PrecoderSet::power_alpha() const
{
    return p_common.squaredNorm() + p_private.squaredNorm();
}

bool PrecoderSet::power_feasible(Partitioning part, double P, double tol) const
{
    const double slack = tol * std::max(1.0, P);
    if (part == Partitioning::PP)
        return power_total() <= P + slack;
    return power_alpha() <= P + slack && power_zero() <= P + slack;
}

double sinr_common(const CVec& h, const PrecoderSet& pre)
{
    return gain(h, pre.p_common) / (private_power_sum(h, pre) + 1.0);
}

double sinr_private(const CVec& h, const PrecoderSet& pre, int k)
{
    const double own = gain(h, pre.p_private.col(k));
    return own / (private_power_sum(h, pre) - own + 1.0);
}

double sinr_zero_pp(const CVec& h, const PrecoderSet& pre)
{
    return gain(h, pre.p_zero) / (gain(h, pre.p_common) + private_power_sum(h, pre) + 1.0);
}

double snr_zero_tp(const CVec& h, const CVec& p_zero) { return gain(h, p_zero); }

double stream_sinr(const CVec& h, const PrecoderSet& pre, Stream stream, int user,
                   Partitioning part)
{
    switch (stream)
    {
    case Stream::Zero:
        return part == Partitioning::PP ? sinr_zero_pp(h, pre) : snr_zero_tp(h, pre.p_zero);
    case Stream::Common:
        return sinr_common(h, pre);
    case Stream::Private:
        return sinr_private(h, pre, user);
    }
    return 0.0;
}

double average_rate(const ChannelSampleSet& samples, const PrecoderSet& pre, Stream stream,
                    int user, Partitioning part)
{
    if (samples.samples.empty())
        throw std::invalid_argument("empty sample set");
    double acc = 0.0;
    for (const CMat& H : samples.samples)
        acc += std::log2(1.0 + stream_sinr(H.col(user), pre, stream, user, part));
    return acc / static_cast<double>(samples.samples.size());
}

RateReport user_rates_tp(const ChannelSampleSet& samples, const PrecoderSet& pre,
                         const SystemConfig& config)
{
    const SystemConfig c = config.normalized();
    const double theta = pre.tp_factor;
    RateReport rep;
    rep.per_user_rate = RVec::Zero(c.K);
    rep.common_rate = min_common_rate(samples, pre, c.M);
    const RVec split = honoured_split(pre, rep.common_rate);
    for (int k = 0; k < c.M; ++k)
    {
        const double rp = average_rate(samples, pre, Stream::Private, k, Partitioning::TP);
        rep.per_user_rate(k) = theta * (split(k) + rp);
    }
    for (int k = c.M; k < c.K; ++k)
    {
        const double r0 = average_rate(samples, pre, Stream::Zero, k, Partitioning::TP);
        rep.per_user_rate(k) = c.theta0(k - c.M) * (1.0 - theta) * r0;
    }
    rep.sum_rate_alpha = rep.per_user_rate.head(c.M).sum();
    return rep;
}

RateReport user_rates_pp(const ChannelSampleSet& samples, const PrecoderSet& pre,
                         const SystemConfig& config)
{
    const SystemConfig c = config.normalized();
    RateReport rep;
    rep.per_user_rate = RVec::Zero(c.K);
    rep.common_rate = min_common_rate(samples, pre, c.M);
    const RVec split = honoured_split(pre, rep.common_rate);

    // s_0 must be decodable at every alpha-user (they cancel it first).
    double r0_alpha = std::numeric_limits<double>::infinity();
    for (int k = 0; k < c.M; ++k)
    {
        rep.per_user_rate(k) = split(k) + average_rate(samples, pre, Stream::Private, k);
        r0_alpha = std::min(r0_alpha, average_rate(samples, pre, Stream::Zero, k));
    }
    for (int k = c.M; k < c.K; ++k)
    {
        const double own = average_rate(samples, pre, Stream::Zero, k);
        rep.per_user_rate(k) = c.theta0(k - c.M) * std::min(r0_alpha, own);
    }
    rep.sum_rate_alpha = rep.per_user_rate.head(c.M).sum();
    return rep;
}

RateReport user_rates(const ChannelSampleSet& samples, const PrecoderSet& pre,
                      const SystemConfig& config, Partitioning part)
{
    return part == Partitioning::PP ? user_rates_pp(samples, pre, config)
                                    : user_rates_tp(samples, pre, config);
}

ErgodicSummary ergodic_sum_rate(const std::vector<RateReport>& reports)
{
    ErgodicSummary out;
    if (reports.empty())
        return out;
    out.per_user_er = RVec::Zero(reports.front().per_user_rate.size());
    for (const RateReport& r : reports)
    {
        out.esr += r.sum_rate_alpha;
        out.per_user_er += r.per_user_rate;
    }
    const double T = static_cast<double>(reports.size());
    out.esr /= T;
    out.per_user_er /= T;
    return out;
}

RVec equal_common_split(const ChannelSampleSet& samples, const PrecoderSet& pre, int M)
{
    return RVec::Constant(M, min_common_rate(samples, pre, M) / M);
}

bool qos_satisfied(const RateReport& report, const SystemConfig& config, double tol)
{
    for (int k = 0; k < config.K; ++k)
    {
        const double th = config.is_alpha_user(k) ? config.qos_alpha : config.qos_zero;
        if (report.per_user_rate(k) < th - tol)
            return false;
    }
    return true;
}

}  // namespace rsma
