#pragma once

#include <vector>

#include "rsma/channel.hpp"
#include "rsma/types.hpp"

namespace rsma {

enum class Partitioning { TP, PP };
enum class Stream { Zero, Common, Private };

struct PrecoderSet
{
    CVec p_zero;        // p_0, M
    CVec p_common;      // p_c, M
    CMat p_private;     // columns p_k, M x M
    RVec common_split;  // c-hat, M, bits/s/Hz
    double tp_factor = 1.0;

    static PrecoderSet zeros(int M);

    int M() const { return static_cast<int>(p_common.size()); }
    double power_alpha() const;  // ||p_c||^2 + sum_k ||p_k||^2
    double power_zero() const { return p_zero.squaredNorm(); }
    double power_total() const { return power_alpha() + power_zero(); }
    bool power_feasible(Partitioning part, double P, double tol = 1e-9) const;
};

struct RateReport
{
    RVec per_user_rate;        // K
    double common_rate = 0.0;  // min_k AR of s_c over the alpha-users
    double sum_rate_alpha = 0.0;
};

struct ErgodicSummary
{
    double esr = 0.0;
    RVec per_user_er;
};

// Instantaneous SINR of s_c at an alpha-user (s_0 already cancelled).
double sinr_common(const CVec& h, const PrecoderSet& pre);
// SINR of private stream k (k zero-based within the alpha-users).
double sinr_private(const CVec& h, const PrecoderSet& pre, int k);
// SINR of s_0 under power partitioning, all other layers as interference.
double sinr_zero_pp(const CVec& h, const PrecoderSet& pre);
// SNR of s_0 in its own time slot.
double snr_zero_tp(const CVec& h, const CVec& p_zero);

double stream_sinr(const CVec& h, const PrecoderSet& pre, Stream stream, int user,
                   Partitioning part = Partitioning::PP);

// Sample mean of log2(1 + SINR) over the set, user zero-based in 0..K-1.
double average_rate(const ChannelSampleSet& samples, const PrecoderSet& pre, Stream stream,
                    int user, Partitioning part = Partitioning::PP);

RateReport user_rates_tp(const ChannelSampleSet& samples, const PrecoderSet& pre,
                         const SystemConfig& config);
RateReport user_rates_pp(const ChannelSampleSet& samples, const PrecoderSet& pre,
                         const SystemConfig& config);
RateReport user_rates(const ChannelSampleSet& samples, const PrecoderSet& pre,
                      const SystemConfig& config, Partitioning part);

ErgodicSummary ergodic_sum_rate(const std::vector<RateReport>& reports);

// Splits min_k AR(s_c) equally among the alpha-users.
RVec equal_common_split(const ChannelSampleSet& samples, const PrecoderSet& pre, int M);

// True when every user meets its threshold within tol.
bool qos_satisfied(const RateReport& report, const SystemConfig& config, double tol = 1e-6);

}  // namespace rsma
