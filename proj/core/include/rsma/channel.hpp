#pragma once

#include <cstdint>
#include <vector>

#include "rsma/types.hpp"

namespace rsma {

/**
 * Overloaded MISO broadcast channel setup.
 *
 * Users 0..M-1 (zero-based) have partial instantaneous CSIT ("alpha-users");
 * users M..K-1 have statistical CSIT only ("0-users").
 */
struct SystemConfig
{
    int M = 2;
    int K = 3;
    double alpha = 0.5;
    double snr_db = 20.0;
    double qos_alpha = 0.0;
    double qos_zero = 0.0;
    double zero_user_snr_offset_db = 0.0;
    // Time shares of the 0-users; empty means uniform.
    std::vector<double> theta_zero;

    int num_alpha() const { return M; }
    int num_zero() const { return K - M; }
    bool is_alpha_user(int k) const { return k < M; }
    double snr_linear() const;
    double theta0(int j) const;
    // Long-term amplitude gain of user k.
    double user_gain(int k) const;

    // Throws std::invalid_argument on a malformed configuration.
    void validate() const;
    // Copy with alpha truncated to [0,1] and theta_zero filled in.
    SystemConfig normalized() const;
};

struct ChannelRealization
{
    CMat h_true;  // M x K
    CMat h_est;
    CMat h_err;
};

struct ChannelSampleSet
{
    CMat estimate;
    std::vector<CMat> samples;

    int n_samples() const { return static_cast<int>(samples.size()); }
};

double csit_error_variance(double snr_linear, double alpha);

ChannelRealization draw_channel(const SystemConfig& config, std::uint64_t seed);

ChannelSampleSet draw_conditional_samples(const ChannelRealization& realization,
                                          const SystemConfig& config,
                                          int n_samples,
                                          std::uint64_t seed);

// Sample set holding only the true channel (instantaneous evaluation).
ChannelSampleSet true_channel_set(const ChannelRealization& realization);

double db_to_linear(double db);

}  // namespace rsma
