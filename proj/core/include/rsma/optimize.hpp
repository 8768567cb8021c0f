#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/qcqp.hpp"
#include "rsma/ratemodel.hpp"

namespace rsma {

enum class Strategy { TP_RSMA, PP_RSMA, TP_SDMA, PP_SDMA };

const char* to_string(Strategy s);
// Accepts "PP-RSMA", "pp_rsma", "pprsma" and similar spellings.
Strategy parse_strategy(const std::string& name);
Partitioning partitioning(Strategy s);
bool uses_common_stream(Strategy s);

struct AoOptions
{
    double epsilon = 1e-4;
    int max_iter = 500;
    // Tighter than the solver defaults so that subproblem suboptimality stays
    // well below the per-iteration monotonicity budget.
    QcqpTolerances qcqp{1e-9, 1e-9, 200};
    double theta_step = 0.05;
    // solve_strategy: RSMA also tries the SDMA solution and a restart from it,
    // keeping the best, so RSMA never ends below its SDMA special case.
    bool sdma_restart = true;
};

struct AoIteration
{
    double asr = 0.0;
    double max_constraint_violation = 0.0;
};

struct AoTrace
{
    std::vector<AoIteration> iterations;
    bool converged = false;
    double epsilon = 1e-4;
    double initial_asr = 0.0;
    bool initial_feasible = false;

    // "iter asr violation" rows, iteration 0 being the initialization.
    std::string to_text() const;
};

struct AsrResult
{
    bool feasible = false;
    std::string message;
    PrecoderSet precoders;
    RateReport report;
    AoTrace trace;
    double theta = 1.0;  // selected TP factor (1 under power partitioning)
};

// MRT private precoders, SVD common direction, random p_0. Power is split
// equally among the active layer groups of each phase.
PrecoderSet init_precoders(const ChannelRealization& realization, const SystemConfig& config,
                           Partitioning scheme, bool common = true, std::uint64_t seed = 0);

// WMMSE alternating optimization on a fixed sample set; common = false gives PP-SDMA.
AsrResult solve_pp_asr(const ChannelSampleSet& samples, const SystemConfig& config,
                       const PrecoderSet& init, const AoOptions& opt = {}, bool common = true);
AsrResult solve_pp_asr(const ChannelRealization& realization, const SystemConfig& config,
                       int n_samples, std::uint64_t seed, double epsilon = 1e-4);

struct ZeroPhaseResult
{
    bool ok = false;
    CVec p_zero;
    RVec weighted_rate;  // theta_{0,k} * AR of s_0, per 0-user
    AoTrace trace;
};

// max over p_0 of min_k theta_{0,k} AR_{0,k}, ||p_0||^2 <= P, interference-free.
ZeroPhaseResult solve_zero_maxmin(const ChannelSampleSet& samples, const SystemConfig& config,
                                  const CVec& init_p0, const AoOptions& opt = {});

// Decomposed TP solver with a grid over the TP factor.
AsrResult solve_tp_asr(const ChannelSampleSet& samples, const ChannelRealization& realization,
                       const SystemConfig& config, const AoOptions& opt = {}, bool common = true,
                       std::uint64_t seed = 0);
AsrResult solve_tp_asr(const ChannelRealization& realization, const SystemConfig& config,
                       int n_samples, std::uint64_t seed, double epsilon = 1e-4,
                       double theta_grid_step = 0.05);

AsrResult solve_sdma_variant(const ChannelRealization& realization, const SystemConfig& config,
                             int n_samples, std::uint64_t seed, Partitioning partitioning,
                             const AoOptions& opt = {});

// Dispatch on strategy with a caller-supplied sample set.
AsrResult solve_strategy(Strategy s, const ChannelRealization& realization,
                         const ChannelSampleSet& samples, const SystemConfig& config,
                         const AoOptions& opt = {}, std::uint64_t seed = 0);

// Seeds used by the convenience overloads for samples and initialization.
std::uint64_t sample_seed(std::uint64_t seed);
std::uint64_t init_seed(std::uint64_t seed);

}  // namespace rsma
