#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/dof.hpp"
#include "rsma/optimize.hpp"

namespace rsma {

// SNR grid the reference QoS vectors are indexed by (dB).
const std::vector<double>& reference_qos_snr_db();
const std::vector<double>& reference_qos_zero();
const std::vector<double>& reference_qos_zero_high();
const std::vector<double>& reference_qos_alpha();

// Piecewise-linear interpolation, clamped to the end values outside the grid.
double interpolate(const std::vector<double>& grid, const std::vector<double>& values, double x);
std::vector<double> interpolate(const std::vector<double>& grid, const std::vector<double>& values,
                                const std::vector<double>& at);

struct ExperimentSpec
{
    SystemConfig base;
    std::vector<double> snr_sweep_db{20.0};
    std::vector<double> qos_alpha_by_snr;  // empty means base.qos_alpha everywhere
    std::vector<double> qos_zero_by_snr;
    std::vector<Strategy> strategies{Strategy::TP_RSMA, Strategy::PP_RSMA, Strategy::TP_SDMA,
                                     Strategy::PP_SDMA};
    int t_channel_uses = 10;
    int n_samples = 100;
    std::uint64_t seed = 1;
    std::vector<double> alpha_sweep;  // empty means base.alpha only
    AoOptions ao;
    int threads = 0;  // 0 picks hardware_concurrency

    // T=100, N=1000.
    void apply_paper_scale();
    void validate() const;
};

struct SweepRow
{
    Strategy strategy = Strategy::PP_RSMA;
    double snr_db = 0.0;
    double alpha = 0.0;
    double esr = 0.0;
    RVec per_user_er;
    double iterations = 0.0;
    double seconds = 0.0;
    int feasible_uses = 0;
    int total_uses = 0;
    bool unreliable = false;
    // Per channel use ASR in use order, NaN for infeasible uses.
    std::vector<double> use_asr;
};

struct SweepResult
{
    std::vector<SweepRow> rows;

    // Rows ordered by (snr_db, alpha, strategy).
    void sort();
    bool infeasible_dominated() const;
    const SweepRow* find(Strategy s, double snr_db, double alpha) const;
};

SweepResult run_experiment(const ExperimentSpec& spec);

struct DofReportGrid
{
    double step = 0.05;
    std::vector<double> slope_snr_db{30.0, 35.0, 40.0, 45.0, 50.0};
    int slope_channels = 0;  // 0 skips the simulated slope section
    std::uint64_t seed = 1;
};

std::string run_dof_report(const SystemConfig& config, const DofReportGrid& grid);

// Mean low-complexity ESR per SNR point for one scheme (used by the slope check).
std::vector<std::pair<double, double>> low_complexity_esr_curve(
    const SystemConfig& config, Partitioning scheme, const DofPowerAllocation& alloc,
    const std::vector<double>& snr_db, int channels, std::uint64_t seed);

enum class ResultFormat { Csv, Json };

ResultFormat parse_format(const std::string& name);
std::string format_results(const SweepResult& result, ResultFormat format);
SweepResult parse_results(const std::string& text, ResultFormat format);
void emit_results(const SweepResult& result, ResultFormat format, const std::string& path);

// JSON configuration; missing keys keep their defaults.
ExperimentSpec parse_spec(const std::string& json_text);
ExperimentSpec load_spec(const std::string& path);

}  // namespace rsma
