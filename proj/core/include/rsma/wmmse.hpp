#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/qcqp.hpp"
#include "rsma/ratemodel.hpp"
#include "rsma/types.hpp"

namespace rsma {

// Received power terms T_{i,k} for one channel vector.
double receive_power(const CVec& h, const PrecoderSet& pre, Stream stream,
                     Partitioning part = Partitioning::PP);

double mse(const CVec& h, const PrecoderSet& pre, cplx g, Stream stream, int user,
           Partitioning part = Partitioning::PP);
cplx mmse_equalizer(const CVec& h, const PrecoderSet& pre, Stream stream, int user,
                    Partitioning part = Partitioning::PP);
double mmse_weight(const CVec& h, const PrecoderSet& pre, Stream stream, int user,
                   Partitioning part = Partitioning::PP);
// w * mse - log2(w)
double wmse(const CVec& h, const PrecoderSet& pre, double w, cplx g, Stream stream, int user,
            Partitioning part = Partitioning::PP);

struct RateWmmse
{
    double xi_mmse = 0.0;
    double one_minus_rate = 0.0;
};

// Evaluates both sides of the rate/WMMSE identity; throws std::logic_error if
// they differ by more than 1e-9.
RateWmmse rate_wmmse_check(const CVec& h, const PrecoderSet& pre, Stream stream, int user,
                           Partitioning part = Partitioning::PP);

// Per-sample weights and equalizers. zero[k] covers all K users; common[k]
// and priv[k] cover the alpha-users.
struct WmmseState
{
    std::vector<RVec> w_zero, w_common, w_priv;
    std::vector<CVec> g_zero, g_common, g_priv;
    Partitioning part = Partitioning::PP;

    int n_samples() const { return w_priv.empty() ? 0 : static_cast<int>(w_priv.front().size()); }
};

WmmseState mmse_state(const ChannelSampleSet& samples, const PrecoderSet& pre,
                      const SystemConfig& config, Partitioning part = Partitioning::PP);

double awmse(const ChannelSampleSet& samples, const PrecoderSet& pre, const WmmseState& state,
             Stream stream, int user);

struct StreamCoeffs
{
    CMat psi;  // Hermitian PSD
    double t = 0.0;
    CVec f;
    double w = 0.0;
    double nu = 0.0;
};

struct CoeffBundle
{
    std::vector<StreamCoeffs> zero, common, priv;
};

CoeffBundle assemble_coefficients(const ChannelSampleSet& samples, const WmmseState& state);

// Which layers a subproblem optimizes over.
struct SubproblemOptions
{
    bool zero = true;    // p_0 and the 0-user constraints
    bool common = true;  // p_c and the common split
    double qos_alpha = 0.0;
    double qos_zero = 0.0;
    double power = 1.0;  // P
};

// Real variable layout: [p_0][p_c][p_1 .. p_M][x_hat], precoders stored as
// [Re; Im] and normalized by sqrt(P).
struct VarLayout
{
    int M = 0;
    int zero = -1;
    int common = -1;
    int priv = 0;
    int xhat = -1;
    int n = 0;
    double scale = 1.0;

    static VarLayout make(int M, const SubproblemOptions& opt);
    int private_offset(int k) const { return priv + 2 * M * k; }
    PrecoderSet unpack(const RVec& x) const;
    RVec pack(const PrecoderSet& pre) const;
};

struct PpSubproblem
{
    QcqpProblem problem;
    VarLayout layout;
};

PpSubproblem build_pp_subproblem(const CoeffBundle& coeffs, const SystemConfig& config,
                                 const SubproblemOptions& opt);

// Max-min 0-user subproblem of the time-partitioned scheme over x = [p_0; t],
// p_0 lifted and normalized by sqrt(P): minimize -t subject to
// theta_{0,k} (1 - xi_{0,k}) >= t for every 0-user and ||p_0||^2 <= P.
QcqpProblem build_tp_zero_subproblem(const CoeffBundle& coeffs, const SystemConfig& config,
                                     double power);

// Number of quadratic constraints build_pp_subproblem emits.
int pp_constraint_count(const SystemConfig& config, const SubproblemOptions& opt);

}  // namespace rsma
