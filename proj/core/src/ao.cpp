#include "rsma/optimize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "rsma/random.hpp"
#include "rsma/wmmse.hpp"

namespace rsma {

namespace {

double max_violation(const QcqpProblem& qp, const RVec& x)
{
    double v = 0.0;
    for (const QuadForm& f : qp.constraints)
        v = std::max(v, f.eval(x));
    for (const LinearIneq& l : qp.linear)
        v = std::max(v, l.a.dot(x) - l.b);
    return v;
}

double min_common_ar(const ChannelSampleSet& samples, const PrecoderSet& pre, int M)
{
    double r = std::numeric_limits<double>::infinity();
    for (int k = 0; k < M; ++k)
        r = std::min(r, average_rate(samples, pre, Stream::Common, k));
    return r;
}

// Scales the common split back onto the common-rate constraint if solver slack
// pushed it over.
void honour_common_split(const ChannelSampleSet& samples, PrecoderSet& pre, int M)
{
    pre.common_split = pre.common_split.cwiseMax(0.0);
    const double total = pre.common_split.sum();
    if (total <= 0.0)
        return;
    const double rc = min_common_ar(samples, pre, M);
    if (total > rc)
        pre.common_split *= std::max(rc, 0.0) / total;
}

// Sum over alpha-users of c_k + AR_{p,k}.
double alpha_asr(const ChannelSampleSet& samples, const PrecoderSet& pre, int M)
{
    double s = pre.common_split.sum();
    for (int k = 0; k < M; ++k)
        s += average_rate(samples, pre, Stream::Private, k);
    return s;
}

bool init_feasible(const ChannelSampleSet& samples, const PrecoderSet& pre,
                   const SystemConfig& c, const SubproblemOptions& opt)
{
    for (int k = 0; k < c.M; ++k)
        if (pre.common_split(k) + average_rate(samples, pre, Stream::Private, k) < opt.qos_alpha)
            return false;
    if (!opt.zero)
        return true;
    double r_alpha = std::numeric_limits<double>::infinity();
    for (int k = 0; k < c.M; ++k)
        r_alpha = std::min(r_alpha, average_rate(samples, pre, Stream::Zero, k));
    for (int k = c.M; k < c.K; ++k)
    {
        const double r = std::min(r_alpha, average_rate(samples, pre, Stream::Zero, k));
        if (c.theta0(k - c.M) * r < opt.qos_zero)
            return false;
    }
    return true;
}

// WMMSE alternating optimization of the alpha-user layers, optionally with the superposed s_0.
AsrResult run_alpha_ao(const ChannelSampleSet& samples, const SystemConfig& c,
                       const PrecoderSet& init, const SubproblemOptions& sub, const AoOptions& opt)
{
    AsrResult res;
    res.trace.epsilon = opt.epsilon;
    PrecoderSet pre = init;
    if (!sub.zero)
        pre.p_zero.setZero();
    if (!sub.common)
    {
        pre.p_common.setZero();
        pre.common_split.setZero();
    }
    else
    {
        pre.common_split = equal_common_split(samples, pre, c.M);
    }

    res.trace.initial_feasible = init_feasible(samples, pre, c, sub);
    if (!res.trace.initial_feasible && sub.zero && c.num_zero() > 0 && sub.qos_zero > 0.0)
    {
        // Shift power towards s_0 until the 0-user QoS holds at the start.
        const double total = pre.power_total();
        const double p0 = pre.power_zero();
        const double pa = pre.power_alpha();
        for (double share : {0.5, 0.65, 0.8, 0.9, 0.95})
        {
            if (p0 <= 0.0 || pa <= 0.0 || share * total <= p0)
                continue;
            PrecoderSet cand = pre;
            cand.p_zero *= std::sqrt(share * total / p0);
            const double a = std::sqrt((1.0 - share) * total / pa);
            cand.p_common *= a;
            cand.p_private *= a;
            if (sub.common)
                cand.common_split = equal_common_split(samples, cand, c.M);
            if (init_feasible(samples, cand, c, sub))
            {
                pre = std::move(cand);
                res.trace.initial_feasible = true;
                break;
            }
        }
    }

    double prev = alpha_asr(samples, pre, c.M);
    res.trace.initial_asr = prev;

    for (int t = 1; t <= opt.max_iter; ++t)
    {
        const WmmseState st = mmse_state(samples, pre, c, Partitioning::PP);
        const CoeffBundle cb = assemble_coefficients(samples, st);
        const PpSubproblem sp = build_pp_subproblem(cb, c, sub);
        const QcqpSolution sol = solve(sp.problem, opt.qcqp);
        const double viol = max_violation(sp.problem, sol.x);
        const bool usable = sol.status == QcqpStatus::Optimal ||
                            (sol.status == QcqpStatus::MaxIter && viol <= 1e-7);
        if (!usable)
        {
            if (t == 1)
            {
                res.feasible = false;
                res.message = std::string("subproblem ") + to_string(sol.status) +
                              " at the first iteration";
                return res;
            }
            res.message = std::string("subproblem ") + to_string(sol.status) + " at iteration " +
                          std::to_string(t) + ", keeping the previous iterate";
            break;
        }
        PrecoderSet next = sp.layout.unpack(sol.x);
        next.tp_factor = pre.tp_factor;
        if (!sub.zero)
            next.p_zero = init.p_zero;
        honour_common_split(samples, next, c.M);
        const double asr = alpha_asr(samples, next, c.M);
        res.trace.iterations.push_back({asr, viol});
        pre = std::move(next);
        if (std::abs(asr - prev) <= opt.epsilon)
        {
            res.trace.converged = true;
            break;
        }
        prev = asr;
    }
    res.feasible = true;
    res.precoders = pre;
    return res;
}

std::string canonical(const std::string& s)
{
    std::string out;
    for (char ch : s)
        if (std::isalnum(static_cast<unsigned char>(ch)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    return out;
}

}  // namespace

const char* to_string(Strategy s)
{
    switch (s)
    {
    case Strategy::TP_RSMA:
        return "TP-RSMA";
    case Strategy::PP_RSMA:
        return "PP-RSMA";
    case Strategy::TP_SDMA:
        return "TP-SDMA";
    case Strategy::PP_SDMA:
        return "PP-SDMA";
    }
    return "?";
}

Strategy parse_strategy(const std::string& name)
{
    const std::string c = canonical(name);
    if (c == "tprsma")
        return Strategy::TP_RSMA;
    if (c == "pprsma")
        return Strategy::PP_RSMA;
    if (c == "tpsdma")
        return Strategy::TP_SDMA;
    if (c == "ppsdma")
        return Strategy::PP_SDMA;
    throw std::invalid_argument("unknown strategy: " + name);
}

Partitioning partitioning(Strategy s)
{
    return (s == Strategy::TP_RSMA || s == Strategy::TP_SDMA) ? Partitioning::TP : Partitioning::PP;
}

bool uses_common_stream(Strategy s) { return s == Strategy::TP_RSMA || s == Strategy::PP_RSMA; }

std::uint64_t sample_seed(std::uint64_t seed) { return derive_seed(seed, 0x5a5a, 1); }
std::uint64_t init_seed(std::uint64_t seed) { return derive_seed(seed, 0x5a5a, 2); }

std::string AoTrace::to_text() const
{
    std::ostringstream os;
    os.precision(12);
    os << "iter asr max_violation\n";
    os << 0 << ' ' << initial_asr << ' ' << 0 << '\n';
    for (std::size_t i = 0; i < iterations.size(); ++i)
        os << (i + 1) << ' ' << iterations[i].asr << ' ' << iterations[i].max_constraint_violation
           << '\n';
    return os.str();
}

PrecoderSet init_precoders(const ChannelRealization& realization, const SystemConfig& config,
                           Partitioning scheme, bool common, std::uint64_t seed)
{
    const SystemConfig c = config.normalized();
    const int M = c.M;
    const double P = c.snr_linear();
    Philox4x32 rng(seed, 7);

    PrecoderSet pre = PrecoderSet::zeros(M);
    const CMat Ha = realization.h_est.leftCols(M);

    CVec dir_c;
    if (Ha.norm() > 1e-12)
    {
        const Eigen::JacobiSVD<CMat> svd(Ha, Eigen::ComputeThinU);
        dir_c = svd.matrixU().col(0);
    }
    else
    {
        dir_c = random_unit_vector(rng, M);
    }
    const CVec dir_0 = random_unit_vector(rng, M);
    CMat dir_p(M, M);
    for (int k = 0; k < M; ++k)
    {
        const double n = Ha.col(k).norm();
        dir_p.col(k) = n > 1e-12 ? CVec(Ha.col(k) / n) : random_unit_vector(rng, M);
    }

    double p0, pc, pk;
    if (scheme == Partitioning::PP)
    {
        const double groups = common ? 3.0 : 2.0;
        p0 = P / groups;
        pc = common ? P / groups : 0.0;
        pk = P / groups;
    }
    else
    {
        p0 = P;
        pc = common ? P / 2.0 : 0.0;
        pk = common ? P / 2.0 : P;
    }
    pre.p_zero = std::sqrt(p0) * dir_0;
    pre.p_common = std::sqrt(pc) * dir_c;
    for (int k = 0; k < M; ++k)
        pre.p_private.col(k) = std::sqrt(pk / M) * dir_p.col(k);
    return pre;
}

AsrResult solve_pp_asr(const ChannelSampleSet& samples, const SystemConfig& config,
                       const PrecoderSet& init, const AoOptions& opt, bool common)
{
    const SystemConfig c = config.normalized();
    SubproblemOptions sub;
    sub.zero = true;
    sub.common = common;
    sub.qos_alpha = c.qos_alpha;
    sub.qos_zero = c.qos_zero;
    sub.power = c.snr_linear();
    AsrResult res = run_alpha_ao(samples, c, init, sub, opt);
    if (res.feasible)
    {
        res.precoders.tp_factor = 1.0;
        res.report = user_rates_pp(samples, res.precoders, c);
    }
    return res;
}

AsrResult solve_pp_asr(const ChannelRealization& realization, const SystemConfig& config,
                       int n_samples, std::uint64_t seed, double epsilon)
{
    const ChannelSampleSet samples =
        draw_conditional_samples(realization, config, n_samples, sample_seed(seed));
    AoOptions opt;
    opt.epsilon = epsilon;
    const PrecoderSet init = init_precoders(realization, config, Partitioning::PP, true, init_seed(seed));
    return solve_pp_asr(samples, config, init, opt, true);
}

ZeroPhaseResult solve_zero_maxmin(const ChannelSampleSet& samples, const SystemConfig& config,
                                  const CVec& init_p0, const AoOptions& opt)
{
    const SystemConfig c = config.normalized();
    const double P = c.snr_linear();
    const int M = c.M;
    ZeroPhaseResult res;
    res.trace.epsilon = opt.epsilon;

    PrecoderSet pre = PrecoderSet::zeros(M);
    pre.p_zero = init_p0;
    auto weighted = [&](const PrecoderSet& p) {
        RVec r(c.num_zero());
        for (int k = c.M; k < c.K; ++k)
            r(k - M) = c.theta0(k - M) * average_rate(samples, p, Stream::Zero, k, Partitioning::TP);
        return r;
    };
    RVec rates = weighted(pre);
    if (c.num_zero() == 0)
    {
        res.ok = true;
        res.p_zero = CVec::Zero(M);
        res.weighted_rate = rates;
        return res;
    }
    double prev = rates.minCoeff();
    res.trace.initial_asr = prev;
    res.trace.initial_feasible = true;

    for (int t = 1; t <= opt.max_iter; ++t)
    {
        const WmmseState st = mmse_state(samples, pre, c, Partitioning::TP);
        const CoeffBundle cb = assemble_coefficients(samples, st);
        const QcqpProblem qp = build_tp_zero_subproblem(cb, c, P);
        const QcqpSolution sol = solve(qp, opt.qcqp);
        const double viol = max_violation(qp, sol.x);
        if (!(sol.status == QcqpStatus::Optimal ||
              (sol.status == QcqpStatus::MaxIter && viol <= 1e-7)))
            break;
        PrecoderSet next = PrecoderSet::zeros(M);
        for (int i = 0; i < M; ++i)
            next.p_zero(i) = cplx(sol.x(i), sol.x(M + i)) * std::sqrt(P);
        const RVec r = weighted(next);
        const double v = r.minCoeff();
        res.trace.iterations.push_back({v, viol});
        pre = std::move(next);
        rates = r;
        if (std::abs(v - prev) <= opt.epsilon)
        {
            res.trace.converged = true;
            break;
        }
        prev = v;
    }
    res.ok = true;
    res.p_zero = pre.p_zero;
    res.weighted_rate = rates;
    return res;
}

AsrResult solve_tp_asr(const ChannelSampleSet& samples, const ChannelRealization& realization,
                       const SystemConfig& config, const AoOptions& opt, bool common,
                       std::uint64_t seed)
{
    const SystemConfig c = config.normalized();
    const double P = c.snr_linear();
    const PrecoderSet init = init_precoders(realization, c, Partitioning::TP, common, seed);
    const ZeroPhaseResult zero = solve_zero_maxmin(samples, c, init.p_zero, opt);

    const int steps = std::max(1, static_cast<int>(std::lround(1.0 / opt.theta_step)));
    std::map<double, AsrResult> cache;
    AsrResult best;
    double best_value = -std::numeric_limits<double>::infinity();

    for (int i = 0; i <= steps; ++i)
    {
        const double theta = static_cast<double>(i) / steps;
        bool zero_ok = true;
        for (int k = 0; k < c.num_zero(); ++k)
            if ((1.0 - theta) * zero.weighted_rate(k) < c.qos_zero - 1e-12)
                zero_ok = false;
        if (!zero_ok)
            continue;

        AsrResult alpha;
        double value = 0.0;
        if (theta == 0.0)
        {
            if (c.qos_alpha > 0.0)
                continue;
            alpha.feasible = true;
            alpha.precoders = PrecoderSet::zeros(c.M);
        }
        else
        {
            const double q = c.qos_alpha / theta;
            auto it = cache.find(q);
            if (it == cache.end())
            {
                SubproblemOptions sub;
                sub.zero = false;
                sub.common = common;
                sub.qos_alpha = q;
                sub.power = P;
                it = cache.emplace(q, run_alpha_ao(samples, c, init, sub, opt)).first;
            }
            alpha = it->second;
            if (!alpha.feasible)
                continue;
            value = theta * alpha_asr(samples, alpha.precoders, c.M);
        }
        if (value > best_value)
        {
            best_value = value;
            best = alpha;
            best.theta = theta;
        }
    }

    if (!std::isfinite(best_value))
    {
        AsrResult res;
        res.feasible = false;
        res.message = "no feasible TP factor on the grid";
        return res;
    }
    best.precoders.p_zero = zero.p_zero;
    best.precoders.tp_factor = best.theta;
    best.report = user_rates_tp(samples, best.precoders, c);
    return best;
}

AsrResult solve_tp_asr(const ChannelRealization& realization, const SystemConfig& config,
                       int n_samples, std::uint64_t seed, double epsilon, double theta_grid_step)
{
    const ChannelSampleSet samples =
        draw_conditional_samples(realization, config, n_samples, sample_seed(seed));
    AoOptions opt;
    opt.epsilon = epsilon;
    opt.theta_step = theta_grid_step;
    return solve_tp_asr(samples, realization, config, opt, true, init_seed(seed));
}

AsrResult solve_sdma_variant(const ChannelRealization& realization, const SystemConfig& config,
                             int n_samples, std::uint64_t seed, Partitioning part,
                             const AoOptions& opt)
{
    const ChannelSampleSet samples =
        draw_conditional_samples(realization, config, n_samples, sample_seed(seed));
    if (part == Partitioning::TP)
        return solve_tp_asr(samples, realization, config, opt, false, init_seed(seed));
    const PrecoderSet init = init_precoders(realization, config, Partitioning::PP, false, init_seed(seed));
    return solve_pp_asr(samples, config, init, opt, false);
}

namespace {

void keep_better(AsrResult& best, AsrResult cand)
{
    if (!cand.feasible)
        return;
    if (!best.feasible || cand.report.sum_rate_alpha > best.report.sum_rate_alpha)
        best = std::move(cand);
}

// Moves a small share of the private power onto a common stream along the
// dominant direction of the private precoders, so the AO can leave the
// p_c = 0 fixed point.
PrecoderSet seed_common(const PrecoderSet& sdma, double share)
{
    PrecoderSet pre = sdma;
    const double pk = pre.p_private.squaredNorm();
    if (pk <= 0.0)
        return pre;
    Eigen::JacobiSVD<CMat> svd(pre.p_private, Eigen::ComputeThinU);
    pre.p_private *= std::sqrt(1.0 - share);
    pre.p_common = std::sqrt(share * pk) * svd.matrixU().col(0);
    return pre;
}

}  // namespace

AsrResult solve_strategy(Strategy s, const ChannelRealization& realization,
                         const ChannelSampleSet& samples, const SystemConfig& config,
                         const AoOptions& opt, std::uint64_t seed)
{
    const bool common = uses_common_stream(s);
    const bool restart = common && opt.sdma_restart;
    if (partitioning(s) == Partitioning::TP)
    {
        AsrResult best = solve_tp_asr(samples, realization, config, opt, common, seed);
        if (restart)
        {
            // Same seed, so the 0-user phase is shared and the SDMA point is admissible.
            keep_better(best, solve_tp_asr(samples, realization, config, opt, false, seed));
        }
        return best;
    }
    const PrecoderSet init = init_precoders(realization, config, Partitioning::PP, common, seed);
    AsrResult best = solve_pp_asr(samples, config, init, opt, common);
    if (restart)
    {
        const PrecoderSet sd_init =
            init_precoders(realization, config, Partitioning::PP, false, seed);
        AsrResult sd = solve_pp_asr(samples, config, sd_init, opt, false);
        if (sd.feasible)
        {
            keep_better(best, solve_pp_asr(samples, config, seed_common(sd.precoders, 0.05), opt, true));
            keep_better(best, std::move(sd));
        }
    }
    return best;
}

}  // namespace rsma
