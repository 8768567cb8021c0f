#include "rsma/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rsma/random.hpp"

namespace rsma {

const std::vector<double>& reference_qos_snr_db()
{
    static const std::vector<double> v{5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
    return v;
}

const std::vector<double>& reference_qos_zero()
{
    static const std::vector<double> v{0.04, 0.1, 0.2, 0.3, 0.5, 0.7};
    return v;
}

const std::vector<double>& reference_qos_zero_high()
{
    static const std::vector<double> v{0.1, 0.2, 0.4, 0.8, 1.4, 2.0};
    return v;
}

const std::vector<double>& reference_qos_alpha()
{
    static const std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    return v;
}

double interpolate(const std::vector<double>& grid, const std::vector<double>& values, double x)
{
    if (grid.empty() || grid.size() != values.size())
        throw std::invalid_argument("interpolation grid and values must be non-empty and aligned");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("interpolation grid must be ascending");
    if (x <= grid.front())
        return values.front();
    if (x >= grid.back())
        return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    const double w = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return (1.0 - w) * values[i - 1] + w * values[i];
}

std::vector<double> interpolate(const std::vector<double>& grid, const std::vector<double>& values,
                                const std::vector<double>& at)
{
    std::vector<double> out;
    out.reserve(at.size());
    for (double x : at)
        out.push_back(interpolate(grid, values, x));
    return out;
}

void ExperimentSpec::apply_paper_scale()
{
    t_channel_uses = 100;
    n_samples = 1000;
}

void ExperimentSpec::validate() const
{
    base.validate();
    if (snr_sweep_db.empty())
        throw std::invalid_argument("snr sweep is empty");
    if (!qos_alpha_by_snr.empty() && qos_alpha_by_snr.size() != snr_sweep_db.size())
        throw std::invalid_argument("qos_alpha_by_snr must align with the SNR sweep");
    if (!qos_zero_by_snr.empty() && qos_zero_by_snr.size() != snr_sweep_db.size())
        throw std::invalid_argument("qos_zero_by_snr must align with the SNR sweep");
    for (double q : qos_alpha_by_snr)
        if (q < 0.0)
            throw std::invalid_argument("QoS thresholds must be nonnegative");
    for (double q : qos_zero_by_snr)
        if (q < 0.0)
            throw std::invalid_argument("QoS thresholds must be nonnegative");
    if (strategies.empty())
        throw std::invalid_argument("no strategies selected");
    if (t_channel_uses < 1 || n_samples < 1)
        throw std::invalid_argument("T and N must be positive");
    if (ao.epsilon <= 0.0 || ao.max_iter < 1)
        throw std::invalid_argument("invalid AO options");
}

void SweepResult::sort()
{
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.snr_db != b.snr_db)
            return a.snr_db < b.snr_db;
        if (a.alpha != b.alpha)
            return a.alpha < b.alpha;
        return static_cast<int>(a.strategy) < static_cast<int>(b.strategy);
    });
}

bool SweepResult::infeasible_dominated() const
{
    int feasible = 0;
    int total = 0;
    for (const SweepRow& r : rows)
    {
        feasible += r.feasible_uses;
        total += r.total_uses;
    }
    return total > 0 && 2 * feasible < total;
}

const SweepRow* SweepResult::find(Strategy s, double snr_db, double alpha) const
{
    for (const SweepRow& r : rows)
        if (r.strategy == s && std::abs(r.snr_db - snr_db) < 1e-9 && std::abs(r.alpha - alpha) < 1e-9)
            return &r;
    return nullptr;
}

namespace {

struct UseOutcome
{
    bool feasible = false;
    RateReport report;
    int iterations = 0;
    double seconds = 0.0;
};

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn)
{
    if (threads <= 1 || n <= 1)
    {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

int worker_count(int requested)
{
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

SweepResult run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    const std::vector<double> alphas =
        spec.alpha_sweep.empty() ? std::vector<double>{spec.base.alpha} : spec.alpha_sweep;
    const int S = static_cast<int>(spec.strategies.size());
    const int T = spec.t_channel_uses;
    const int threads = worker_count(spec.threads);

    SweepResult result;
    for (double alpha : alphas)
    {
        for (std::size_t si = 0; si < spec.snr_sweep_db.size(); ++si)
        {
            SystemConfig c = spec.base;
            c.alpha = alpha;
            c.snr_db = spec.snr_sweep_db[si];
            if (!spec.qos_alpha_by_snr.empty())
                c.qos_alpha = spec.qos_alpha_by_snr[si];
            if (!spec.qos_zero_by_snr.empty())
                c.qos_zero = spec.qos_zero_by_snr[si];
            c = c.normalized();

            // Channel and sample seeds depend only on the use index, so every
            // strategy and sweep point sees the same underlying draws.
            std::vector<UseOutcome> outcomes(static_cast<std::size_t>(T * S));
            parallel_for(T, threads, [&](int t) {
                const std::uint64_t use_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(t));
                const ChannelRealization real = draw_channel(c, derive_seed(use_seed, 1));
                const ChannelSampleSet samples =
                    draw_conditional_samples(real, c, spec.n_samples, derive_seed(use_seed, 2));
                for (int s = 0; s < S; ++s)
                {
                    UseOutcome& out = outcomes[static_cast<std::size_t>(t * S + s)];
                    const auto t0 = std::chrono::steady_clock::now();
                    try
                    {
                        const AsrResult r = solve_strategy(spec.strategies[static_cast<std::size_t>(s)],
                                                           real, samples, c, spec.ao,
                                                           derive_seed(use_seed, 3));
                        out.feasible = r.feasible;
                        out.report = r.report;
                        out.iterations = static_cast<int>(r.trace.iterations.size());
                    }
                    catch (const DegenerateChannel&)
                    {
                        out.feasible = false;
                    }
                    out.seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                }
            });

            for (int s = 0; s < S; ++s)
            {
                SweepRow row;
                row.strategy = spec.strategies[static_cast<std::size_t>(s)];
                row.snr_db = c.snr_db;
                row.alpha = alpha;
                row.total_uses = T;
                std::vector<RateReport> reports;
                double iters = 0.0;
                for (int t = 0; t < T; ++t)
                {
                    const UseOutcome& o = outcomes[static_cast<std::size_t>(t * S + s)];
                    row.seconds += o.seconds;
                    if (o.feasible)
                    {
                        reports.push_back(o.report);
                        iters += o.iterations;
                        row.use_asr.push_back(o.report.sum_rate_alpha);
                    }
                    else
                    {
                        row.use_asr.push_back(std::numeric_limits<double>::quiet_NaN());
                    }
                }
                row.feasible_uses = static_cast<int>(reports.size());
                row.unreliable = 5 * (T - row.feasible_uses) > T;
                const ErgodicSummary summary = ergodic_sum_rate(reports);
                row.esr = summary.esr;
                row.per_user_er =
                    reports.empty() ? RVec(RVec::Zero(c.K)) : summary.per_user_er;
                row.iterations = reports.empty() ? 0.0 : iters / static_cast<double>(reports.size());
                result.rows.push_back(std::move(row));
            }
        }
    }
    result.sort();
    return result;
}

std::vector<std::pair<double, double>> low_complexity_esr_curve(
    const SystemConfig& config, Partitioning scheme, const DofPowerAllocation& alloc,
    const std::vector<double>& snr_db, int channels, std::uint64_t seed)
{
    std::vector<std::pair<double, double>> curve;
    for (double snr : snr_db)
    {
        SystemConfig c = config;
        c.snr_db = snr;
        c = c.normalized();
        double sum = 0.0;
        int used = 0;
        for (int i = 0; i < channels; ++i)
        {
            const ChannelRealization real = draw_channel(c, derive_seed(seed, static_cast<std::uint64_t>(i)));
            try
            {
                PrecoderSet pre = low_complexity_precoders(real, c, scheme, alloc);
                const ChannelSampleSet set = true_channel_set(real);
                pre.common_split = equal_common_split(set, pre, c.M);
                sum += user_rates(set, pre, c, scheme).sum_rate_alpha;
                ++used;
            }
            catch (const DegenerateChannel&)
            {
            }
        }
        curve.emplace_back(snr, used > 0 ? sum / used : 0.0);
    }
    return curve;
}

namespace {

std::string tuple_text(const RVec& d)
{
    std::ostringstream os;
    os << '(';
    for (Eigen::Index i = 0; i < d.size(); ++i)
        os << (i ? "," : "") << d(i);
    os << ')';
    return os.str();
}

}  // namespace

std::string run_dof_report(const SystemConfig& config, const DofReportGrid& grid)
{
    const SystemConfig c = config.normalized();
    std::ostringstream os;
    os << std::setprecision(10);
    os << "# DoF report M=" << c.M << " K=" << c.K << " alpha=" << c.alpha << "\n";

    const DofRegion region = dof_region(c);
    os << "\n[region]\n" << region.to_text();

    os << "\n[vertices]\n";
    std::vector<std::pair<std::string, RVec>> points;
    if (c.K <= 6)
    {
        const std::vector<RVec> verts = region_vertices(region);
        for (std::size_t i = 0; i < verts.size(); ++i)
            points.emplace_back("V" + std::to_string(i + 1), verts[i]);
    }
    if (c.M == 2 && c.K == 3)
    {
        const double a = c.alpha;
        points.emplace_back("A", (RVec(3) << a, a, 1.0 - a).finished());
        points.emplace_back("B", (RVec(3) << 1.0, a, 0.0).finished());
        points.emplace_back("C", (RVec(3) << a, 1.0, 0.0).finished());
    }
    for (const auto& [name, d] : points)
    {
        const MembershipReport m = region_contains(region, DofTuple{d});
        os << name << ' ' << tuple_text(d) << (m.inside ? " inside" : " outside")
           << " tight=" << m.tight.size() << '\n';
    }

    os << "\n[gain]\n# theta alpha pp_minus_tp (alpha-user sum DoF)\n";
    const int steps = std::max(1, static_cast<int>(std::lround(1.0 / grid.step)));
    for (int i = 0; i <= steps; ++i)
    {
        for (int j = 0; j <= steps; ++j)
        {
            SystemConfig g = c;
            g.alpha = static_cast<double>(j) / steps;
            const double theta = static_cast<double>(i) / steps;
            os << theta << ' ' << g.alpha << ' ' << dof_gain_pp_over_tp(g, theta).sum() << '\n';
        }
    }

    if (grid.slope_channels > 0)
    {
        os << "\n[slopes]\n";
        const double theta = 0.5;
        const DofPowerAllocation alloc = DofPowerAllocation::matched(c.alpha, theta);
        const auto tp = low_complexity_esr_curve(c, Partitioning::TP, alloc, grid.slope_snr_db,
                                                 grid.slope_channels, grid.seed);
        const auto pp = low_complexity_esr_curve(c, Partitioning::PP, alloc, grid.slope_snr_db,
                                                 grid.slope_channels, grid.seed);
        os << "TP measured=" << measure_dof_slope(tp)
           << " predicted=" << dof_tp(c, theta).d.head(c.M).sum() << '\n';
        os << "PP measured=" << measure_dof_slope(pp)
           << " predicted=" << dof_pp(c, alloc.beta).d.head(c.M).sum() << '\n';
    }
    return os.str();
}

}  // namespace rsma
