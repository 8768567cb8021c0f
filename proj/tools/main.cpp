#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rsma/harness.hpp"
#include "rsma/random.hpp"
#include "rsma/wmmse.hpp"

namespace {

struct Overrides
{
    std::string config;
    std::vector<double> snr;
    std::vector<std::string> strategies;
    std::int64_t seed = -1;
    int t = 0;
    int n = 0;
    bool paper_scale = false;
    double alpha = std::nan("");
    int m = 0;
    int k = 0;
    double offset_db = std::nan("");
    double qos_alpha = -1.0;
    double qos_zero = -1.0;
    int threads = 0;
};

void add_common(CLI::App* app, Overrides& o)
{
    app->add_option("--config", o.config, "JSON configuration file");
    app->add_option("--snr", o.snr, "SNR points in dB")->delimiter(',');
    app->add_option("--strategies", o.strategies, "TP-RSMA,PP-RSMA,TP-SDMA,PP-SDMA")->delimiter(',');
    app->add_option("--seed", o.seed, "master seed");
    app->add_option("--t", o.t, "channel uses per point");
    app->add_option("--n", o.n, "conditional samples per channel use");
    app->add_flag("--paper-scale", o.paper_scale, "T=100, N=1000");
    app->add_option("--alpha", o.alpha, "CSIT quality exponent");
    app->add_option("--m", o.m, "transmit antennas (alpha-users)");
    app->add_option("--k", o.k, "total users");
    app->add_option("--offset-db", o.offset_db, "0-user long-term SNR offset");
    app->add_option("--qos-alpha", o.qos_alpha, "alpha-user rate threshold");
    app->add_option("--qos-zero", o.qos_zero, "0-user rate threshold");
    app->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

rsma::ExperimentSpec build_spec(const Overrides& o)
{
    rsma::ExperimentSpec s = o.config.empty() ? rsma::ExperimentSpec{} : rsma::load_spec(o.config);
    if (o.m > 0)
        s.base.M = o.m;
    if (o.k > 0)
        s.base.K = o.k;
    if (!std::isnan(o.alpha))
        s.base.alpha = o.alpha;
    if (!std::isnan(o.offset_db))
        s.base.zero_user_snr_offset_db = o.offset_db;
    if (o.qos_alpha >= 0.0)
    {
        s.base.qos_alpha = o.qos_alpha;
        s.qos_alpha_by_snr.clear();
    }
    if (o.qos_zero >= 0.0)
    {
        s.base.qos_zero = o.qos_zero;
        s.qos_zero_by_snr.clear();
    }
    if (!o.snr.empty())
    {
        // Threshold vectors follow the new sweep by interpolation.
        const std::vector<double> old = s.snr_sweep_db;
        if (!s.qos_alpha_by_snr.empty())
            s.qos_alpha_by_snr = rsma::interpolate(old, s.qos_alpha_by_snr, o.snr);
        if (!s.qos_zero_by_snr.empty())
            s.qos_zero_by_snr = rsma::interpolate(old, s.qos_zero_by_snr, o.snr);
        s.snr_sweep_db = o.snr;
        s.base.snr_db = o.snr.front();
    }
    if (!o.strategies.empty())
    {
        s.strategies.clear();
        for (const std::string& name : o.strategies)
            s.strategies.push_back(rsma::parse_strategy(name));
    }
    if (o.seed >= 0)
        s.seed = static_cast<std::uint64_t>(o.seed);
    if (o.paper_scale)
        s.apply_paper_scale();
    if (o.t > 0)
        s.t_channel_uses = o.t;
    if (o.n > 0)
        s.n_samples = o.n;
    if (o.threads > 0)
        s.threads = o.threads;
    s.validate();
    return s;
}

void write_output(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-")
    {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path);
    out << text;
}

int run_selftest()
{
    using namespace rsma;
    int failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "ok   " : "FAIL ") << what << '\n';
        if (!ok)
            ++failures;
    };

    SystemConfig c;
    c.M = 2;
    c.K = 3;
    c.alpha = 0.5;
    const DofRegion region = dof_region(c);
    for (const RVec& d : {(RVec(3) << 0.5, 0.5, 0.5).finished(), (RVec(3) << 1.0, 0.5, 0.0).finished(),
                          (RVec(3) << 0.5, 1.0, 0.0).finished()})
    {
        const MembershipReport m = region_contains(region, DofTuple{d});
        check(m.inside && !m.tight.empty(), "DoF point inside and on a face");
    }

    Philox4x32 rng(7, 0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i)
    {
        PrecoderSet pre = PrecoderSet::zeros(2);
        CVec h(2);
        for (int j = 0; j < 2; ++j)
        {
            h(j) = rng.complex_normal();
            pre.p_zero(j) = rng.complex_normal();
            pre.p_common(j) = rng.complex_normal();
            pre.p_private(j, 0) = rng.complex_normal();
            pre.p_private(j, 1) = rng.complex_normal();
        }
        const RateWmmse r = rate_wmmse_check(h, pre, Stream::Private, i % 2);
        worst = std::max(worst, std::abs(r.xi_mmse - r.one_minus_rate));
    }
    check(worst <= 1e-9, "rate and WMMSE identity");

    c.snr_db = 10.0;
    const ChannelRealization real = draw_channel(c, 3);
    const AsrResult pp = solve_pp_asr(real, c, 20, 3);
    check(pp.feasible && pp.trace.converged, "PP-RSMA AO converges");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rate-splitting precoder design for overloaded MISO broadcast channels"};
    app.require_subcommand(1);

    Overrides o;
    std::string out_path;
    std::string format = "csv";
    int slope_channels = 0;
    double grid_step = 0.05;

    CLI::App* dof = app.add_subcommand("dof", "DoF region, gain grid and slope summary");
    add_common(dof, o);
    dof->add_option("--out", out_path, "output path (stdout if omitted)");
    dof->add_option("--grid-step", grid_step, "theta and alpha grid step");
    dof->add_option("--slope-channels", slope_channels, "channels per SNR point for slope check");

    CLI::App* opt = app.add_subcommand("optimize", "optimize one channel use and print the AO trace");
    add_common(opt, o);
    opt->add_option("--out", out_path, "output path (stdout if omitted)");

    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo ESR sweep");
    add_common(sweep, o);
    sweep->add_option("--out", out_path, "output path (stdout if omitted)");
    sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* self = app.add_subcommand("selftest", "quick internal consistency checks");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try
    {
        if (self->parsed())
            return run_selftest();

        const rsma::ExperimentSpec spec = build_spec(o);

        if (dof->parsed())
        {
            rsma::DofReportGrid grid;
            grid.step = grid_step;
            grid.slope_channels = slope_channels;
            grid.seed = spec.seed;
            write_output(rsma::run_dof_report(spec.base, grid), out_path);
            return 0;
        }

        if (opt->parsed())
        {
            rsma::SystemConfig c = spec.base;
            c.snr_db = spec.snr_sweep_db.front();
            if (!spec.qos_alpha_by_snr.empty())
                c.qos_alpha = spec.qos_alpha_by_snr.front();
            if (!spec.qos_zero_by_snr.empty())
                c.qos_zero = spec.qos_zero_by_snr.front();
            c = c.normalized();
            const rsma::ChannelRealization real = rsma::draw_channel(c, spec.seed);
            const rsma::ChannelSampleSet samples = rsma::draw_conditional_samples(
                real, c, spec.n_samples, rsma::sample_seed(spec.seed));
            std::ostringstream os;
            os.precision(10);
            bool any = false;
            for (rsma::Strategy s : spec.strategies)
            {
                const rsma::AsrResult r = rsma::solve_strategy(s, real, samples, c, spec.ao,
                                                               rsma::init_seed(spec.seed));
                os << "## " << rsma::to_string(s);
                if (!r.feasible)
                {
                    os << " infeasible: " << r.message << "\n";
                    continue;
                }
                any = true;
                os << " asr=" << r.report.sum_rate_alpha << " theta=" << r.theta
                   << " converged=" << (r.trace.converged ? "yes" : "no") << "\nrates";
                for (Eigen::Index k = 0; k < r.report.per_user_rate.size(); ++k)
                    os << ' ' << r.report.per_user_rate(k);
                os << '\n' << r.trace.to_text();
            }
            write_output(os.str(), out_path);
            return any ? 0 : 2;
        }

        const rsma::SweepResult result = rsma::run_experiment(spec);
        const rsma::ResultFormat fmt = rsma::parse_format(format);
        if (out_path.empty() || out_path == "-")
            std::cout << rsma::format_results(result, fmt);
        else
            rsma::emit_results(result, fmt, out_path);
        for (const rsma::SweepRow& row : result.rows)
            if (row.unreliable)
                std::cerr << "warning: " << rsma::to_string(row.strategy) << " at " << row.snr_db
                          << " dB, alpha " << row.alpha << ": " << row.total_uses - row.feasible_uses
                          << " of " << row.total_uses << " channel uses infeasible\n";
        return result.infeasible_dominated() ? 2 : 0;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
