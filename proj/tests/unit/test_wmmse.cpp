#include <cmath>

#include "doctest.h"
#include "rsma/random.hpp"
#include "rsma/wmmse.hpp"

using namespace rsma;

namespace {

CVec scalar(cplx v)
{
    CVec h(1);
    h(0) = v;
    return h;
}

PrecoderSet random_precoders(Philox4x32& rng, int M, double scale)
{
    PrecoderSet p = PrecoderSet::zeros(M);
    for (int i = 0; i < M; ++i)
    {
        p.p_zero(i) = scale * rng.complex_normal();
        p.p_common(i) = scale * rng.complex_normal();
        for (int k = 0; k < M; ++k)
            p.p_private(i, k) = scale * rng.complex_normal();
    }
    return p;
}

SystemConfig cfg(int M, int K, double snr_db)
{
    SystemConfig c;
    c.M = M;
    c.K = K;
    c.snr_db = snr_db;
    return c;
}

}  // namespace

TEST_CASE("scalar MSE, equalizer and weight")
{
    PrecoderSet p = PrecoderSet::zeros(1);
    p.p_private(0, 0) = 1.0;
    const CVec h = scalar(1.0);
    CHECK(mse(h, p, 0.0, Stream::Private, 0) == doctest::Approx(1.0));
    // T = 2: 0.25 * 2 - 2 * 0.5 + 1.
    CHECK(mse(h, p, 0.5, Stream::Private, 0) == doctest::Approx(0.5));
    CHECK(std::abs(mmse_equalizer(h, p, Stream::Private, 0) - cplx(0.5)) < 1e-15);
    CHECK(mmse_weight(h, p, Stream::Private, 0) == doctest::Approx(2.0));

    PrecoderSet off = PrecoderSet::zeros(1);
    CHECK(std::abs(mmse_equalizer(h, off, Stream::Private, 0)) == 0.0);
    CHECK(mmse_weight(h, off, Stream::Private, 0) == 1.0);
}

TEST_CASE("MMSE equalizer minimizes the MSE and 1/w equals the minimum")
{
    Philox4x32 rng(31);
    for (int trial = 0; trial < 20; ++trial)
    {
        const PrecoderSet p = random_precoders(rng, 2, 1.0);
        CVec h(2);
        h << rng.complex_normal(), rng.complex_normal();
        for (Stream s : {Stream::Zero, Stream::Common, Stream::Private})
        {
            const cplx g = mmse_equalizer(h, p, s, 1);
            const double e = mse(h, p, g, s, 1);
            CHECK(e == doctest::Approx(1.0 / mmse_weight(h, p, s, 1)).epsilon(1e-12));
            double grid_best = 1e300;
            for (int a = -40; a <= 40; ++a)
                for (int b = -40; b <= 40; ++b)
                    grid_best = std::min(grid_best, mse(h, p, g + cplx(a, b) * 0.005, s, 1));
            CHECK(e <= grid_best + 1e-15);
        }
    }
}

TEST_CASE("weight minus one equals SINR")
{
    Philox4x32 rng(32);
    for (int trial = 0; trial < 100; ++trial)
    {
        const PrecoderSet p = random_precoders(rng, 3, 2.0);
        CVec h(3);
        h << rng.complex_normal(), rng.complex_normal(), rng.complex_normal();
        for (Partitioning part : {Partitioning::PP, Partitioning::TP})
            for (Stream s : {Stream::Zero, Stream::Common, Stream::Private})
            {
                const double sinr = stream_sinr(h, p, s, trial % 3, part);
                CHECK(std::abs(mmse_weight(h, p, s, trial % 3, part) - 1.0 - sinr) <=
                      1e-12 * (1.0 + sinr));
            }
    }
}

TEST_CASE("rate and WMMSE identity")
{
    PrecoderSet p = PrecoderSet::zeros(1);
    const CVec h = scalar(1.0);
    RateWmmse r = rate_wmmse_check(h, p, Stream::Private, 0);
    CHECK(r.xi_mmse == doctest::Approx(1.0));
    CHECK(r.one_minus_rate == doctest::Approx(1.0));
    p.p_private(0, 0) = 1.0;  // SINR 1
    r = rate_wmmse_check(h, p, Stream::Private, 0);
    CHECK(std::abs(r.xi_mmse) < 1e-15);
    CHECK(std::abs(r.one_minus_rate) < 1e-15);

    Philox4x32 rng(33);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const int M = 1 + trial % 3;
        const PrecoderSet q = random_precoders(rng, M, std::pow(10.0, rng.uniform() * 2.0 - 0.5));
        CVec g(M);
        for (int i = 0; i < M; ++i)
            g(i) = rng.complex_normal();
        const Stream s = static_cast<Stream>(trial % 3);
        const Partitioning part = trial % 2 ? Partitioning::TP : Partitioning::PP;
        const RateWmmse x = rate_wmmse_check(g, q, s, trial % M, part);
        CHECK(std::abs(x.xi_mmse - x.one_minus_rate) <= 1e-9);
    }
}

TEST_CASE("average WMSE equals one minus average rate")
{
    const SystemConfig c = cfg(2, 3, 15.0);
    const ChannelRealization r = draw_channel(c, 40);
    Philox4x32 rng(41);
    const PrecoderSet p = random_precoders(rng, 2, 3.0);

    const ChannelSampleSet one = draw_conditional_samples(r, c, 1, 1);
    const WmmseState s1 = mmse_state(one, p, c);
    CHECK(awmse(one, p, s1, Stream::Private, 0) ==
          doctest::Approx(rate_wmmse_check(one.samples[0].col(0), p, Stream::Private, 0).xi_mmse));

    const ChannelSampleSet many = draw_conditional_samples(r, c, 200, 2);
    for (Partitioning part : {Partitioning::PP, Partitioning::TP})
    {
        const WmmseState st = mmse_state(many, p, c, part);
        for (int k = 0; k < 2; ++k)
        {
            CHECK(std::abs(awmse(many, p, st, Stream::Private, k) -
                           (1.0 - average_rate(many, p, Stream::Private, k, part))) <= 1e-9);
            CHECK(std::abs(awmse(many, p, st, Stream::Common, k) -
                           (1.0 - average_rate(many, p, Stream::Common, k, part))) <= 1e-9);
        }
        for (int k = 0; k < 3; ++k)
            CHECK(std::abs(awmse(many, p, st, Stream::Zero, k) -
                           (1.0 - average_rate(many, p, Stream::Zero, k, part))) <= 1e-9);
    }

    WmmseState trivial = mmse_state(many, p, c);
    trivial.w_priv[0].setOnes();
    trivial.g_priv[0].setZero();
    CHECK(awmse(many, p, trivial, Stream::Private, 0) == doctest::Approx(1.0));
}

TEST_CASE("coefficient assembly")
{
    ChannelSampleSet s;
    CMat H(1, 1);
    H(0, 0) = 1.0;
    s.estimate = H;
    s.samples = {H};
    WmmseState st;
    st.w_priv = {RVec::Constant(1, 2.0)};
    st.g_priv = {CVec::Constant(1, cplx(0.5))};
    const CoeffBundle b = assemble_coefficients(s, st);
    REQUIRE(b.priv.size() == 1);
    // Weights enter as w/ln2 and nu as log2 w + 1/ln2 - 1.
    const double inv_ln2 = 1.0 / std::log(2.0);
    CHECK(b.priv[0].t == doctest::Approx(0.5 * inv_ln2));
    CHECK(std::abs(b.priv[0].psi(0, 0) - cplx(0.5 * inv_ln2)) < 1e-15);
    CHECK(std::abs(b.priv[0].f(0) - cplx(inv_ln2)) < 1e-15);
    CHECK(b.priv[0].w == doctest::Approx(2.0 * inv_ln2));
    CHECK(b.priv[0].nu == doctest::Approx(inv_ln2));

    st.g_priv = {CVec::Zero(1)};
    const CoeffBundle z = assemble_coefficients(s, st);
    CHECK(z.priv[0].t == 0.0);
    CHECK(z.priv[0].psi.norm() == 0.0);
    CHECK(z.priv[0].f.norm() == 0.0);

    const SystemConfig c = cfg(3, 5, 20.0);
    Philox4x32 rng(50);
    const ChannelRealization r = draw_channel(c, 50);
    const ChannelSampleSet many = draw_conditional_samples(r, c, 50, 3);
    const CoeffBundle rb = assemble_coefficients(many, mmse_state(many, random_precoders(rng, 3, 3.0), c));
    for (const auto* group : {&rb.zero, &rb.common, &rb.priv})
        for (const StreamCoeffs& e : *group)
        {
            CHECK((e.psi - e.psi.adjoint()).norm() == 0.0);
            const Eigen::SelfAdjointEigenSolver<CMat> es(e.psi);
            CHECK(es.eigenvalues().minCoeff() >= -1e-12);
        }
}

TEST_CASE("subproblem layout and constraint count")
{
    SubproblemOptions o;
    o.power = 100.0;
    const VarLayout L = VarLayout::make(2, o);
    CHECK(L.n == 4 + 4 + 8 + 2);
    Philox4x32 rng(60);
    PrecoderSet p = random_precoders(rng, 2, 1.0);
    p.common_split << 0.3, 0.0;
    const PrecoderSet back = L.unpack(L.pack(p));
    CHECK((back.p_zero - p.p_zero).norm() < 1e-14);
    CHECK((back.p_common - p.p_common).norm() < 1e-14);
    CHECK((back.p_private - p.p_private).norm() < 1e-14);
    CHECK((back.common_split - p.common_split).norm() < 1e-14);

    const SystemConfig c = cfg(2, 4, 20.0);
    CHECK(pp_constraint_count(c, o) == 2 + 2 * 3 + 2 + 1);
    SubproblemOptions sdma = o;
    sdma.common = false;
    CHECK(pp_constraint_count(c, sdma) == 2 + 2 * 3 + 1);
    sdma.zero = false;
    CHECK(pp_constraint_count(c, sdma) == 3);

    const ChannelRealization r = draw_channel(c, 61);
    const ChannelSampleSet s = draw_conditional_samples(r, c, 10, 62);
    const CoeffBundle cb = assemble_coefficients(s, mmse_state(s, p, c));
    for (const SubproblemOptions& opt : {o, sdma})
        CHECK(static_cast<int>(build_pp_subproblem(cb, c, opt).problem.constraints.size()) ==
              pp_constraint_count(c, opt));
}

TEST_CASE("surrogate at the linearization point reproduces the rates")
{
    SystemConfig c = cfg(2, 3, 20.0);
    c.qos_alpha = 0.2;
    c.qos_zero = 0.1;
    c = c.normalized();
    const ChannelRealization r = draw_channel(c, 70);
    const ChannelSampleSet s = draw_conditional_samples(r, c, 50, 71);
    Philox4x32 rng(72);
    PrecoderSet p = random_precoders(rng, 2, 4.0);
    p.common_split = equal_common_split(s, p, 2);

    SubproblemOptions o;
    o.power = c.snr_linear();
    o.qos_alpha = c.qos_alpha;
    o.qos_zero = c.qos_zero;
    const PpSubproblem sp = build_pp_subproblem(assemble_coefficients(s, mmse_state(s, p, c)), c, o);
    const RVec x = sp.layout.pack(p);

    double obj = 0.0;
    for (int k = 0; k < 2; ++k)
        obj += -p.common_split(k) + 1.0 - average_rate(s, p, Stream::Private, k);
    CHECK(sp.problem.objective.eval(x) == doctest::Approx(obj).epsilon(1e-10));

    std::size_t i = 0;
    for (int k = 0; k < 2; ++k, ++i)
        CHECK(sp.problem.constraints[i].eval(x) ==
              doctest::Approx(-p.common_split(k) + 1.0 - average_rate(s, p, Stream::Private, k) -
                              (1.0 - c.qos_alpha))
                  .epsilon(1e-10));
    for (int u : {0, 1, 2})
    {
        const double th = c.theta0(0);
        CHECK(sp.problem.constraints[i++].eval(x) ==
              doctest::Approx(th * (1.0 - average_rate(s, p, Stream::Zero, u)) - (th - c.qos_zero))
                  .epsilon(1e-10));
    }
    for (int k = 0; k < 2; ++k, ++i)
        CHECK(sp.problem.constraints[i].eval(x) ==
              doctest::Approx(1.0 - average_rate(s, p, Stream::Common, k) + p.common_split.sum() - 1.0)
                  .epsilon(1e-10));
    CHECK(sp.problem.constraints[i].eval(x) ==
          doctest::Approx(p.power_total() / c.snr_linear() - 1.0).epsilon(1e-12));
}

TEST_CASE("single-user subproblem matches the closed-form minimizer")
{
    // M = K = 1, N = 1, private layer only: minimize psi |p|^2 - 2 Re{f* p} + const.
    SystemConfig c = cfg(1, 1, 0.0);
    ChannelSampleSet s;
    CMat H(1, 1);
    H(0, 0) = cplx(0.8, -0.6);
    s.estimate = H;
    s.samples = {H};
    PrecoderSet p = PrecoderSet::zeros(1);
    p.p_private(0, 0) = 0.3;
    const CoeffBundle cb = assemble_coefficients(s, mmse_state(s, p, c));
    SubproblemOptions o;
    o.zero = false;
    o.common = false;
    o.power = 1e6;  // power constraint inactive
    const PpSubproblem sp = build_pp_subproblem(cb, c, o);
    const QcqpSolution sol = solve(sp.problem);
    REQUIRE(sol.status == QcqpStatus::Optimal);
    const cplx expect = cb.priv[0].f(0) / cb.priv[0].psi(0, 0).real();
    CHECK(std::abs(sp.layout.unpack(sol.x).p_private(0, 0) - expect) < 1e-6);
}

TEST_CASE("time-partitioned 0-user subproblem structure")
{
    const SystemConfig c = cfg(2, 4, 10.0).normalized();
    const ChannelRealization r = draw_channel(c, 80);
    const ChannelSampleSet s = draw_conditional_samples(r, c, 20, 81);
    Philox4x32 rng(82);
    PrecoderSet p = PrecoderSet::zeros(2);
    p.p_zero = std::sqrt(c.snr_linear()) * random_unit_vector(rng, 2);
    const CoeffBundle cb = assemble_coefficients(s, mmse_state(s, p, c, Partitioning::TP));
    const QcqpProblem qp = build_tp_zero_subproblem(cb, c, c.snr_linear());
    CHECK(qp.n == 5);
    CHECK(qp.constraints.size() == 3);

    // At x = [p_0 / sqrt(P); t] the max-min rows equal t - theta R_k.
    RVec x(5);
    for (int i = 0; i < 2; ++i)
    {
        x(i) = p.p_zero(i).real() / std::sqrt(c.snr_linear());
        x(2 + i) = p.p_zero(i).imag() / std::sqrt(c.snr_linear());
    }
    x(4) = 0.25;
    for (int k = 2; k < 4; ++k)
        CHECK(qp.constraints[static_cast<std::size_t>(k - 2)].eval(x) ==
              doctest::Approx(0.25 - 0.5 * average_rate(s, p, Stream::Zero, k, Partitioning::TP))
                  .epsilon(1e-10));
}

TEST_CASE("surrogate rate is a lower bound away from the expansion point")
{
    // 1 - (w' e(g) - nu') with the assembled scalar coefficients, compared with
    // the exact rate at a second precoder.
    Philox4x32 rng(77);
    const double inv_ln2 = 1.0 / std::log(2.0);
    for (int trial = 0; trial < 2000; ++trial)
    {
        const CVec h = CVec::Constant(1, rng.complex_normal());
        PrecoderSet a = PrecoderSet::zeros(1);
        a.p_private(0, 0) = 3.0 * rng.complex_normal();
        const cplx g = mmse_equalizer(h, a, Stream::Private, 0);
        const double w = mmse_weight(h, a, Stream::Private, 0);
        PrecoderSet b = PrecoderSet::zeros(1);
        b.p_private(0, 0) = 3.0 * rng.complex_normal();
        const double e = mse(h, b, g, Stream::Private, 0);
        const double surrogate = 1.0 - (inv_ln2 * w * e - (std::log2(w) + inv_ln2 - 1.0));
        const double rate = std::log2(1.0 + sinr_private(h, b, 0));
        CHECK(surrogate <= rate + 1e-12);
        const double at_a = 1.0 - (inv_ln2 * w * mse(h, a, g, Stream::Private, 0) -
                                   (std::log2(w) + inv_ln2 - 1.0));
        CHECK(at_a == doctest::Approx(std::log2(1.0 + sinr_private(h, a, 0))).epsilon(1e-12));
    }
}
