#include "rsma/wmmse.hpp"

#include <cmath>

namespace rsma {

namespace {

inline double gain(const CVec& h, const CVec& p) { return std::norm(h.dot(p)); }

CVec signal_precoder(const PrecoderSet& pre, Stream stream, int user)
{
    switch (stream)
    {
    case Stream::Zero:
        return pre.p_zero;
    case Stream::Common:
        return pre.p_common;
    case Stream::Private:
        return pre.p_private.col(user);
    }
    return {};
}

// x' P x for a lifted complex block equals p^H H p.
void add_hermitian(RMat& P, int off, const CMat& H, double scale)
{
    const int M = static_cast<int>(H.rows());
    const RMat re = H.real() * scale;
    const RMat im = H.imag() * scale;
    P.block(off, off, M, M) += re;
    P.block(off, off + M, M, M) -= im;
    P.block(off + M, off, M, M) += im;
    P.block(off + M, off + M, M, M) += re;
}

// q' x for a lifted block equals Re{f^H p}.
void add_real_inner(RVec& q, int off, const CVec& f, double scale)
{
    const int M = static_cast<int>(f.size());
    q.segment(off, M) += scale * f.real();
    q.segment(off + M, M) += scale * f.imag();
}

// factor * (sum_{j in blocks} p_j^H psi p_j + t - 2 Re{f^H p_signal} + w - nu)
void add_wmse(QuadForm& F, const VarLayout& L, const StreamCoeffs& e,
              const std::vector<int>& blocks, int signal, double factor)
{
    const double s = L.scale;
    for (int off : blocks)
        add_hermitian(F.P, off, e.psi, factor * s * s);
    add_real_inner(F.q, signal, e.f, -2.0 * factor * s);
    F.r += factor * (e.t + e.w - e.nu);
}

StreamCoeffs average_coeffs(const ChannelSampleSet& samples, int user, const RVec& w,
                            const CVec& g)
{
    const int M = static_cast<int>(samples.estimate.rows());
    StreamCoeffs c;
    c.psi = CMat::Zero(M, M);
    c.f = CVec::Zero(M);
    const int N = samples.n_samples();
    // With log2 rates, w e - log2 w at w = 1/e is tight but not a lower bound
    // on the rate. Weighting by w/ln2 and shifting nu by 1/ln2 - 1 keeps the
    // value at the current point and makes 1 - xi a true minorizer, so the AO
    // is monotone.
    const double s = 1.0 / std::log(2.0);
    for (int n = 0; n < N; ++n)
    {
        const CVec h = samples.samples[static_cast<std::size_t>(n)].col(user);
        const double wn = s * w(n);
        const double t = wn * std::norm(g(n));
        c.t += t;
        c.psi += t * (h * h.adjoint());
        c.f += wn * std::conj(g(n)) * h;
        c.w += wn;
        c.nu += std::log2(w(n)) + s - 1.0;
    }
    const double inv = 1.0 / N;
    const CMat sym = 0.5 * (c.psi + c.psi.adjoint()) * inv;
    c.psi = sym;
    c.f *= inv;
    c.t *= inv;
    c.w *= inv;
    c.nu *= inv;
    return c;
}

}  // namespace

double receive_power(const CVec& h, const PrecoderSet& pre, Stream stream, Partitioning part)
{
    if (stream == Stream::Zero && part == Partitioning::TP)
        return gain(h, pre.p_zero) + 1.0;
    double T = 1.0;
    for (int j = 0; j < pre.p_private.cols(); ++j)
        T += gain(h, pre.p_private.col(j));
    if (stream == Stream::Private)
        return T;
    T += gain(h, pre.p_common);
    if (stream == Stream::Common)
        return T;
    return T + gain(h, pre.p_zero);
}

double mse(const CVec& h, const PrecoderSet& pre, cplx g, Stream stream, int user,
           Partitioning part)
{
    const double T = receive_power(h, pre, stream, part);
    const cplx hp = h.dot(signal_precoder(pre, stream, user));
    return std::norm(g) * T - 2.0 * std::real(g * hp) + 1.0;
}

cplx mmse_equalizer(const CVec& h, const PrecoderSet& pre, Stream stream, int user,
                    Partitioning part)
{
    const double T = receive_power(h, pre, stream, part);
    return std::conj(h.dot(signal_precoder(pre, stream, user))) / T;
}

double mmse_weight(const CVec& h, const PrecoderSet& pre, Stream stream, int user,
                   Partitioning part)
{
    const double T = receive_power(h, pre, stream, part);
    const double sig = gain(h, signal_precoder(pre, stream, user));
    return T / (T - sig);
}

double wmse(const CVec& h, const PrecoderSet& pre, double w, cplx g, Stream stream, int user,
            Partitioning part)
{
    return w * mse(h, pre, g, stream, user, part) - std::log2(w);
}

RateWmmse rate_wmmse_check(const CVec& h, const PrecoderSet& pre, Stream stream, int user,
                           Partitioning part)
{
    const cplx g = mmse_equalizer(h, pre, stream, user, part);
    const double w = mmse_weight(h, pre, stream, user, part);
    RateWmmse out;
    out.xi_mmse = wmse(h, pre, w, g, stream, user, part);
    out.one_minus_rate = 1.0 - std::log2(1.0 + stream_sinr(h, pre, stream, user, part));
    if (std::abs(out.xi_mmse - out.one_minus_rate) > 1e-9)
        throw std::logic_error("rate/WMMSE identity violated");
    return out;
}

WmmseState mmse_state(const ChannelSampleSet& samples, const PrecoderSet& pre,
                      const SystemConfig& config, Partitioning part)
{
    const int N = samples.n_samples();
    const int M = config.M;
    const int K = config.K;
    WmmseState st;
    st.part = part;
    st.w_zero.assign(static_cast<std::size_t>(K), RVec(N));
    st.g_zero.assign(static_cast<std::size_t>(K), CVec(N));
    st.w_common.assign(static_cast<std::size_t>(M), RVec(N));
    st.g_common.assign(static_cast<std::size_t>(M), CVec(N));
    st.w_priv.assign(static_cast<std::size_t>(M), RVec(N));
    st.g_priv.assign(static_cast<std::size_t>(M), CVec(N));
    for (int n = 0; n < N; ++n)
    {
        const CMat& H = samples.samples[static_cast<std::size_t>(n)];
        for (int k = 0; k < K; ++k)
        {
            const CVec h = H.col(k);
            const auto uk = static_cast<std::size_t>(k);
            st.w_zero[uk](n) = mmse_weight(h, pre, Stream::Zero, k, part);
            st.g_zero[uk](n) = mmse_equalizer(h, pre, Stream::Zero, k, part);
            if (k >= M)
                continue;
            st.w_common[uk](n) = mmse_weight(h, pre, Stream::Common, k, part);
            st.g_common[uk](n) = mmse_equalizer(h, pre, Stream::Common, k, part);
            st.w_priv[uk](n) = mmse_weight(h, pre, Stream::Private, k, part);
            st.g_priv[uk](n) = mmse_equalizer(h, pre, Stream::Private, k, part);
        }
    }
    return st;
}

double awmse(const ChannelSampleSet& samples, const PrecoderSet& pre, const WmmseState& state,
             Stream stream, int user)
{
    const auto u = static_cast<std::size_t>(user);
    const RVec& w = stream == Stream::Zero     ? state.w_zero[u]
                    : stream == Stream::Common ? state.w_common[u]
                                               : state.w_priv[u];
    const CVec& g = stream == Stream::Zero     ? state.g_zero[u]
                    : stream == Stream::Common ? state.g_common[u]
                                               : state.g_priv[u];
    const int N = samples.n_samples();
    double acc = 0.0;
    for (int n = 0; n < N; ++n)
        acc += wmse(samples.samples[static_cast<std::size_t>(n)].col(user), pre, w(n), g(n),
                    stream, user, state.part);
    return acc / N;
}

CoeffBundle assemble_coefficients(const ChannelSampleSet& samples, const WmmseState& state)
{
    CoeffBundle b;
    for (std::size_t k = 0; k < state.w_zero.size(); ++k)
        b.zero.push_back(average_coeffs(samples, static_cast<int>(k), state.w_zero[k], state.g_zero[k]));
    for (std::size_t k = 0; k < state.w_common.size(); ++k)
        b.common.push_back(
            average_coeffs(samples, static_cast<int>(k), state.w_common[k], state.g_common[k]));
    for (std::size_t k = 0; k < state.w_priv.size(); ++k)
        b.priv.push_back(average_coeffs(samples, static_cast<int>(k), state.w_priv[k], state.g_priv[k]));
    return b;
}

VarLayout VarLayout::make(int M, const SubproblemOptions& opt)
{
    VarLayout L;
    L.M = M;
    L.scale = std::sqrt(opt.power);
    int off = 0;
    if (opt.zero)
    {
        L.zero = off;
        off += 2 * M;
    }
    if (opt.common)
    {
        L.common = off;
        off += 2 * M;
    }
    L.priv = off;
    off += 2 * M * M;
    if (opt.common)
    {
        L.xhat = off;
        off += M;
    }
    L.n = off;
    return L;
}

PrecoderSet VarLayout::unpack(const RVec& x) const
{
    auto vec = [&](int off) {
        CVec v(M);
        for (int i = 0; i < M; ++i)
            v(i) = cplx(x(off + i), x(off + M + i)) * scale;
        return v;
    };
    PrecoderSet pre = PrecoderSet::zeros(M);
    if (zero >= 0)
        pre.p_zero = vec(zero);
    if (common >= 0)
        pre.p_common = vec(common);
    for (int k = 0; k < M; ++k)
        pre.p_private.col(k) = vec(private_offset(k));
    if (xhat >= 0)
        pre.common_split = (-x.segment(xhat, M)).cwiseMax(0.0);
    return pre;
}

RVec VarLayout::pack(const PrecoderSet& pre) const
{
    RVec x = RVec::Zero(n);
    auto put = [&](int off, const CVec& v) {
        x.segment(off, M) = v.real() / scale;
        x.segment(off + M, M) = v.imag() / scale;
    };
    if (zero >= 0)
        put(zero, pre.p_zero);
    if (common >= 0)
        put(common, pre.p_common);
    for (int k = 0; k < M; ++k)
        put(private_offset(k), pre.p_private.col(k));
    if (xhat >= 0)
        x.segment(xhat, M) = -pre.common_split;
    return x;
}

int pp_constraint_count(const SystemConfig& config, const SubproblemOptions& opt)
{
    int n = config.M + 1;
    if (opt.zero)
        n += config.num_zero() * (config.M + 1);
    if (opt.common)
        n += config.M;
    return n;
}

PpSubproblem build_pp_subproblem(const CoeffBundle& coeffs, const SystemConfig& config,
                                 const SubproblemOptions& opt)
{
    const SystemConfig c = config.normalized();
    const int M = c.M;
    PpSubproblem out;
    out.layout = VarLayout::make(M, opt);
    const VarLayout& L = out.layout;
    QcqpProblem& qp = out.problem;
    qp.n = L.n;
    qp.objective = QuadForm::zero(L.n);

    std::vector<int> priv_blocks;
    for (int k = 0; k < M; ++k)
        priv_blocks.push_back(L.private_offset(k));
    std::vector<int> common_blocks = priv_blocks;
    if (opt.common)
        common_blocks.push_back(L.common);
    std::vector<int> zero_blocks = common_blocks;
    if (opt.zero)
        zero_blocks.push_back(L.zero);

    auto private_term = [&](int k) {
        QuadForm F = QuadForm::zero(L.n);
        if (opt.common)
            F.q(L.xhat + k) += 1.0;
        add_wmse(F, L, coeffs.priv[static_cast<std::size_t>(k)], priv_blocks, L.private_offset(k), 1.0);
        return F;
    };

    for (int k = 0; k < M; ++k)
    {
        const QuadForm F = private_term(k);
        qp.objective.P += F.P;
        qp.objective.q += F.q;
        qp.objective.r += F.r;
    }
    for (int k = 0; k < M; ++k)
    {
        QuadForm F = private_term(k);
        F.r -= 1.0 - opt.qos_alpha;
        qp.constraints.push_back(std::move(F));
        qp.constraint_names.push_back("qos_alpha_" + std::to_string(k + 1));
    }
    if (opt.zero)
    {
        for (int k = M; k < c.K; ++k)
        {
            const double th = c.theta0(k - M);
            std::vector<int> members;
            for (int i = 0; i < M; ++i)
                members.push_back(i);
            members.push_back(k);
            for (int i : members)
            {
                QuadForm F = QuadForm::zero(L.n);
                add_wmse(F, L, coeffs.zero[static_cast<std::size_t>(i)], zero_blocks, L.zero, th);
                F.r -= th - opt.qos_zero;
                qp.constraints.push_back(std::move(F));
                qp.constraint_names.push_back("qos_zero_" + std::to_string(k + 1) + "_at_" +
                                              std::to_string(i + 1));
            }
        }
    }
    if (opt.common)
    {
        for (int k = 0; k < M; ++k)
        {
            QuadForm F = QuadForm::zero(L.n);
            add_wmse(F, L, coeffs.common[static_cast<std::size_t>(k)], common_blocks, L.common, 1.0);
            F.q.segment(L.xhat, M).array() -= 1.0;
            F.r -= 1.0;
            qp.constraints.push_back(std::move(F));
            qp.constraint_names.push_back("common_" + std::to_string(k + 1));
        }
    }
    {
        QuadForm F = QuadForm::zero(L.n);
        const int np = L.xhat >= 0 ? L.xhat : L.n;
        F.P.topLeftCorner(np, np).setIdentity();
        F.r = -1.0;
        qp.constraints.push_back(std::move(F));
        qp.constraint_names.push_back("power");
    }
    if (opt.common)
    {
        for (int k = 0; k < M; ++k)
        {
            RVec a = RVec::Zero(L.n);
            a(L.xhat + k) = 1.0;
            qp.linear.push_back({a, 0.0});
        }
    }
    return out;
}

QcqpProblem build_tp_zero_subproblem(const CoeffBundle& coeffs, const SystemConfig& config,
                                     double power)
{
    const SystemConfig c = config.normalized();
    const int M = c.M;
    VarLayout L;
    L.M = M;
    L.zero = 0;
    L.n = 2 * M + 1;
    L.scale = std::sqrt(power);
    const int t_idx = 2 * M;

    QcqpProblem qp;
    qp.n = L.n;
    qp.objective = QuadForm::zero(L.n);
    qp.objective.q(t_idx) = -1.0;
    for (int k = M; k < c.K; ++k)
    {
        const double th = c.theta0(k - M);
        QuadForm F = QuadForm::zero(L.n);
        add_wmse(F, L, coeffs.zero[static_cast<std::size_t>(k)], {L.zero}, L.zero, th);
        F.q(t_idx) += 1.0;
        F.r -= th;
        qp.constraints.push_back(std::move(F));
        qp.constraint_names.push_back("maxmin_zero_" + std::to_string(k + 1));
    }
    QuadForm F = QuadForm::zero(L.n);
    F.P.topLeftCorner(2 * M, 2 * M).setIdentity();
    F.r = -1.0;
    qp.constraints.push_back(std::move(F));
    qp.constraint_names.push_back("power");
    return qp;
}

}  // namespace rsma
