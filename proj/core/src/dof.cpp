#include "rsma/dof.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rsma {

DofPowerAllocation DofPowerAllocation::matched(double alpha, double theta)
{
    return {theta, std::min(alpha, theta), theta};
}

DofTuple dof_tp(const SystemConfig& config, double theta)
{
    const SystemConfig c = config.normalized();
    DofTuple t{RVec::Zero(c.K)};
    const double da = theta * (1.0 + (c.M - 1) * c.alpha) / c.M;
    const double d0 = (1.0 - theta) / c.num_zero();
    for (int k = 0; k < c.K; ++k)
        t.d(k) = c.is_alpha_user(k) ? da : d0;
    return t;
}

DofTuple dof_pp(const SystemConfig& config, double beta)
{
    const SystemConfig c = config.normalized();
    DofTuple t{RVec::Zero(c.K)};
    const double da = (beta + (c.M - 1) * std::min(c.alpha, beta)) / c.M;
    const double d0 = (1.0 - beta) / c.num_zero();
    for (int k = 0; k < c.K; ++k)
        t.d(k) = c.is_alpha_user(k) ? da : d0;
    return t;
}

RVec dof_gain_pp_over_tp(const SystemConfig& config, double theta)
{
    return dof_pp(config, theta).d - dof_tp(config, theta).d;
}

DofRegion dof_region(const SystemConfig& config)
{
    const SystemConfig c = config.normalized();
    DofRegion r;
    r.m = c.M;
    r.k = c.K;
    r.alpha = c.alpha;
    const unsigned count = 1u << c.M;
    for (unsigned mask = 1; mask < count; ++mask)
    {
        HalfSpace h;
        h.a = RVec::Zero(c.K);
        for (int i = 0; i < c.M; ++i)
            if (mask & (1u << i))
            {
                h.a(i) = 1.0;
                h.subset.push_back(i);
            }
        h.a.tail(c.num_zero()).setOnes();
        h.b = 1.0 + (static_cast<double>(h.subset.size()) - 1.0) * c.alpha;
        r.halfspaces.push_back(std::move(h));
    }
    return r;
}

std::string DofRegion::to_text() const
{
    std::ostringstream os;
    for (const HalfSpace& h : halfspaces)
    {
        bool first = true;
        for (int i = 0; i < h.a.size(); ++i)
        {
            if (h.a(i) == 0.0)
                continue;
            os << (first ? "" : " + ") << 'd' << (i + 1);
            first = false;
        }
        os << " <= " << h.b << '\n';
    }
    for (int i = 0; i < k; ++i)
        os << 'd' << (i + 1) << " >= 0\n";
    return os.str();
}

MembershipReport region_contains(const DofRegion& region, const DofTuple& tuple, double tol)
{
    if (tuple.d.size() != region.k)
        throw std::invalid_argument("tuple dimension does not match region");
    MembershipReport rep;
    rep.inside = true;
    for (std::size_t i = 0; i < region.halfspaces.size(); ++i)
    {
        const HalfSpace& h = region.halfspaces[i];
        const double s = h.b - h.a.dot(tuple.d);
        rep.slack.push_back(s);
        if (s < -tol)
            rep.inside = false;
        if (std::abs(s) <= tol)
            rep.tight.push_back(static_cast<int>(i));
    }
    for (int i = 0; i < region.k; ++i)
    {
        rep.slack.push_back(tuple.d(i));
        if (tuple.d(i) < -tol)
            rep.inside = false;
    }
    return rep;
}

double sum_dof_upper_bound(const SystemConfig& config, const std::vector<int>& subset_u)
{
    const SystemConfig c = config.normalized();
    int n_alpha = 0;
    for (int u : subset_u)
    {
        if (u < 0 || u >= c.K)
            throw std::invalid_argument("user index out of range");
        if (c.is_alpha_user(u))
            ++n_alpha;
    }
    return 1.0 + c.alpha * std::max(0, n_alpha - 1);
}

std::vector<RVec> region_vertices(const DofRegion& region)
{
    const int K = region.k;
    if (K > 6)
        throw std::invalid_argument("vertex enumeration is limited to K <= 6");

    // All constraints as rows of A d <= b, nonnegativity written as -d <= 0.
    std::vector<RVec> rows;
    std::vector<double> rhs;
    for (const HalfSpace& h : region.halfspaces)
    {
        rows.push_back(h.a);
        rhs.push_back(h.b);
    }
    for (int i = 0; i < K; ++i)
    {
        RVec e = RVec::Zero(K);
        e(i) = -1.0;
        rows.push_back(e);
        rhs.push_back(0.0);
    }

    const int n = static_cast<int>(rows.size());
    std::vector<RVec> out;
    std::vector<int> pick(static_cast<std::size_t>(K));
    std::iota(pick.begin(), pick.end(), 0);
    for (;;)
    {
        RMat A(K, K);
        RVec b(K);
        for (int i = 0; i < K; ++i)
        {
            A.row(i) = rows[static_cast<std::size_t>(pick[i])].transpose();
            b(i) = rhs[static_cast<std::size_t>(pick[i])];
        }
        Eigen::FullPivLU<RMat> lu(A);
        if (lu.isInvertible())
        {
            const RVec v = lu.solve(b);
            bool ok = true;
            for (int j = 0; j < n && ok; ++j)
                ok = rows[static_cast<std::size_t>(j)].dot(v) <= rhs[static_cast<std::size_t>(j)] + 1e-9;
            const bool dup = std::any_of(out.begin(), out.end(),
                                         [&](const RVec& w) { return (w - v).norm() < 1e-9; });
            if (ok && !dup)
                out.push_back(v);
        }
        // Next K-combination of n rows.
        int i = K - 1;
        while (i >= 0 && pick[i] == n - K + i)
            --i;
        if (i < 0)
            break;
        ++pick[i];
        for (int j = i + 1; j < K; ++j)
            pick[j] = pick[j - 1] + 1;
    }
    return out;
}

PrecoderSet low_complexity_precoders(const ChannelRealization& realization,
                                     const SystemConfig& config, Partitioning scheme,
                                     const DofPowerAllocation& alloc)
{
    const SystemConfig c = config.normalized();
    if (alloc.tau > alloc.beta + 1e-12)
        throw std::invalid_argument("allocation requires tau <= beta");
    const int M = c.M;
    const double P = c.snr_linear();

    const CMat Ha = realization.h_est.leftCols(M);
    const Eigen::JacobiSVD<CMat> svd(Ha);
    const RVec sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-10 * std::max(1.0, sv(0)))
        throw DegenerateChannel("rank-deficient alpha-user channel estimate");

    // Columns of Ha (Ha^H Ha)^{-1}: column k is orthogonal to every other estimate.
    const CMat Z = Ha * (Ha.adjoint() * Ha).inverse();

    PrecoderSet pre = PrecoderSet::zeros(M);
    CVec e1 = CVec::Zero(M);
    e1(0) = 1.0;

    double p0, pc, pk_total;
    if (scheme == Partitioning::TP)
    {
        p0 = P;
        pc = P - std::pow(P, c.alpha);
        pk_total = std::pow(P, c.alpha);
        pre.tp_factor = alloc.theta;
    }
    else
    {
        p0 = P - std::pow(P, alloc.beta);
        pc = std::pow(P, alloc.beta) - std::pow(P, alloc.tau);
        pk_total = std::pow(P, alloc.tau);
    }
    pre.p_zero = std::sqrt(std::max(p0, 0.0)) * e1;
    pre.p_common = std::sqrt(std::max(pc, 0.0)) * e1;
    for (int k = 0; k < M; ++k)
        pre.p_private.col(k) = std::sqrt(pk_total / M) * Z.col(k).normalized();
    return pre;
}

double measure_dof_slope(const std::vector<std::pair<double, double>>& esr_points)
{
    if (esr_points.size() < 2)
        throw std::invalid_argument("slope needs at least two points");
    const double n = static_cast<double>(esr_points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [db, r] : esr_points)
    {
        mx += db * std::log2(10.0) / 10.0;
        my += r;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [db, r] : esr_points)
    {
        const double x = db * std::log2(10.0) / 10.0 - mx;
        sxy += x * (r - my);
        sxx += x * x;
    }
    if (sxx == 0.0)
        throw std::invalid_argument("slope needs distinct SNR points");
    return sxy / sxx;
}

}  // namespace rsma
