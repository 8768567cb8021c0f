#include "rsma/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace rsma {

namespace {

constexpr double kEigClip = 1e-12;
constexpr double kPsdTol = 1e-10;
constexpr double kStepFraction = 0.99;

struct SocBlock
{
    int off;
    int dim;
};

// min c'x  s.t.  G x + s = h,  s in R+^{n_lp} x SOC x ... x SOC
struct ConeLp
{
    RVec c;
    RMat G;
    RVec h;
    int n_lp = 0;
    std::vector<SocBlock> socs;

    int rows() const { return static_cast<int>(G.rows()); }
    int degree() const { return n_lp + static_cast<int>(socs.size()); }
};

// Where each original constraint landed in the cone program.
struct RowMap
{
    enum Kind { Dropped, Lp, Soc };
    Kind kind = Dropped;
    int index = 0;  // LP row or SOC block index
};

struct Lowered
{
    ConeLp lp;
    bool epigraph = false;
    bool trivially_infeasible = false;
    std::vector<RowMap> quad;
    std::vector<RowMap> lin;
};

// P = L' L with eigenvalues below the clip dropped.
RMat psd_factor(const RMat& P, const char* what)
{
    const int n = static_cast<int>(P.rows());
    if (n == 0 || P.cwiseAbs().maxCoeff() == 0.0)
        return RMat(0, n);
    const RMat S = 0.5 * (P + P.transpose());
    Eigen::SelfAdjointEigenSolver<RMat> es(S);
    const RVec& ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -kPsdTol * scale)
        throw std::invalid_argument(std::string("quadratic form is not PSD: ") + what);
    const double clip = kEigClip * scale;
    int r = 0;
    for (int i = 0; i < n; ++i)
        if (ev(i) > clip)
            ++r;
    RMat L(r, n);
    int row = 0;
    for (int i = 0; i < n; ++i)
        if (ev(i) > clip)
            L.row(row++) = std::sqrt(ev(i)) * es.eigenvectors().col(i).transpose();
    return L;
}

Lowered lower(const QcqpProblem& prob)
{
    const int n = prob.n;
    auto check = [n](const QuadForm& f) {
        if (f.P.rows() != n || f.P.cols() != n || f.q.size() != n)
            throw std::invalid_argument("quadratic form has wrong dimension");
    };
    check(prob.objective);
    for (const QuadForm& f : prob.constraints)
        check(f);
    for (const LinearIneq& l : prob.linear)
        if (l.a.size() != n)
            throw std::invalid_argument("linear constraint has wrong dimension");

    Lowered out;
    const RMat Lobj = psd_factor(prob.objective.P, "objective");
    out.epigraph = Lobj.rows() > 0;
    const int nv = n + (out.epigraph ? 1 : 0);

    std::vector<RMat> factors;
    for (std::size_t i = 0; i < prob.constraints.size(); ++i)
        factors.push_back(psd_factor(prob.constraints[i].P, "constraint"));

    std::vector<RVec> lp_rows;
    std::vector<double> lp_rhs;
    auto add_lp = [&](const RVec& a, double b) {
        RVec row = RVec::Zero(nv);
        row.head(n) = a;
        lp_rows.push_back(row);
        lp_rhs.push_back(b);
        return static_cast<int>(lp_rows.size()) - 1;
    };

    for (const LinearIneq& l : prob.linear)
    {
        if (l.a.cwiseAbs().maxCoeff() == 0.0)
        {
            if (l.b < 0.0)
                out.trivially_infeasible = true;
            out.lin.push_back({RowMap::Dropped, 0});
            continue;
        }
        out.lin.push_back({RowMap::Lp, add_lp(l.a, l.b)});
    }
    for (std::size_t i = 0; i < prob.constraints.size(); ++i)
    {
        const QuadForm& f = prob.constraints[i];
        if (factors[i].rows() > 0)
        {
            out.quad.push_back({RowMap::Soc, 0});
            continue;
        }
        if (f.q.cwiseAbs().maxCoeff() == 0.0)
        {
            if (f.r > 0.0)
                out.trivially_infeasible = true;
            out.quad.push_back({RowMap::Dropped, 0});
            continue;
        }
        out.quad.push_back({RowMap::Lp, add_lp(f.q, -f.r)});
    }

    // Each quadratic x'L'Lx + q'x + r <= 0 becomes
    // || (-1 - r - q'x, 2 L x) || <= 1 - r - q'x.
    struct Pending
    {
        RMat L;
        RVec q;
        double r;
    };
    std::vector<Pending> socs;
    if (out.epigraph)
    {
        RVec q = RVec::Zero(nv);
        q.head(n) = prob.objective.q;
        q(n) = -1.0;
        RMat L = RMat::Zero(Lobj.rows(), nv);
        L.leftCols(n) = Lobj;
        socs.push_back({L, q, prob.objective.r});
    }
    for (std::size_t i = 0; i < prob.constraints.size(); ++i)
    {
        if (out.quad[i].kind != RowMap::Soc)
            continue;
        out.quad[i].index = static_cast<int>(socs.size());
        RVec q = RVec::Zero(nv);
        q.head(n) = prob.constraints[i].q;
        RMat L = RMat::Zero(factors[i].rows(), nv);
        L.leftCols(n) = factors[i];
        socs.push_back({L, q, prob.constraints[i].r});
    }

    int m = static_cast<int>(lp_rows.size());
    for (const Pending& p : socs)
        m += static_cast<int>(p.L.rows()) + 2;

    ConeLp& lp = out.lp;
    lp.G = RMat::Zero(m, nv);
    lp.h = RVec::Zero(m);
    lp.c = RVec::Zero(nv);
    if (out.epigraph)
        lp.c(n) = 1.0;
    else
        lp.c.head(n) = prob.objective.q;
    lp.n_lp = static_cast<int>(lp_rows.size());
    for (int i = 0; i < lp.n_lp; ++i)
    {
        lp.G.row(i) = lp_rows[static_cast<std::size_t>(i)].transpose();
        lp.h(i) = lp_rhs[static_cast<std::size_t>(i)];
    }
    int off = lp.n_lp;
    for (const Pending& p : socs)
    {
        const int d = static_cast<int>(p.L.rows()) + 2;
        lp.G.row(off) = p.q.transpose();
        lp.h(off) = 1.0 - p.r;
        lp.G.row(off + 1) = p.q.transpose();
        lp.h(off + 1) = -1.0 - p.r;
        lp.G.block(off + 2, 0, d - 2, nv) = -2.0 * p.L;
        lp.socs.push_back({off, d});
        off += d;
    }
    return out;
}

// Nesterov-Todd scaling, one block per cone.
struct SocScale
{
    double eta = 1.0;
    RVec wb;  // normalized scaling point, wb0^2 - ||wb1||^2 = 1
};

struct Scaling
{
    RVec lp_w;
    std::vector<SocScale> soc;
};

// Applies W (inverse = false) or W^{-1} to the rows of X.
void apply_scaling(const ConeLp& cp, const Scaling& S, RMat& X, bool inverse)
{
    for (int i = 0; i < cp.n_lp; ++i)
        X.row(i) *= inverse ? 1.0 / S.lp_w(i) : S.lp_w(i);
    for (std::size_t b = 0; b < cp.socs.size(); ++b)
    {
        const SocBlock& blk = cp.socs[b];
        const SocScale& sc = S.soc[b];
        const int d = blk.dim;
        const double w0 = sc.wb(0);
        const auto w1 = sc.wb.tail(d - 1);
        auto X0 = X.row(blk.off);
        auto X1 = X.block(blk.off + 1, 0, d - 1, X.cols());
        const Eigen::RowVectorXd x0 = X0;
        const Eigen::RowVectorXd w1x1 = w1.transpose() * X1;
        const double sgn = inverse ? -1.0 : 1.0;
        const double f = inverse ? 1.0 / sc.eta : sc.eta;
        X0 = f * (w0 * x0 + sgn * w1x1);
        X1 = f * (X1 + sgn * w1 * x0 + w1 * (w1x1 / (1.0 + w0)));
    }
}

RVec scaled(const ConeLp& cp, const Scaling& S, const RVec& v, bool inverse)
{
    RMat X = v;
    apply_scaling(cp, S, X, inverse);
    return X.col(0);
}

double soc_residual(const RVec& v) { return v(0) * v(0) - v.tail(v.size() - 1).squaredNorm(); }

Scaling nt_scaling(const ConeLp& cp, const RVec& s, const RVec& z)
{
    Scaling S;
    S.lp_w = RVec(cp.n_lp);
    for (int i = 0; i < cp.n_lp; ++i)
        S.lp_w(i) = std::sqrt(s(i) / z(i));
    for (const SocBlock& blk : cp.socs)
    {
        const RVec sb = s.segment(blk.off, blk.dim);
        const RVec zb = z.segment(blk.off, blk.dim);
        const double sr = std::max(soc_residual(sb), 1e-300);
        const double zr = std::max(soc_residual(zb), 1e-300);
        const RVec sn = sb / std::sqrt(sr);
        const RVec zn = zb / std::sqrt(zr);
        const double gamma = std::sqrt(std::max(0.5 * (1.0 + sn.dot(zn)), 1e-300));
        SocScale sc;
        sc.wb = sn;
        sc.wb(0) += zn(0);
        sc.wb.tail(blk.dim - 1) -= zn.tail(blk.dim - 1);
        sc.wb /= 2.0 * gamma;
        sc.eta = std::pow(sr / zr, 0.25);
        S.soc.push_back(std::move(sc));
    }
    return S;
}

// Jordan product u o v.
RVec cone_prod(const ConeLp& cp, const RVec& u, const RVec& v)
{
    RVec w(u.size());
    w.head(cp.n_lp) = u.head(cp.n_lp).cwiseProduct(v.head(cp.n_lp));
    for (const SocBlock& blk : cp.socs)
    {
        const auto ub = u.segment(blk.off, blk.dim);
        const auto vb = v.segment(blk.off, blk.dim);
        w(blk.off) = ub.dot(vb);
        w.segment(blk.off + 1, blk.dim - 1) =
            ub(0) * vb.tail(blk.dim - 1) + vb(0) * ub.tail(blk.dim - 1);
    }
    return w;
}

// Solves lambda o x = v.
RVec cone_div(const ConeLp& cp, const RVec& lambda, const RVec& v)
{
    RVec x(v.size());
    x.head(cp.n_lp) = v.head(cp.n_lp).cwiseQuotient(lambda.head(cp.n_lp));
    for (const SocBlock& blk : cp.socs)
    {
        const auto l = lambda.segment(blk.off, blk.dim);
        const auto vb = v.segment(blk.off, blk.dim);
        const double l0 = l(0);
        const auto l1 = l.tail(blk.dim - 1);
        const double det = l0 * l0 - l1.squaredNorm();
        const double x0 = (l0 * vb(0) - l1.dot(vb.tail(blk.dim - 1))) / det;
        x(blk.off) = x0;
        x.segment(blk.off + 1, blk.dim - 1) = (vb.tail(blk.dim - 1) - x0 * l1) / l0;
    }
    return x;
}

RVec cone_identity(const ConeLp& cp)
{
    RVec e = RVec::Zero(cp.rows());
    e.head(cp.n_lp).setOnes();
    for (const SocBlock& blk : cp.socs)
        e(blk.off) = 1.0;
    return e;
}

// Largest a such that v + a dv stays in the cone (infinity if unbounded).
double max_step(const ConeLp& cp, const RVec& v, const RVec& dv)
{
    double amax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cp.n_lp; ++i)
        if (dv(i) < 0.0)
            amax = std::min(amax, -v(i) / dv(i));
    for (const SocBlock& blk : cp.socs)
    {
        const RVec x = v.segment(blk.off, blk.dim);
        const RVec d = dv.segment(blk.off, blk.dim);
        const double a = soc_residual(d);
        const double b = 2.0 * (x(0) * d(0) - x.tail(blk.dim - 1).dot(d.tail(blk.dim - 1)));
        const double c = std::max(soc_residual(x), 0.0);
        // Smallest positive root of a t^2 + b t + c.
        double t = std::numeric_limits<double>::infinity();
        if (std::abs(a) < 1e-300)
        {
            if (b < 0.0)
                t = -c / b;
        }
        else
        {
            const double disc = b * b - 4.0 * a * c;
            if (disc >= 0.0)
            {
                const double sq = std::sqrt(disc);
                const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
                const double r1 = qq / a;
                const double r2 = qq != 0.0 ? c / qq : std::numeric_limits<double>::infinity();
                for (double r : {r1, r2})
                    if (r > 0.0)
                        t = std::min(t, r);
            }
        }
        if (d(0) < 0.0)
            t = std::min(t, -x(0) / d(0));
        amax = std::min(amax, t);
    }
    return amax;
}

// Pushes v into the cone interior if needed.
RVec shift_into_cone(const ConeLp& cp, const RVec& v)
{
    double need = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < cp.n_lp; ++i)
        need = std::max(need, -v(i));
    for (const SocBlock& blk : cp.socs)
        need = std::max(need, v.segment(blk.off + 1, blk.dim - 1).norm() - v(blk.off));
    if (need < 0.0)
        return v;
    return v + (1.0 + need) * cone_identity(cp);
}

// Factorization of G' W^{-2} G via QR of the scaled G.
class NormalSolver
{
public:
    NormalSolver(const RMat& Gs)
    {
        const int n = static_cast<int>(Gs.cols());
        const double reg = 1e-13 * std::max(1.0, Gs.cwiseAbs().maxCoeff());
        RMat A(Gs.rows() + n, n);
        A << Gs, reg * RMat::Identity(n, n);
        Eigen::HouseholderQR<RMat> qr(A);
        R_ = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    }

    RVec solve(const RVec& b) const
    {
        RVec y = R_.transpose().triangularView<Eigen::Lower>().solve(b);
        return R_.triangularView<Eigen::Upper>().solve(y);
    }

private:
    RMat R_;
};

struct Direction
{
    RVec dx, dz, ds;
    double dtau = 0.0, dkappa = 0.0;
};

double stationarity_norm(const QcqpProblem& prob, const RVec& x, const RVec& lam, const RVec& mu)
{
    RVec g = prob.objective.grad(x);
    for (std::size_t i = 0; i < prob.constraints.size(); ++i)
        g += lam(static_cast<int>(i)) * prob.constraints[i].grad(x);
    for (std::size_t i = 0; i < prob.linear.size(); ++i)
        g += mu(static_cast<int>(i)) * prob.linear[i].a;
    return g.size() > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
}

// The cone duals only determine the original multipliers up to the square
// root of the residual gap, so refit them by least squares on the active set.
void polish_multipliers(const QcqpProblem& prob, QcqpSolution& sol)
{
    const int nq = static_cast<int>(prob.constraints.size());
    const int nl = static_cast<int>(prob.linear.size());
    if (nq + nl == 0 || prob.n == 0)
        return;
    const RVec& x = sol.x;
    double big = 1.0;
    for (int i = 0; i < nq; ++i)
        big = std::max(big, sol.multipliers(i));
    for (int i = 0; i < nl; ++i)
        big = std::max(big, sol.linear_multipliers(i));

    std::vector<int> active;
    std::vector<RVec> grads;
    for (int i = 0; i < nq; ++i)
    {
        if (sol.multipliers(i) > 1e-7 * big)
        {
            active.push_back(i);
            grads.push_back(prob.constraints[static_cast<std::size_t>(i)].grad(x));
        }
    }
    for (int i = 0; i < nl; ++i)
    {
        if (sol.linear_multipliers(i) > 1e-7 * big)
        {
            active.push_back(nq + i);
            grads.push_back(prob.linear[static_cast<std::size_t>(i)].a);
        }
    }
    const RVec g0 = prob.objective.grad(x);
    while (!active.empty())
    {
        RMat J(prob.n, static_cast<int>(active.size()));
        for (std::size_t j = 0; j < active.size(); ++j)
            J.col(static_cast<int>(j)) = grads[j];
        const RVec lam = J.colPivHouseholderQr().solve(-g0);
        int worst = -1;
        for (int j = 0; j < lam.size(); ++j)
            if (lam(j) < 0.0 && (worst < 0 || lam(j) < lam(worst)))
                worst = j;
        if (worst >= 0)
        {
            active.erase(active.begin() + worst);
            grads.erase(grads.begin() + worst);
            continue;
        }
        RVec ql = RVec::Zero(nq);
        RVec ll = RVec::Zero(nl);
        for (std::size_t j = 0; j < active.size(); ++j)
        {
            const int idx = active[j];
            if (idx < nq)
                ql(idx) = lam(static_cast<int>(j));
            else
                ll(idx - nq) = lam(static_cast<int>(j));
        }
        if (stationarity_norm(prob, x, ql, ll) <
            stationarity_norm(prob, x, sol.multipliers, sol.linear_multipliers))
        {
            sol.multipliers = ql;
            sol.linear_multipliers = ll;
        }
        return;
    }
}

}  // namespace

QuadForm QuadForm::zero(int n) { return {RMat::Zero(n, n), RVec::Zero(n), 0.0}; }

const char* to_string(QcqpStatus s)
{
    switch (s)
    {
    case QcqpStatus::Optimal:
        return "optimal";
    case QcqpStatus::Infeasible:
        return "infeasible";
    case QcqpStatus::MaxIter:
        return "max_iter";
    case QcqpStatus::Unbounded:
        return "unbounded";
    }
    return "unknown";
}

QcqpSolution solve(const QcqpProblem& problem, const QcqpTolerances& tol)
{
    const Lowered low = lower(problem);
    const ConeLp& cp = low.lp;
    const int n = problem.n;
    const int nv = static_cast<int>(cp.c.size());
    const int m = cp.rows();

    QcqpSolution sol;
    sol.x = RVec::Zero(n);
    sol.multipliers = RVec::Zero(static_cast<int>(problem.constraints.size()));
    sol.linear_multipliers = RVec::Zero(static_cast<int>(problem.linear.size()));
    if (low.trivially_infeasible)
    {
        sol.status = QcqpStatus::Infeasible;
        return sol;
    }

    auto finish = [&](const RVec& x, const RVec& z, double tau, QcqpStatus status, double gap,
                      int it) {
        sol.status = status;
        sol.iterations = it;
        sol.duality_gap = gap;
        sol.x = x.head(n) / tau;
        sol.objective_value = problem.objective.eval(sol.x);
        for (std::size_t i = 0; i < low.quad.size(); ++i)
        {
            const RowMap& rm = low.quad[i];
            if (rm.kind == RowMap::Lp)
                sol.multipliers(static_cast<int>(i)) = z(rm.index) / tau;
            else if (rm.kind == RowMap::Soc)
            {
                const int off = cp.socs[static_cast<std::size_t>(rm.index)].off;
                sol.multipliers(static_cast<int>(i)) = (z(off) + z(off + 1)) / tau;
            }
        }
        for (std::size_t i = 0; i < low.lin.size(); ++i)
            if (low.lin[i].kind == RowMap::Lp)
                sol.linear_multipliers(static_cast<int>(i)) = z(low.lin[i].index) / tau;
        if (status == QcqpStatus::Optimal)
            polish_multipliers(problem, sol);
        return sol;
    };

    if (m == 0)
    {
        // Unconstrained: only a pure quadratic objective can be bounded.
        const RMat& P = problem.objective.P;
        Eigen::LDLT<RMat> ldlt(2.0 * P);
        RVec x = RVec::Zero(nv);
        if (n > 0)
        {
            x.head(n) = ldlt.solve(-problem.objective.q);
            if (((2.0 * P) * x.head(n) + problem.objective.q).norm() >
                tol.feas * std::max(1.0, problem.objective.q.norm()))
                return finish(RVec::Zero(nv), RVec::Zero(0), 1.0, QcqpStatus::Unbounded, 0.0, 0);
        }
        return finish(x, RVec::Zero(0), 1.0, QcqpStatus::Optimal, 0.0, 0);
    }

    const RMat& G = cp.G;
    const RVec& h = cp.h;
    const RVec& c = cp.c;
    const RVec e = cone_identity(cp);
    const double hnorm = std::max(1.0, h.norm());
    const double cnorm = std::max(1.0, c.norm());
    const double degree = static_cast<double>(cp.degree());

    // Least-squares starting point with both slacks pushed into the cone.
    RVec x, s, z;
    {
        const NormalSolver ns(G);
        x = ns.solve(G.transpose() * h);
        s = shift_into_cone(cp, h - G * x);
        z = shift_into_cone(cp, -G * ns.solve(c));
    }
    double tau = 1.0, kappa = 1.0;

    RVec best_x = x;
    RVec best_z = z;
    double best_tau = tau;
    double best_score = std::numeric_limits<double>::infinity();
    double best_gap = 0.0;
    bool best_near = false;
    int since_best = 0;
    int last_it = 0;
    // Near-optimal within a decade of the tolerances; accepted once progress stalls.
    auto near_optimal = [&](double pres, double dres, double relgap) {
        return pres <= 10.0 * tol.feas && dres <= 10.0 * tol.feas && relgap <= 10.0 * tol.rel_gap;
    };

    for (int it = 0; it <= tol.max_iter; ++it)
    {
        last_it = it;
        const RVec rx = G.transpose() * z + c * tau;
        const RVec rz = G * x + s - h * tau;
        const double cx = c.dot(x);
        const double hz = h.dot(z);
        const double rt = kappa + cx + hz;

        const double pres = rz.norm() / tau / hnorm;
        const double dres = rx.norm() / tau / cnorm;
        const double pcost = cx / tau;
        const double gap = s.dot(z) / (tau * tau);
        const double relgap = gap / std::max(1.0, std::abs(pcost));

        const double score = std::max({pres, dres, relgap});
        if (!std::isfinite(score))
            break;
        if (score < best_score)
        {
            best_score = score;
            best_x = x;
            best_z = z;
            best_tau = tau;
            best_gap = gap;
            best_near = near_optimal(pres, dres, relgap);
            since_best = 0;
        }
        else if (++since_best >= 3 && best_near)
        {
            break;
        }
        if (pres <= tol.feas && dres <= tol.feas && relgap <= tol.rel_gap)
            return finish(x, z, tau, QcqpStatus::Optimal, gap, it);
        if (hz < 0.0 && (G.transpose() * z).norm() / cnorm <= tol.feas * -hz)
            return finish(best_x, best_z, best_tau, QcqpStatus::Infeasible, best_gap, it);
        if (cx < 0.0 && (G * x + s).norm() / hnorm <= tol.feas * -cx)
            return finish(best_x, best_z, best_tau, QcqpStatus::Unbounded, best_gap, it);
        if (it == tol.max_iter)
            break;

        const Scaling S = nt_scaling(cp, s, z);
        const RVec lambda = scaled(cp, S, z, false);
        RMat Gs = G;
        apply_scaling(cp, S, Gs, true);
        const NormalSolver ns(Gs);

        // Direction for the tau column, solved once per iteration.
        const RVec hs = scaled(cp, S, h, true);
        const RVec x1 = ns.solve(-c + Gs.transpose() * hs);
        const RVec z1 = scaled(cp, S, Gs * x1 - hs, true);
        const double denom = -kappa / tau + c.dot(x1) + h.dot(z1);

        auto direction = [&](double sigma, const RVec& ds_target, double dk_target) {
            Direction d;
            const RVec w = scaled(cp, S, cone_div(cp, lambda, ds_target), false);
            const RVec bz = -(1.0 - sigma) * rz - w;
            const RVec bx = -(1.0 - sigma) * rx;
            const RVec bzs = scaled(cp, S, bz, true);
            const RVec x2 = ns.solve(bx + Gs.transpose() * bzs);
            const RVec z2 = scaled(cp, S, Gs * x2 - bzs, true);
            d.dtau = (-(1.0 - sigma) * rt - dk_target / tau - c.dot(x2) - h.dot(z2)) / denom;
            d.dx = x2 + d.dtau * x1;
            d.dz = z2 + d.dtau * z1;
            // Taken from the linearized primal residual rather than the
            // complementarity row; algebraically equal, numerically exact.
            d.ds = -(1.0 - sigma) * rz - G * d.dx + h * d.dtau;
            d.dkappa = (dk_target - kappa * d.dtau) / tau;
            return d;
        };

        auto step_to_boundary = [&](const Direction& d) {
            double a = std::min(max_step(cp, s, d.ds), max_step(cp, z, d.dz));
            if (d.dtau < 0.0)
                a = std::min(a, -tau / d.dtau);
            if (d.dkappa < 0.0)
                a = std::min(a, -kappa / d.dkappa);
            return a;
        };

        const RVec ll = cone_prod(cp, lambda, lambda);
        const Direction aff = direction(0.0, -ll, -tau * kappa);
        const double a_aff = std::min(1.0, step_to_boundary(aff));
        const double sigma = std::clamp(std::pow(1.0 - a_aff, 3), 0.0, 1.0);
        const double mu = (s.dot(z) + tau * kappa) / (degree + 1.0);

        // Mehrotra second-order correction in the scaled space.
        const RVec ds_aff = scaled(cp, S, aff.ds, true);
        const RVec dz_aff = scaled(cp, S, aff.dz, false);
        const RVec target = -ll - cone_prod(cp, ds_aff, dz_aff) + sigma * mu * e;
        const double dk = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        const Direction d = direction(sigma, target, dk);

        const double a = std::min(1.0, kStepFraction * step_to_boundary(d));
        if (!(a > 1e-14))
            break;
        x += a * d.dx;
        s += a * d.ds;
        z += a * d.dz;
        tau += a * d.dtau;
        kappa += a * d.dkappa;
    }
    return finish(best_x, best_z, best_tau, best_near ? QcqpStatus::Optimal : QcqpStatus::MaxIter,
                  best_gap, last_it);
}

KktReport verify_kkt(const QcqpProblem& problem, const QcqpSolution& solution)
{
    KktReport rep;
    const RVec& x = solution.x;
    RVec g = problem.objective.grad(x);
    for (std::size_t i = 0; i < problem.constraints.size(); ++i)
    {
        const QuadForm& f = problem.constraints[i];
        const double lam = solution.multipliers(static_cast<int>(i));
        const double v = f.eval(x);
        g += lam * f.grad(x);
        rep.complementarity = std::max(rep.complementarity, std::abs(lam * v));
        rep.primal_violation = std::max(rep.primal_violation, v);
        rep.dual_violation = std::max(rep.dual_violation, -lam);
    }
    for (std::size_t i = 0; i < problem.linear.size(); ++i)
    {
        const LinearIneq& l = problem.linear[i];
        const double mu = solution.linear_multipliers(static_cast<int>(i));
        const double v = l.a.dot(x) - l.b;
        g += mu * l.a;
        rep.complementarity = std::max(rep.complementarity, std::abs(mu * v));
        rep.primal_violation = std::max(rep.primal_violation, v);
        rep.dual_violation = std::max(rep.dual_violation, -mu);
    }
    rep.stationarity = g.size() > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
    return rep;
}

void dump_problem(const QcqpProblem& problem, std::ostream& os)
{
    const Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, " ", "\n");
    auto form = [&](const char* tag, const std::string& name, const QuadForm& f) {
        os << tag << ' ' << name << '\n';
        os << "P\n" << f.P.format(fmt) << "\nq\n" << f.q.transpose().format(fmt) << "\nr\n"
           << f.r << '\n';
    };
    os << "qcqp n " << problem.n << " quad " << problem.constraints.size() << " linear "
       << problem.linear.size() << '\n';
    form("minimize", "objective", problem.objective);
    for (std::size_t i = 0; i < problem.constraints.size(); ++i)
    {
        const std::string name =
            i < problem.constraint_names.size() ? problem.constraint_names[i] : "c" + std::to_string(i);
        form("subject_to", name, problem.constraints[i]);
    }
    for (std::size_t i = 0; i < problem.linear.size(); ++i)
        os << "linear " << problem.linear[i].a.transpose().format(fmt) << " <= "
           << problem.linear[i].b << '\n';
}

}  // namespace rsma
