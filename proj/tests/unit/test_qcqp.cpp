#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "rsma/qcqp.hpp"
#include "rsma/random.hpp"

using namespace rsma;

namespace {

QuadForm form(int n) { return QuadForm::zero(n); }

bool feasible(const QcqpProblem& p, const RVec& x, double tol)
{
    for (const QuadForm& f : p.constraints)
        if (f.eval(x) > tol)
            return false;
    for (const LinearIneq& l : p.linear)
        if (l.a.dot(x) - l.b > tol)
            return false;
    return true;
}

// Zooming grid search: 7 points per axis, window shrunk around the incumbent.
double grid_oracle(const QcqpProblem& p, RVec lo, RVec hi)
{
    const int n = p.n;
    const int pts = 7;
    double best = std::numeric_limits<double>::infinity();
    RVec best_x = 0.5 * (lo + hi);
    for (int level = 0; level < 40; ++level)
    {
        const RVec step = (hi - lo) / (pts - 1);
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        RVec x(n);
        for (;;)
        {
            for (int i = 0; i < n; ++i)
                x(i) = lo(i) + idx[static_cast<std::size_t>(i)] * step(i);
            if (feasible(p, x, 0.0))
            {
                const double v = p.objective.eval(x);
                if (v < best)
                {
                    best = v;
                    best_x = x;
                }
            }
            int d = 0;
            while (d < n && ++idx[static_cast<std::size_t>(d)] == pts)
                idx[static_cast<std::size_t>(d++)] = 0;
            if (d == n)
                break;
        }
        const RVec half = 0.6 * (hi - lo) / 2.0;
        if (half.maxCoeff() < 1e-7)
            break;
        lo = best_x - half;
        hi = best_x + half;
    }
    return best;
}

RMat random_psd(Philox4x32& rng, int n, int rank, double shift)
{
    RMat B(n, rank);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < rank; ++j)
            B(i, j) = rng.normal();
    return B * B.transpose() / rank + shift * RMat::Identity(n, n);
}

}  // namespace

TEST_CASE("scalar textbook instance")
{
    QcqpProblem p;
    p.n = 1;
    p.objective = form(1);
    p.objective.P(0, 0) = 1.0;
    RVec a(1);
    a(0) = -1.0;
    p.linear.push_back({a, -1.0});
    const QcqpSolution s = solve(p);
    CHECK(s.status == QcqpStatus::Optimal);
    CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-7));
    const KktReport k = verify_kkt(p, s);
    CHECK(k.stationarity < 1e-8);
    CHECK(k.complementarity < 1e-8);
    CHECK(k.primal_violation < 1e-8);
    CHECK(k.dual_violation < 1e-8);

    QcqpSolution off = s;
    off.x(0) = 1.5;
    CHECK(verify_kkt(p, off).stationarity > 0.1);
}

TEST_CASE("projection onto a disk")
{
    QcqpProblem p;
    p.n = 2;
    p.objective = form(2);
    p.objective.P.setIdentity();
    p.objective.q << -6.0, 2.0;
    p.objective.r = 10.0;
    QuadForm disk = form(2);
    disk.P.setIdentity();
    disk.r = -4.0;
    p.constraints.push_back(disk);
    const QcqpSolution s = solve(p);
    REQUIRE(s.status == QcqpStatus::Optimal);
    const double expect = std::pow(std::sqrt(10.0) - 2.0, 2);
    CHECK(s.objective_value == doctest::Approx(expect).epsilon(1e-7));
    // Minimizer is 2 (3,-1)/sqrt(10).
    CHECK(s.x(0) == doctest::Approx(6.0 / std::sqrt(10.0)).epsilon(1e-4));
    CHECK(s.x(1) == doctest::Approx(-2.0 / std::sqrt(10.0)).epsilon(1e-4));
    // Multiplier from 2(x - c) + 2 lambda x = 0.
    CHECK(s.multipliers(0) == doctest::Approx(std::sqrt(10.0) / 2.0 - 1.0).epsilon(1e-4));
    CHECK(verify_kkt(p, s).stationarity < 1e-4);
}

TEST_CASE("infeasible and unbounded instances")
{
    QcqpProblem p;
    p.n = 1;
    p.objective = form(1);
    p.objective.P(0, 0) = 1.0;
    QuadForm f = form(1);
    f.P(0, 0) = 1.0;
    f.r = 1.0;
    p.constraints.push_back(f);
    CHECK(solve(p).status == QcqpStatus::Infeasible);

    QcqpProblem two;
    two.n = 2;
    two.objective = form(2);
    QuadForm a = form(2), b = form(2);
    a.P.setIdentity();
    a.q << -4.0, 0.0;
    a.r = 3.0;  // disk of radius 1 at (2, 0)
    b.P.setIdentity();
    b.q << 4.0, 0.0;
    b.r = 3.0;  // disk of radius 1 at (-2, 0)
    two.constraints = {a, b};
    CHECK(solve(two).status == QcqpStatus::Infeasible);

    QcqpProblem u;
    u.n = 1;
    u.objective = form(1);
    u.objective.q(0) = -1.0;
    RVec s(1);
    s(0) = -1.0;
    u.linear.push_back({s, 0.0});
    CHECK(solve(u).status == QcqpStatus::Unbounded);
}

TEST_CASE("input validation")
{
    QcqpProblem p;
    p.n = 2;
    p.objective = form(2);
    p.objective.P << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(solve(p), std::invalid_argument);
    p.objective.P.setIdentity();
    p.constraints.push_back(form(3));
    CHECK_THROWS_AS(solve(p), std::invalid_argument);
}

TEST_CASE("random 6-variable convex QCQPs against a grid oracle")
{
    Philox4x32 rng(2024);
    const int n = 6;
    for (int trial = 0; trial < 3; ++trial)
    {
        QcqpProblem p;
        p.n = n;
        p.objective = form(n);
        p.objective.P = random_psd(rng, n, 3, 0.0);
        for (int i = 0; i < n; ++i)
            p.objective.q(i) = 3.0 * rng.normal();

        // Ellipsoid around the origin bounds the search box.
        QuadForm e = form(n);
        e.P = random_psd(rng, n, n, 0.5);
        e.r = -1.0;
        p.constraints.push_back(e);
        QuadForm g = form(n);
        g.P = random_psd(rng, n, 2, 0.1);
        for (int i = 0; i < n; ++i)
            g.q(i) = 0.3 * rng.normal();
        g.r = -0.5;
        p.constraints.push_back(g);

        const QcqpSolution s = solve(p);
        REQUIRE(s.status == QcqpStatus::Optimal);
        CHECK(feasible(p, s.x, 1e-7));

        const RVec half = e.P.inverse().diagonal().cwiseSqrt();
        const double oracle = grid_oracle(p, -half, half);
        CHECK(s.objective_value <= oracle + 1e-6);
        CHECK(s.objective_value == doctest::Approx(oracle).epsilon(1e-3).scale(1.0));
    }
}

TEST_CASE("problem dump")
{
    QcqpProblem p;
    p.n = 1;
    p.objective = form(1);
    p.objective.P(0, 0) = 2.0;
    QuadForm f = form(1);
    f.r = -1.0;
    p.constraints.push_back(f);
    p.constraint_names.push_back("dummy");
    std::ostringstream os;
    dump_problem(p, os);
    const std::string text = os.str();
    CHECK(text.rfind("qcqp n 1 quad 1 linear 0", 0) == 0);
    CHECK(text.find("dummy") != std::string::npos);
}
