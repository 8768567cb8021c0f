#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rsma/types.hpp"

namespace rsma {

// f(x) = x' P x + q' x + r with P symmetric PSD.
struct QuadForm
{
    RMat P;
    RVec q;
    double r = 0.0;

    static QuadForm zero(int n);
    double eval(const RVec& x) const { return x.dot(P * x) + q.dot(x) + r; }
    RVec grad(const RVec& x) const { return 2.0 * (P * x) + q; }
};

// a' x <= b
struct LinearIneq
{
    RVec a;
    double b = 0.0;
};

struct QcqpProblem
{
    int n = 0;
    QuadForm objective;
    std::vector<QuadForm> constraints;  // f_i(x) <= 0
    std::vector<LinearIneq> linear;     // box and sign constraints
    std::vector<std::string> constraint_names;
};

struct QcqpTolerances
{
    double feas = 1e-8;
    double rel_gap = 1e-7;
    int max_iter = 200;
};

enum class QcqpStatus { Optimal, Infeasible, MaxIter, Unbounded };

struct QcqpSolution
{
    RVec x;
    double objective_value = 0.0;
    QcqpStatus status = QcqpStatus::MaxIter;
    double duality_gap = 0.0;
    int iterations = 0;
    RVec multipliers;         // one per quadratic constraint
    RVec linear_multipliers;  // one per linear constraint
};

struct KktReport
{
    double stationarity = 0.0;     // ||grad L||_inf
    double complementarity = 0.0;  // max |lambda_i f_i(x)|
    double primal_violation = 0.0; // max(0, f_i(x))
    double dual_violation = 0.0;   // max(0, -lambda_i)
};

const char* to_string(QcqpStatus s);

// Primal-dual interior-point method on the second-order-cone reformulation.
// Throws std::invalid_argument for non-PSD or mis-sized input.
QcqpSolution solve(const QcqpProblem& problem, const QcqpTolerances& tol = {});

KktReport verify_kkt(const QcqpProblem& problem, const QcqpSolution& solution);

// Plain-text dump: dimensions, then each form as dense P, q, r blocks.
void dump_problem(const QcqpProblem& problem, std::ostream& os);

}  // namespace rsma
