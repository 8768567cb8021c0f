#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rsma {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Thrown when a channel estimate is too ill-conditioned for zero-forcing.
class DegenerateChannel : public std::runtime_error
{
public:
    explicit DegenerateChannel(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rsma
