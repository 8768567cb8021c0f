#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/ratemodel.hpp"
#include "rsma/types.hpp"

namespace rsma {

struct DofTuple
{
    RVec d;
};

struct HalfSpace
{
    RVec a;  // 0/1 coefficients over the K users
    double b = 0.0;
    std::vector<int> subset;  // generating S within the alpha-users, zero-based
};

struct DofRegion
{
    int m = 0;
    int k = 0;
    double alpha = 0.0;
    std::vector<HalfSpace> halfspaces;

    // One inequality per line, e.g. "d1 + d3 <= 1".
    std::string to_text() const;
};

struct MembershipReport
{
    bool inside = false;
    // b - a.d per half-space, then d_k per user (nonnegativity slack).
    std::vector<double> slack;
    std::vector<int> tight;  // indices of tight half-spaces (|slack| <= tol)
};

struct DofPowerAllocation
{
    double beta = 0.5;
    double tau = 0.5;
    double theta = 0.5;

    static DofPowerAllocation matched(double alpha, double theta);
};

DofTuple dof_tp(const SystemConfig& config, double theta);
DofTuple dof_pp(const SystemConfig& config, double beta);
RVec dof_gain_pp_over_tp(const SystemConfig& config, double theta);

DofRegion dof_region(const SystemConfig& config);
MembershipReport region_contains(const DofRegion& region, const DofTuple& tuple,
                                 double tol = 1e-12);

// subset_u holds zero-based user indices.
double sum_dof_upper_bound(const SystemConfig& config, const std::vector<int>& subset_u);

// Vertices of the region; limited to K <= 6.
std::vector<RVec> region_vertices(const DofRegion& region);

// Fixed-direction common layers plus zero-forcing private precoders.
PrecoderSet low_complexity_precoders(const ChannelRealization& realization,
                                     const SystemConfig& config, Partitioning scheme,
                                     const DofPowerAllocation& alloc);

double measure_dof_slope(const std::vector<std::pair<double, double>>& esr_points);

}  // namespace rsma
