#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ripe/estimate.hpp"
#include "ripe/models.hpp"
#include "ripe/numerics.hpp"

namespace ripe {

/// Cell-centred grid over two coordinates; rows run along the second one.
struct GridMask {
    Interval x;
    Interval y;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<std::uint8_t> inside;  // inside[iy * nx + ix]

    double dx() const { return x.width() / static_cast<double>(nx); }
    double dy() const { return y.width() / static_cast<double>(ny); }
    double x_centre(std::size_t ix) const { return x.lo + (static_cast<double>(ix) + 0.5) * dx(); }
    double y_centre(std::size_t iy) const { return y.lo + (static_cast<double>(iy) + 0.5) * dy(); }
    std::size_t count() const;

    /// False outside the grid.
    bool contains(double px, double py) const;

    /// Contiguous inside cells of one row, as x-edges.
    struct Run {
        double y = 0.0;
        double x_lo = 0.0;
        double x_hi = 0.0;
    };
    std::vector<Run> runs() const;
};

struct GridSpec {
    std::size_t nx = 0;  // 0 selects the family default
    std::size_t ny = 0;
    /// Posterior tail probability left outside the grid on each axis.
    double tail = 1e-6;
};

struct RegionOptions {
    /// Allowed |mass - q|; zero or negative selects 1e-4 in 1D and 5e-3 on grids.
    double mass_tol = 0.0;
    GridSpec grid;
    /// Evaluate the loss on a scan to detect a disconnected sublevel set (1D).
    bool check_connected = true;
    /// Compute the region in a transformed coordinate (1D only).
    std::optional<Transform> transform;
};

/// C_q = {x : d(x) <= l(q)} with posterior mass q.
struct LplRegion {
    FamilyKind family = FamilyKind::Binomial;
    Method method = Method::PredictiveCriterion;
    double level = 0.0;
    double threshold = 0.0;
    double mass = 0.0;
    double mass_tol = 0.0;
    ParamPoint estimate;          // minimizer of the expected loss
    double estimate_loss = 0.0;
    std::vector<Interval> intervals;  // 1D geometry
    std::optional<GridMask> mask;     // 2D geometry
    bool disconnected = false;
    std::string coordinate;  // transform name when computed in a transformed coordinate
};

/// Errors: InvalidArgument for q outside (0, 1), DivergentLoss and
/// DegenerateCriterion as for estimation, NonConvergence, GridTooCoarse.
LplRegion lpl_region(const Model& model, Method method, double q, const RegionOptions& options = {});

/// Two-dimensional region for the joint normal model on an explicit grid.
LplRegion region_2d(const Model& model, Method method, double q, const RegionOptions& options = {});

/// Closed-region membership; grid regions use cell-centre inclusion.
bool region_contains(const LplRegion& region, const ParamPoint& point);

/// Posterior mass of {x : d(x) <= level}. Used for coverage membership tests:
/// x0 lies in C_q exactly when the mass at level d(x0) is at most q.
double sublevel_mass(const Model& model, Method method, double level);

}  // namespace ripe
