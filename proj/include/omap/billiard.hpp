#pragma once
// Open billiard map for scattering by disjoint disks, in Birkhoff
// coordinates (boundary arclength s, eta = sin of the reflection angle).

#include "omap/open_map.hpp"

namespace omap {

/// Builds the open map with one piece per ordered pair (i <- j), i != j:
/// rays leaving disk j that hit disk i first. Checks that the disks are
/// pairwise disjoint and that no disk meets the convex hull of two others
/// (the non-eclipse condition); the measured hull clearance is recorded in
/// the system notes. Differentials are the closed-form beam-transfer
/// Jacobians of the billiard, exactly area-preserving in (s, eta).
OpenMapSystem three_disk_system(const std::vector<Vec2>& centers, const std::vector<double>& radii);

/// Equilateral configuration with center distance `side`, common `radius`.
OpenMapSystem three_disk_system(double side, double radius);

/// Birkhoff coordinates of the point on disk `from` facing disk `to`
/// (eta = 0); one leg of the period-2 orbit of the two disks.
PhasePoint facing_point(const std::vector<Vec2>& centers, const std::vector<double>& radii,
                        int from, int to);

/// Periodic billiard orbit with the given disk itinerary (closing back to the
/// first disk), found by minimizing the total chord length over the boundary
/// angles. Returns one phase point per bounce.
std::vector<PhasePoint> periodic_orbit(const std::vector<Vec2>& centers,
                                       const std::vector<double>& radii,
                                       const std::vector<int>& itinerary);

/// Exactly trapped samples: the points of every periodic orbit with period
/// up to `max_period`. Grid survivor sampling cannot follow the billiard's
/// trapped set beyond a few bounces (the strips thin by the per-bounce
/// expansion), so word tables for disk systems are built from these.
std::vector<PhasePoint> periodic_trapped_points(const std::vector<Vec2>& centers,
                                                const std::vector<double>& radii, int max_period);

}  // namespace omap
