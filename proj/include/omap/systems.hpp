#pragma once
// Constructors for the piecewise-linear model systems.

#include "omap/open_map.hpp"

namespace omap {

/// The scaling map (x, xi) -> (x/2, 2 xi) on a box. Single block
/// [-hx,hx) x [-2*hxi, 2*hxi), single piece with domain
/// [-hx,hx) x [-hxi,hxi) and differential diag(1/2, 2). The origin is the
/// unique trapped point; the unstable direction is the xi-axis.
OpenMapSystem linear_model_system(double half_width_x = 1.0, double half_width_xi = 0.5);

/// Open baker map on the torus, base L, keeping the given branches.
/// Branch a maps [a/L,(a+1)/L) x [0,1) to [0,1) x [a/L,(a+1)/L) via
/// (x, xi) -> (L x - a, (xi + a)/L); differential diag(L, 1/L).
/// Keeping all branches closes the system and raises the no-hole flag.
OpenMapSystem open_baker_system(int base, const std::vector<int>& kept);

/// Open baker composed with smooth symplectic shears of size `bump`:
/// S2 o F_baker o S1 where S1(x,xi) = (x, xi + bump*g'(x)) and
/// S2(x,xi) = (x + bump*g'(xi), xi) with g a compactly supported bump per
/// branch cell. Nonlinear but still exactly area-preserving.
OpenMapSystem perturbed_baker_system(int base, const std::vector<int>& kept, double bump);

/// A hyperbolic linear map given by an SL(2,R) matrix with |trace| > 2,
/// restricted to the box [-hw,hw)^2 (the domain is the set of points whose
/// image stays in the box). Used as a local chart test bed.
OpenMapSystem linear_chart_system(const Mat2& m, double half_width = 1.0);

/// Exactly trapped baker points: periodic orbits of every kept digit word of
/// length up to `max_period`. x carries the word, xi the reversed word:
/// x = 0.(w) and xi = 0.(reverse w) in base L, repeating.
std::vector<PhasePoint> baker_periodic_points(int base, const std::vector<int>& kept,
                                              int max_period);

}  // namespace omap
