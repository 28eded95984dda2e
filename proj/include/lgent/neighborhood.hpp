#pragma once

#include "lgent/group.hpp"
#include "lgent/region.hpp"

namespace lgent {

// Distance from p to a chart box under the group metric, computed against the
// chart-nearest point of the box. Exact for Euclidean charts; for the
// non-abelian charts this is the computational surrogate used consistently by
// every membership test in the pipeline.
inline double distance_to_box(const GroupSpec& g, const Box& q,
                              const GroupPoint& p) {
  if (q.contains(p.coords)) return 0.0;
  return g.distance(p, g.make_point(q.clamp(p.coords)));
}

// Membership in N_eps(Q) for a chart box Q.
inline bool in_eps_neighborhood(const GroupSpec& g, const Box& q, double eps,
                                const GroupPoint& p) {
  if (q.contains(p.coords)) return true;
  return distance_to_box(g, q, p) < eps;
}

}  // namespace lgent
