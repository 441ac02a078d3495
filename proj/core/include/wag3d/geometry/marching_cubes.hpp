#pragma once

#include "wag3d/geometry/grid.hpp"
#include "wag3d/geometry/mesh.hpp"

namespace wag3d {

// Extracts the iso-surface of a distance grid as a welded triangle mesh.
//
// Cells span adjacent voxel centers; vertices are placed by linear
// interpolation along cut edges. Each cell's surface polygons are traced from
// per-face marching-squares segments, so adjacent cells always agree on the
// shared face and the result is a closed orientable surface whenever the
// iso-surface stays away from the grid boundary. Ambiguous (saddle) faces are
// resolved with the asymptotic decider: the bilinear saddle value decides
// whether the two inside corners connect across the face.
//
// iso must lie strictly inside (-tau, tau); a grid entirely on one side of
// iso raises an empty-surface error.
TriangleMesh marching_cubes(const DistanceGrid& grid, double iso);

} // namespace wag3d
