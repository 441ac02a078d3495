#pragma once

#include "wag3d/geometry/grid.hpp"
#include "wag3d/geometry/mesh.hpp"

namespace wag3d {

// Signed-distance voxelization of a watertight triangle mesh: the unsigned
// distance comes from an exact nearest-triangle query over a BVH, the sign
// from crossing parity along +x rows (rows are jittered by a fixed sub-voxel
// offset so edge-grazing rays are never hit in practice). Values are clamped
// to [-tau, tau], negative inside.
//
// Non-watertight input is rejected: parity needs a closed surface to be
// meaningful, and the error names the defect.
DistanceGrid voxelize_sdf(const TriangleMesh& mesh, int n, double tau);

} // namespace wag3d
