#pragma once

#include "wag3d/geometry/mesh.hpp"

namespace wag3d {

// Area-uniform surface sampling, deterministic given the seed.
//
// Stream definition (this is part of the contract, so reordering the face
// list cannot change the output): faces are first sorted lexicographically by
// their stored vertex-index triples; per sample exactly three uniforms are
// drawn in order from RngStream::derive(seed, "surface-sample") — the face
// selector against the cumulative area table, then the two barycentric
// uniforms (r1, r2) mapped as (1-sqrt(r1), sqrt(r1)(1-r2), sqrt(r1) r2).
PointCloud sample_surface_points(const TriangleMesh& mesh, int count, uint64_t seed);

} // namespace wag3d
