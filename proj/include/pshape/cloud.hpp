#pragma once

#include <array>
#include <cstdint>

#include "pshape/tensor.hpp"

namespace pshape {

// A point cloud is an N x 3 tensor of coordinates; row order carries no
// meaning. Normalized clouds are centered at the origin with the furthest
// point at Euclidean norm 1.
using PointCloud = Tensor2;

std::array<double, 3> centroid(const PointCloud& p);
double max_point_norm(const PointCloud& p);

// Center at the origin and divide by the Euclidean norm of the furthest
// point. Throws DegeneracyError when all points coincide, DataError when
// fewer than two points are given.
PointCloud normalize(const PointCloud& p);

bool is_normalized(const PointCloud& p, double tol = 1e-9);

// Uniformly resample to n points: without replacement when the source has at
// least n points (a permutation when sizes match), with replacement
// otherwise. Deterministic for a given seed.
PointCloud resample(const PointCloud& p, Index n, std::uint64_t seed);

}  // namespace pshape
