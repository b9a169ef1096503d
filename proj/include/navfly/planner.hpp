#pragma once

#include "navfly/scene.hpp"

namespace navfly::eval {

/// Shortest collision-free path length on the 2D visibility graph over
/// obstacle footprints inflated by the UAV radius, at cruise altitude.
/// Straight-line distance when unobstructed. Throws DomainError if the
/// goal is unreachable.
double optimal_path_length(const world::Scene& scene, const world::Vec2& start,
                           const world::Vec2& goal, double uav_radius = world::kUavRadius);

}  // namespace navfly::eval
