#include "gazekit/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gazekit {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

void require_positive_distance(double distance) {
  if (!(distance > 0.0) || !std::isfinite(distance)) {
    throw std::invalid_argument("distance must be a positive finite number of meters");
  }
}

}  // namespace

double distance(PlanePoint a, PlanePoint b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

const Target& TargetLayout::at(int id) const {
  if (!has(id)) {
    throw std::out_of_range("target id " + std::to_string(id) + " not in layout");
  }
  return targets[static_cast<std::size_t>(id)];
}

double visual_angle_deg(double extent, double distance) {
  require_positive_distance(distance);
  if (!(extent >= 0.0)) {
    throw std::invalid_argument("extent must be non-negative");
  }
  return 2.0 * std::atan(extent / (2.0 * distance)) * kDegPerRad;
}

double angle_to_extent(double angle_deg, double distance) {
  require_positive_distance(distance);
  if (!(angle_deg >= 0.0 && angle_deg < 180.0)) {
    throw std::invalid_argument("visual angle must lie in [0, 180) degrees");
  }
  return 2.0 * distance * std::tan(angle_deg / kDegPerRad / 2.0);
}

double dmm_to_meters(double dmm, double distance) {
  require_positive_distance(distance);
  return dmm / 1000.0 * distance;
}

TargetLayout make_ring_layout(int n, double inter_target_m, double size_deg, double plane_distance) {
  if (n < 2) {
    throw std::invalid_argument("a ring needs at least two targets");
  }
  if (!(inter_target_m > 0.0)) {
    throw std::invalid_argument("inter-target distance must be positive");
  }
  if (!(size_deg > 0.0)) {
    throw std::invalid_argument("target size must be positive");
  }

  TargetLayout layout;
  layout.plane_distance = plane_distance;
  layout.inter_target_m = inter_target_m;
  layout.size_deg = size_deg;
  layout.ring_radius = inter_target_m / (2.0 * std::sin(std::numbers::pi / n));

  const double radius = angle_to_extent(size_deg, plane_distance) / 2.0;
  layout.targets.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    // clockwise from +90 degrees
    const double theta = std::numbers::pi / 2.0 - 2.0 * std::numbers::pi * k / n;
    layout.targets.push_back(Target{
        .id = k,
        .center = {layout.ring_radius * std::cos(theta), layout.ring_radius * std::sin(theta)},
        .radius = radius,
    });
  }
  return layout;
}

}  // namespace gazekit
