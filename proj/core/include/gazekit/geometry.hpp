#pragma once

// Plane geometry for the Fitts ring task. Plane coordinates (meters on the
// target plane, origin at the ring center) are canonical; angles are views.

#include <cstddef>
#include <optional>
#include <vector>

namespace gazekit {

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PlanePoint&, const PlanePoint&) = default;
};

double distance(PlanePoint a, PlanePoint b) noexcept;

struct Target {
  int id = 0;
  PlanePoint center;
  double radius = 0.0;  // meters

  [[nodiscard]] bool contains(PlanePoint p) const noexcept { return distance(p, center) <= radius; }

  friend bool operator==(const Target&, const Target&) = default;
};

struct TargetLayout {
  std::vector<Target> targets;
  double plane_distance = 1.3;  // meters
  double ring_radius = 0.0;     // meters
  double size_deg = 0.0;        // target diameter as visual angle
  double inter_target_m = 0.0;  // adjacent chord

  [[nodiscard]] std::size_t size() const noexcept { return targets.size(); }
  [[nodiscard]] const Target& at(int id) const;
  [[nodiscard]] bool has(int id) const noexcept { return id >= 0 && static_cast<std::size_t>(id) < targets.size(); }
};

/// Visual angle (degrees) subtended by `extent` meters seen from `distance` meters.
double visual_angle_deg(double extent, double distance);

/// Inverse of visual_angle_deg: extent in meters for `angle` degrees at `distance`.
double angle_to_extent(double angle_deg, double distance);

/// Distance-independent millimeters to meters on a plane at `distance`.
/// 1 dmm subtends 1 mm at 1 m.
double dmm_to_meters(double dmm, double distance);

/// Ring of `n` equally spaced targets whose adjacent centers are
/// `inter_target_m` apart. Target 0 sits at the top; ids run clockwise.
TargetLayout make_ring_layout(int n, double inter_target_m, double size_deg, double plane_distance);

}  // namespace gazekit
