#ifndef STPLAN_SHAPES_HPP
#define STPLAN_SHAPES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>

namespace stplan {

using Vec3 = Eigen::Vector3d;

// Vertical circular cylinder. `diameter` is the full width, the axis is +z
// and the shape spans [-height/2, height/2] around its center.
struct Column {
  double diameter;
  double height;
};

// Torus ("circle" obstacle): major circle of radius `major_radius` in the
// plane orthogonal to `axis`, tube of diameter `tube_diameter`.
struct CircleHoop {
  double major_radius;
  double tube_diameter;
  Vec3 axis;
};

struct Sphere {
  double radius;
};

// Axis-aligned box with the given half extents.
struct Box {
  Vec3 half_extents;
};

using ObstacleShape = std::variant<Column, CircleHoop, Sphere, Box>;

inline void validate_shape(const ObstacleShape& shape) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Column>) {
          if (s.diameter <= 0.0 || s.height <= 0.0)
            throw std::invalid_argument("Column dimensions must be positive");
        } else if constexpr (std::is_same_v<T, CircleHoop>) {
          if (s.major_radius <= 0.0 || s.tube_diameter <= 0.0)
            throw std::invalid_argument("CircleHoop dimensions must be positive");
          if (std::abs(s.axis.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("CircleHoop axis must be unit length");
        } else if constexpr (std::is_same_v<T, Sphere>) {
          if (s.radius <= 0.0)
            throw std::invalid_argument("Sphere radius must be positive");
        } else {
          if ((s.half_extents.array() <= 0.0).any())
            throw std::invalid_argument("Box half extents must be positive");
        }
      },
      shape);
}

// Distance from point `p` to the solid shape placed at `center` (0 inside).
inline double shape_distance(const ObstacleShape& shape, const Vec3& center,
                             const Vec3& p) {
  const Vec3 q = p - center;
  return std::visit(
      [&q](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Column>) {
          const double radial =
              std::max(std::hypot(q.x(), q.y()) - 0.5 * s.diameter, 0.0);
          const double vertical = std::max(std::abs(q.z()) - 0.5 * s.height, 0.0);
          return std::hypot(radial, vertical);
        } else if constexpr (std::is_same_v<T, CircleHoop>) {
          const double along = q.dot(s.axis);
          const double radial = (q - along * s.axis).norm();
          const double ring = std::hypot(radial - s.major_radius, along);
          return std::max(ring - 0.5 * s.tube_diameter, 0.0);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return std::max(q.norm() - s.radius, 0.0);
        } else {
          const Vec3 d = q.cwiseAbs() - s.half_extents;
          return d.cwiseMax(0.0).norm();
        }
      },
      shape);
}

// Closed point-membership test: boundary counts as inside.
inline bool shape_contains(const ObstacleShape& shape, const Vec3& center,
                           const Vec3& p, double margin = 0.0) {
  return shape_distance(shape, center, p) <= margin;
}

// Conservative radius of a ball that covers the shape around its center.
inline double shape_bounding_radius(const ObstacleShape& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Column>) {
          return std::hypot(0.5 * s.diameter, 0.5 * s.height);
        } else if constexpr (std::is_same_v<T, CircleHoop>) {
          return s.major_radius + 0.5 * s.tube_diameter;
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return s.radius;
        } else {
          return s.half_extents.norm();
        }
      },
      shape);
}

// Closed-form solid volume, used by the density statistic.
inline double shape_volume(const ObstacleShape& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Column>) {
          return M_PI * 0.25 * s.diameter * s.diameter * s.height;
        } else if constexpr (std::is_same_v<T, CircleHoop>) {
          const double r = 0.5 * s.tube_diameter;
          return 2.0 * M_PI * M_PI * s.major_radius * r * r;
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return 4.0 / 3.0 * M_PI * s.radius * s.radius * s.radius;
        } else {
          return 8.0 * s.half_extents.prod();
        }
      },
      shape);
}

// A moving obstacle: `position` is the shape center at the reference time of
// whatever map or forecast consumes the track.
struct ObstacleTrack {
  ObstacleShape shape;
  Vec3 position;
  Vec3 velocity;
};

}  // namespace stplan

#endif  // STPLAN_SHAPES_HPP
