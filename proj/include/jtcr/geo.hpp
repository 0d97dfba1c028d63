// Copyright 2026 The jtcr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "jtcr/common.hpp"

namespace jtcr::geo {

inline constexpr double kEarthRadiusKm = 6371.0;

/// A location on the sphere, in radians.
class GeoPoint {
 public:
  GeoPoint() = default;

  static GeoPoint from_radians(double lat_rad, double lon_rad) {
    constexpr double kHalfPi = std::numbers::pi / 2;
    if (!(lat_rad >= -kHalfPi && lat_rad <= kHalfPi))
      throw ConfigError("latitude out of range: " + std::to_string(lat_rad));
    if (!(lon_rad >= -std::numbers::pi && lon_rad <= std::numbers::pi))
      throw ConfigError("longitude out of range: " + std::to_string(lon_rad));
    return GeoPoint(lat_rad, lon_rad);
  }

  static GeoPoint from_degrees(double lat_deg, double lon_deg) {
    if (!(lat_deg >= -90.0 && lat_deg <= 90.0))
      throw ConfigError("latitude out of range: " + std::to_string(lat_deg));
    if (!(lon_deg >= -180.0 && lon_deg <= 180.0))
      throw ConfigError("longitude out of range: " + std::to_string(lon_deg));
    constexpr double kRad = std::numbers::pi / 180.0;
    return GeoPoint(std::clamp(lat_deg * kRad, -std::numbers::pi / 2, std::numbers::pi / 2),
                    std::clamp(lon_deg * kRad, -std::numbers::pi, std::numbers::pi));
  }

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {}
  double lat_ = 0.0;
  double lon_ = 0.0;
};

/// Central angle between two points via the haversine formula, in [0, pi].
inline double haversine_angle(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double sdlat = std::sin((b.lat() - a.lat()) / 2);
  const double sdlon = std::sin((b.lon() - a.lon()) / 2);
  double h = sdlat * sdlat + std::cos(a.lat()) * std::cos(b.lat()) * sdlon * sdlon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * std::asin(std::sqrt(h));
}

inline double distance_km(const GeoPoint& a, const GeoPoint& b,
                          double radius_km = kEarthRadiusKm) noexcept {
  return haversine_angle(a, b) * radius_km;
}

/// 1 / (1 + angle * R). Equals 1 only for identical points.
inline double geo_similarity(const GeoPoint& a, const GeoPoint& b,
                             double radius_km = kEarthRadiusKm) noexcept {
  return 1.0 / (1.0 + haversine_angle(a, b) * radius_km);
}

/// 1 + alpha * exp(g). Exactly 1 when alpha == 0.
inline double influence_factor(double similarity, double alpha) noexcept {
  if (alpha == 0.0) return 1.0;
  return 1.0 + alpha * std::exp(similarity);
}

/// Dense POI index -> location.
class GeoIndex {
 public:
  GeoIndex() = default;
  explicit GeoIndex(std::vector<GeoPoint> points) : points_(std::move(points)) {}

  std::size_t size() const noexcept { return points_.size(); }
  const GeoPoint& point(Index j) const { return points_.at(j); }
  std::span<const GeoPoint> points() const noexcept { return points_; }
  static constexpr double earth_radius_km() noexcept { return kEarthRadiusKm; }

  double similarity(Index a, Index b) const {
    return geo_similarity(points_[a], points_[b], kEarthRadiusKm);
  }
  double distance_km(Index a, Index b) const {
    return geo::distance_km(points_[a], points_[b], kEarthRadiusKm);
  }

  /// Indices of all points within radius_km of any of `anchors`, ascending.
  std::vector<Index> within_radius(std::span<const Index> anchors, double radius_km) const {
    if (!(radius_km > 0.0)) throw ConfigError("radius_km must be positive");
    std::vector<Index> out;
    for (Index j = 0; j < points_.size(); ++j) {
      for (Index a : anchors) {
        if (distance_km(a, j) <= radius_km) {
          out.push_back(j);
          break;
        }
      }
    }
    return out;
  }

 private:
  std::vector<GeoPoint> points_;
};

/// G_alpha(k, j) for POI pairs. Values are memoized in a dense m x m table
/// when it fits in `max_entries`; otherwise they are recomputed on each call.
/// Both paths evaluate the same expression, so results are bit-identical.
/// Read-only after construction.
class InfluenceTable {
 public:
  static constexpr std::size_t kDefaultMaxEntries = std::size_t{1} << 24;

  InfluenceTable() = default;
  InfluenceTable(const GeoIndex& index, double alpha,
                 std::size_t max_entries = kDefaultMaxEntries)
      : index_(&index), alpha_(alpha), m_(index.size()) {
    if (alpha < 0.0) throw ConfigError("alpha must be non-negative");
    if (alpha_ != 0.0 && m_ * m_ <= max_entries) {
      table_.resize(m_ * m_);
      for (std::size_t a = 0; a < m_; ++a) {
        table_[a * m_ + a] = compute(a, a);
        for (std::size_t b = a + 1; b < m_; ++b) {
          const double g = compute(a, b);
          table_[a * m_ + b] = g;
          table_[b * m_ + a] = g;
        }
      }
    }
  }

  double alpha() const noexcept { return alpha_; }
  bool memoized() const noexcept { return !table_.empty(); }

  double operator()(Index k, Index j) const {
    if (alpha_ == 0.0) return 1.0;
    if (!table_.empty()) return table_[std::size_t{k} * m_ + j];
    return compute(k, j);
  }

 private:
  double compute(std::size_t k, std::size_t j) const {
    const auto& pts = index_->points();
    return influence_factor(geo_similarity(pts[k], pts[j]), alpha_);
  }

  const GeoIndex* index_ = nullptr;
  double alpha_ = 0.0;
  std::size_t m_ = 0;
  std::vector<double> table_;
};

}  // namespace jtcr::geo
