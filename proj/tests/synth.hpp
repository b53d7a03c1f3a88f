#pragma once

// Random GeoMedia documents for property tests.

#include <random>
#include <string>
#include <vector>

#include "geocms/media.hpp"

namespace synth {

inline constexpr std::int64_t kT0 = 1533128461000;

struct Gen {
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  std::mt19937_64 rng;

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); }
  bool coin(double p = 0.5) { return uniform(0, 1) < p; }

  geocms::GeoPoint point(double span = 1.0) { return {uniform(-span, span), uniform(-span, span)}; }

  geocms::InterpolationMode mode() {
    return static_cast<geocms::InterpolationMode>(integer(0, 2));
  }

  // Random walk with strictly moving steps.
  std::vector<geocms::PointSample> walk(int n, double span = 1.0) {
    std::vector<geocms::PointSample> out;
    geocms::GeoPoint p = point(span);
    std::int64_t t = kT0 + integer(0, 10'000'000);
    for (int i = 0; i < n; ++i) {
      out.push_back({geocms::TimeStamp{t}, p});
      p.lon += (coin() ? 1 : -1) * uniform(1e-4, 2e-3);
      p.lat += (coin() ? 1 : -1) * uniform(1e-4, 2e-3);
      t += integer(500, 20'000);
    }
    return out;
  }

  geocms::FieldOfView fov(bool allow_relative) {
    geocms::FieldOfView f;
    f.h_angle = uniform(10, 180);
    f.v_angle = uniform(10, 90);
    f.view_distance = uniform(20, 400);
    const double r = uniform(0, 1);
    if (r < 0.15) {
      f.direction2d.reset();
    } else if (allow_relative && r < 0.5) {
      const double rel[] = {-360, -90, -180, -270};
      f.direction2d = rel[integer(0, 3)];
    } else {
      f.direction2d = uniform(0, 359.9);
    }
    return f;
  }

  geocms::GeoMediaDocument moving_point(double span = 1.0) {
    return {geocms::MovingPoint(walk(static_cast<int>(integer(1, 8)), span), mode())};
  }

  geocms::GeoMediaDocument moving_double(double span = 1.0) {
    const auto w = walk(static_cast<int>(integer(1, 8)), span);
    std::vector<geocms::ValueSample> vs;
    std::vector<geocms::GeoPoint> track;
    for (const auto& s : w) {
      vs.push_back({s.t, uniform(-50, 50)});
      track.push_back(s.position);
    }
    std::optional<std::vector<geocms::GeoPoint>> tr;
    if (coin(0.7)) tr = track;
    return {geocms::MovingDouble(vs, mode(), tr)};
  }

  geocms::GeoMediaDocument photo(double span = 1.0) {
    geocms::STPhoto p{"http://example.org/p" + std::to_string(integer(0, 1'000'000)) + ".jpg", point(span),
                      geocms::TimeStamp{kT0 + integer(0, 10'000'000)}, fov(false)};
    return {p};
  }

  geocms::GeoMediaDocument video(double span = 1.0) {
    const int n = static_cast<int>(integer(2, 8));
    geocms::MovingPoint track(walk(n, span), geocms::InterpolationMode::Linear);
    std::vector<geocms::FieldOfView> fovs;
    const int count = coin() ? 1 : n;
    for (int i = 0; i < count; ++i) fovs.push_back(fov(true));
    return {geocms::MovingVideo("http://example.org/v" + std::to_string(integer(0, 1'000'000)) + ".mp4", track, fovs)};
  }

  geocms::GeoMediaDocument of_kind(geocms::MediaKind kind, double span = 1.0) {
    switch (kind) {
      case geocms::MediaKind::MovingPoint: return moving_point(span);
      case geocms::MediaKind::MovingDouble: return moving_double(span);
      case geocms::MediaKind::STPhoto: return photo(span);
      case geocms::MediaKind::MovingVideo: return video(span);
    }
    return moving_point(span);
  }

  geocms::BBox bbox(double span = 1.0) {
    const double w = uniform(0.01, span), h = uniform(0.01, span);
    const double x = uniform(-span, span - w), y = uniform(-span, span - h);
    return {x, y, x + w, y + h};
  }

  geocms::TimeInterval interval() {
    const std::int64_t a = kT0 + integer(0, 10'200'000);
    return {geocms::TimeStamp{a}, geocms::TimeStamp{a + integer(0, 3'000'000)}};
  }
};

}  // namespace synth
