/*
  Shared actuator layout: 12 motors followed by 4 elevon servos.
  Motor commands are unitless 0..1, surface commands are radians.
*/
#pragma once

#include <array>

#include <Eigen/Core>

namespace h2tail {

inline constexpr int kMotorCount = 12;
inline constexpr int kSurfaceCount = 4;
inline constexpr int kActuatorCount = kMotorCount + kSurfaceCount;

using ActuatorVector = Eigen::Matrix<double, kActuatorCount, 1>;

struct ActuatorSet {
    std::array<double, kMotorCount> motor{};    // 0..1
    std::array<double, kSurfaceCount> surface{};  // rad
    std::array<bool, kActuatorCount> health;

    ActuatorSet() { health.fill(true); }

    ActuatorVector as_vector() const {
        ActuatorVector v;
        for (int i = 0; i < kMotorCount; ++i) v[i] = motor[i];
        for (int i = 0; i < kSurfaceCount; ++i) v[kMotorCount + i] = surface[i];
        return v;
    }

    static ActuatorSet from_vector(const ActuatorVector& v) {
        ActuatorSet s;
        for (int i = 0; i < kMotorCount; ++i) s.motor[i] = v[i];
        for (int i = 0; i < kSurfaceCount; ++i) s.surface[i] = v[kMotorCount + i];
        return s;
    }
};

}  // namespace h2tail
