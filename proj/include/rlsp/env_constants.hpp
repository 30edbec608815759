#pragma once

// Physics constants for the built-in continuous environments. Changing any value
// changes the dynamics; bump kVersion and regenerate data/golden/*.txt.
namespace rlsp::env_constants {

inline constexpr int kVersion = 1;
inline constexpr int kEpisodeSteps = 200;

namespace pendulum {
inline constexpr double kDt = 0.02;
inline constexpr double kGravity = 9.8;
inline constexpr double kCartMass = 1.0;
inline constexpr double kPoleMass = 0.1;
inline constexpr double kHalfLength = 0.5;
inline constexpr double kForce = 10.0;      // force at |action| = 1
inline constexpr double kCartFriction = 0.1;
inline constexpr double kPoleFriction = 0.01;
inline constexpr double kRail = 2.4;         // cart stops at +-kRail
inline constexpr double kMaxSpeed = 10.0;    // |cart velocity| clamp
inline constexpr double kMaxAngularSpeed = 20.0;
inline constexpr double kFailAngle = 0.2;    // episode ends when |angle| exceeds this
inline constexpr double kInitNoise = 0.05;   // reset: uniform in +-kInitNoise per dimension
inline constexpr double kUprightAngle = 0.01;  // near-upright: |angle| and |angular velocity| bounds
inline constexpr double kUprightAngularSpeed = 0.1;
}  // namespace pendulum

namespace runner {
inline constexpr double kDt = 0.05;
inline constexpr double kThrust = 2.0;
inline constexpr double kDrag = 1.0;     // terminal speed kThrust / kDrag
inline constexpr double kInitNoise = 0.1;
}  // namespace runner

namespace hopper {
inline constexpr double kDt = 0.05;
inline constexpr double kGravity = 9.8;
inline constexpr double kLegLength = 1.0;   // spring engages below this height
inline constexpr double kStiffness = 30.0;
inline constexpr double kDamping = 2.0;
inline constexpr double kPush = 0.5;        // spring gain multiplier per unit vertical action
inline constexpr double kThrustLoss = 0.6;  // spring gain lost per unit |horizontal action|
inline constexpr double kThrust = 6.0;      // horizontal acceleration in contact
inline constexpr double kGroundDrag = 0.5;
inline constexpr double kAirDrag = 0.1;
inline constexpr double kFallHeight = 0.4;
inline constexpr double kAliveBonus = 1.0;
inline constexpr double kFallPenalty = -1.0;
inline constexpr double kMaxSpeed = 15.0;
inline constexpr double kInitHeight = 0.7;
inline constexpr double kInitNoise = 0.05;
}  // namespace hopper

}  // namespace rlsp::env_constants
