#pragma once

#include <stdexcept>

namespace sonotrans {

/// Invalid parameters or scenario description.
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Field query too close to a point source (1/d and phase are undefined there).
class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Integrator step outside its stability bound.
class StepSizeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Follower came closer to the leader than the collision threshold.
class CollisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sonotrans
