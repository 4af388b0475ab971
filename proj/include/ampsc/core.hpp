#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ampsc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Eigen::Index;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct NotStabilizable : Error {
    using Error::Error;
};
struct CrossSectionNotCertified : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    using Error::Error;
};
struct MissingCertificate : Error {
    using Error::Error;
};
struct DimensionCap : Error {
    using Error::Error;
};
struct Unbounded : Error {
    using Error::Error;
};
struct EmptySet : Error {
    using Error::Error;
};
// Safety-property failures map to process exit code 2.
struct SafetyError : Error {
    using Error::Error;
};
struct ConstraintViolated : SafetyError {
    using SafetyError::SafetyError;
};
struct RecursiveFeasibilityBroken : SafetyError {
    using SafetyError::SafetyError;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw DimensionMismatch(what);
}

} // namespace ampsc
