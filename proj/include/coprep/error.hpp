#pragma once

#include <stdexcept>
#include <string>

namespace coprep {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A homogeneous point landed on (or numerically at) the ideal line.
struct MapsToInfinity : Error {
  explicit MapsToInfinity(const std::string& what) : Error(what) {}
};

// A keypoint frame point lies on the wrong side of an oriented line.
struct SideViolation : Error {
  explicit SideViolation(const std::string& what) : Error(what) {}
};

// A labeling references a pattern id with no stored statistics.
struct MissingPattern : Error {
  explicit MissingPattern(const std::string& what) : Error(what) {}
};

// A labeling references a surface id with no stored color model.
struct MissingGmm : Error {
  explicit MissingGmm(const std::string& what) : Error(what) {}
};

// Exhaustive enumeration would exceed the hard evaluation budget.
struct TooLarge : Error {
  explicit TooLarge(const std::string& what) : Error(what) {}
};

// A synthetic scene description cannot be realized (e.g. repeats do not fit).
struct SpecInfeasible : Error {
  explicit SpecInfeasible(const std::string& what) : Error(what) {}
};

// Correspondences are rank-deficient; no affine map can be fit.
struct DegenerateCorrespondences : Error {
  explicit DegenerateCorrespondences(const std::string& what) : Error(what) {}
};

// Malformed or inconsistent input file content.
struct DataFormatError : Error {
  explicit DataFormatError(const std::string& what) : Error(what) {}
};

}  // namespace coprep
