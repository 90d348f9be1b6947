#ifndef SILA_SOLUTION_HPP
#define SILA_SOLUTION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sila/instance.hpp"

namespace sila {

struct TspTour {
  std::vector<int> order;  // permutation of 0..n-1
};

// CVRP visit sequence in two-row notation: order is a permutation of
// customer indices, via_depot[k] == 1 means customer order[k] is reached
// from the depot (so flag 0 always starts a new sub-tour; via_depot[0] is 1).
struct CvrpSolution {
  std::vector<int> order;
  std::vector<std::uint8_t> via_depot;
};

enum class RoundingMode { None, NearestInteger };

// Similarity map from model-space [0,1]^2 coordinates back to a library
// instance's original units: original = scaled * scale + offset.
struct ScaledCoordinates {
  Point offset{0.0, 0.0};
  double scale = 1.0;
  RoundingMode rounding = RoundingMode::None;

  Point to_original(const Point& p) const {
    return {p.x * scale + offset.x, p.y * scale + offset.y};
  }
};

struct Violation {
  enum class Kind {
    SizeMismatch,
    DuplicateNode,
    MissingNode,
    OutOfRangeNode,
    FirstFlagNotSet,
    CapacityExceeded,
  };
  Kind kind;
  int index = -1;     // offending position / node / sub-tour index
  std::string detail;
};

struct ValidationResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult validate_tsp(const TspTour& tour, int n);
ValidationResult validate_cvrp(const CvrpInstance& instance, const CvrpSolution& solution);

// Closed-cycle Euclidean length. With scaling and NearestInteger rounding
// every edge is evaluated in original units and rounded before summation
// (the TSPLIB EUC_2D convention). Throws FeasibilityError on an invalid tour.
double tour_length(const TspInstance& instance, const TspTour& tour,
                   const ScaledCoordinates* scaling = nullptr);

// Total length of all depot-anchored sub-tours. Throws FeasibilityError
// (naming the offending sub-tour) if the solution does not validate.
double cvrp_cost(const CvrpInstance& instance, const CvrpSolution& solution,
                 const ScaledCoordinates* scaling = nullptr);

}  // namespace sila

#endif
