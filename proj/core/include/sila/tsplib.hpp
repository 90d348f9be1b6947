#ifndef SILA_TSPLIB_HPP
#define SILA_TSPLIB_HPP

#include <string>

#include "sila/instance.hpp"
#include "sila/solution.hpp"

namespace sila {

// A parsed TSPLIB95 file. Coordinates are min-max scaled into [0,1]^2 with a
// single uniform scale on both axes (aspect ratio preserved); `scaling` maps
// back to original units and carries the EUC_2D nearest-integer rounding mode.
struct LibraryInstance {
  ProblemKind kind = ProblemKind::Tsp;
  std::string name;
  TspInstance tsp;
  CvrpInstance cvrp;
  ScaledCoordinates scaling;
};

// Supports TYPE TSP and CVRP with EDGE_WEIGHT_TYPE EUC_2D. Throws ParseError
// (with line number) on malformed sections and for unsupported weight types.
LibraryInstance parse_library_instance(const std::string& path);

}  // namespace sila

#endif
