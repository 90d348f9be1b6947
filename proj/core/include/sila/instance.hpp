#ifndef SILA_INSTANCE_HPP
#define SILA_INSTANCE_HPP

#include <cstdint>
#include <vector>

#include "sila/geometry.hpp"

namespace sila {

enum class ProblemKind { Tsp, Cvrp };

// Euclidean TSP instance. Generated instances have coordinates in [0,1]^2;
// parsed library instances are rescaled into that range and carry a
// ScaledCoordinates record for evaluation in original units.
struct TspInstance {
  std::vector<Point> coords;

  int n() const { return static_cast<int>(coords.size()); }
};

struct CvrpInstance {
  Point depot;
  std::vector<Point> customers;
  std::vector<int> demands;  // strictly positive, each <= capacity
  int capacity = 0;

  int n() const { return static_cast<int>(customers.size()); }
};

// n i.i.d. uniform points in the unit square, deterministic per seed.
TspInstance generate_tsp(int n, std::uint64_t seed);

// Depot + n uniform customers, demands uniform in {1,...,9}.
CvrpInstance generate_cvrp(int n, int capacity, std::uint64_t seed);

}  // namespace sila

#endif
