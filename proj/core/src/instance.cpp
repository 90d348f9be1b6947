#include "sila/instance.hpp"

#include <string>

#include "sila/error.hpp"
#include "sila/rng.hpp"

namespace sila {

TspInstance generate_tsp(int n, std::uint64_t seed) {
  if (n < 3) {
    throw InvalidArgument("generate_tsp: n must be >= 3, got " + std::to_string(n));
  }
  Rng rng(seed);
  TspInstance inst;
  inst.coords.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    inst.coords.push_back({x, y});
  }
  return inst;
}

CvrpInstance generate_cvrp(int n, int capacity, std::uint64_t seed) {
  if (n < 1) {
    throw InvalidArgument("generate_cvrp: n must be >= 1, got " + std::to_string(n));
  }
  if (capacity < 9) {
    throw InvalidArgument("generate_cvrp: capacity must be >= 9 so every demand fits, got " +
                          std::to_string(capacity));
  }
  Rng rng(seed);
  CvrpInstance inst;
  inst.capacity = capacity;
  const double dx = rng.uniform();
  const double dy = rng.uniform();
  inst.depot = {dx, dy};
  inst.customers.reserve(n);
  inst.demands.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    inst.customers.push_back({x, y});
  }
  for (int i = 0; i < n; ++i) {
    inst.demands.push_back(static_cast<int>(rng.uniform_int(1, 9)));
  }
  return inst;
}

}  // namespace sila
