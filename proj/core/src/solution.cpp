#include "sila/solution.hpp"

#include <cmath>

#include "sila/error.hpp"

namespace sila {

namespace {

double edge_length(const Point& a, const Point& b, const ScaledCoordinates* scaling) {
  if (scaling == nullptr) return distance(a, b);
  const double d = distance(scaling->to_original(a), scaling->to_original(b));
  return scaling->rounding == RoundingMode::NearestInteger ? std::nearbyint(d) : d;
}

// Permutation check shared by both validators.
void check_permutation(const std::vector<int>& order, int n, ValidationResult& out) {
  if (static_cast<int>(order.size()) != n) {
    out.violations.push_back({Violation::Kind::SizeMismatch, static_cast<int>(order.size()),
                              "order has " + std::to_string(order.size()) + " entries, expected " +
                                  std::to_string(n)});
    return;
  }
  std::vector<std::uint8_t> seen(n, 0);
  for (int i = 0; i < n; ++i) {
    const int v = order[i];
    if (v < 0 || v >= n) {
      out.violations.push_back({Violation::Kind::OutOfRangeNode, i,
                                "node " + std::to_string(v) + " at index " + std::to_string(i)});
      continue;
    }
    if (seen[v]) {
      out.violations.push_back({Violation::Kind::DuplicateNode, i,
                                "node " + std::to_string(v) + " repeated at index " +
                                    std::to_string(i)});
    }
    seen[v] = 1;
  }
  for (int v = 0; v < n; ++v) {
    if (!seen[v]) {
      out.violations.push_back({Violation::Kind::MissingNode, v, "node " + std::to_string(v)});
    }
  }
}

}  // namespace

ValidationResult validate_tsp(const TspTour& tour, int n) {
  ValidationResult res;
  check_permutation(tour.order, n, res);
  return res;
}

ValidationResult validate_cvrp(const CvrpInstance& instance, const CvrpSolution& solution) {
  ValidationResult res;
  const int n = instance.n();
  check_permutation(solution.order, n, res);
  if (static_cast<int>(solution.via_depot.size()) != n) {
    res.violations.push_back({Violation::Kind::SizeMismatch,
                              static_cast<int>(solution.via_depot.size()),
                              "via_depot size mismatch"});
    return res;
  }
  if (n > 0 && solution.via_depot[0] != 1) {
    res.violations.push_back({Violation::Kind::FirstFlagNotSet, 0,
                              "first customer must be reached from the depot"});
  }
  if (!res.ok()) return res;

  int subtour = 0;
  long long load = 0;
  for (int i = 0; i < n; ++i) {
    if (solution.via_depot[i]) {
      load = 0;
      if (i > 0) ++subtour;
    }
    load += instance.demands[solution.order[i]];
    if (load > instance.capacity) {
      res.violations.push_back({Violation::Kind::CapacityExceeded, subtour,
                                "sub-tour " + std::to_string(subtour) + " load " +
                                    std::to_string(load) + " > capacity " +
                                    std::to_string(instance.capacity)});
      load = 0;  // report each overloaded sub-tour once
    }
  }
  return res;
}

double tour_length(const TspInstance& instance, const TspTour& tour,
                   const ScaledCoordinates* scaling) {
  const auto check = validate_tsp(tour, instance.n());
  if (!check.ok()) {
    throw FeasibilityError("tour_length: invalid tour: " + check.violations.front().detail);
  }
  const int n = instance.n();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point& a = instance.coords[tour.order[i]];
    const Point& b = instance.coords[tour.order[(i + 1) % n]];
    total += edge_length(a, b, scaling);
  }
  return total;
}

double cvrp_cost(const CvrpInstance& instance, const CvrpSolution& solution,
                 const ScaledCoordinates* scaling) {
  const auto check = validate_cvrp(instance, solution);
  if (!check.ok()) {
    throw FeasibilityError("cvrp_cost: infeasible solution: " + check.violations.front().detail);
  }
  const int n = instance.n();
  double total = 0.0;
  Point prev = instance.depot;
  for (int i = 0; i < n; ++i) {
    const Point& cur = instance.customers[solution.order[i]];
    if (solution.via_depot[i] && i > 0) {
      total += edge_length(prev, instance.depot, scaling);
      prev = instance.depot;
    }
    total += edge_length(prev, cur, scaling);
    prev = cur;
  }
  total += edge_length(prev, instance.depot, scaling);
  return total;
}

}  // namespace sila
