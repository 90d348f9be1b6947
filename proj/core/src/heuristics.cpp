#include "sila/heuristics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "sila/error.hpp"
#include "sila/rng.hpp"

namespace sila {

TspTour random_insertion_tsp(const TspInstance& instance, std::uint64_t seed) {
  const int n = instance.n();
  if (n < 3) throw InvalidArgument("random_insertion_tsp: n must be >= 3");
  Rng rng(seed);

  std::vector<int> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  rng.shuffle(nodes);

  std::vector<int> tour(nodes.begin(), nodes.begin() + 3);
  tour.reserve(n);
  for (int idx = 3; idx < n; ++idx) {
    const int i = nodes[idx];
    const Point& pi = instance.coords[i];
    int best_pos = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    const int m = static_cast<int>(tour.size());
    for (int pos = 0; pos < m; ++pos) {
      const Point& pj = instance.coords[tour[pos]];
      const Point& pk = instance.coords[tour[(pos + 1) % m]];
      const double cost = distance(pj, pi) + distance(pi, pk) - distance(pj, pk);
      if (cost < best_cost) {
        best_cost = cost;
        best_pos = pos;
      }
    }
    tour.insert(tour.begin() + best_pos + 1, i);
  }
  return TspTour{std::move(tour)};
}

CvrpSolution random_insertion_cvrp(const CvrpInstance& instance, std::uint64_t seed) {
  const int n = instance.n();
  if (n < 1) throw InvalidArgument("random_insertion_cvrp: empty instance");
  for (int d : instance.demands) {
    if (d > instance.capacity)
      throw InvalidArgument("random_insertion_cvrp: demand exceeds capacity");
  }
  Rng rng(seed);

  std::vector<int> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  rng.shuffle(nodes);

  std::vector<std::vector<int>> routes;
  std::vector<long long> loads;

  for (const int i : nodes) {
    const Point& pi = instance.customers[i];
    const int demand = instance.demands[i];
    // New singleton route is the fallback candidate; existing routes can only
    // win with strictly lower cost, keeping ties at the lowest index pair.
    double best_cost = 2.0 * distance(instance.depot, pi);
    int best_route = -1, best_pos = -1;
    for (std::size_t r = 0; r < routes.size(); ++r) {
      if (loads[r] + demand > instance.capacity) continue;
      const auto& route = routes[r];
      const int m = static_cast<int>(route.size());
      for (int pos = 0; pos <= m; ++pos) {
        const Point& prev = pos == 0 ? instance.depot : instance.customers[route[pos - 1]];
        const Point& next = pos == m ? instance.depot : instance.customers[route[pos]];
        const double cost = distance(prev, pi) + distance(pi, next) - distance(prev, next);
        if (cost < best_cost) {
          best_cost = cost;
          best_route = static_cast<int>(r);
          best_pos = pos;
        }
      }
    }
    if (best_route < 0) {
      routes.push_back({i});
      loads.push_back(demand);
    } else {
      routes[best_route].insert(routes[best_route].begin() + best_pos, i);
      loads[best_route] += demand;
    }
  }

  CvrpSolution sol;
  sol.order.reserve(n);
  sol.via_depot.reserve(n);
  for (const auto& route : routes) {
    for (std::size_t k = 0; k < route.size(); ++k) {
      sol.order.push_back(route[k]);
      sol.via_depot.push_back(k == 0 ? 1 : 0);
    }
  }
  return sol;
}

OracleResult brute_force_tsp(const TspInstance& instance) {
  const int n = instance.n();
  if (n < 3) throw InvalidArgument("brute_force_tsp: n must be >= 3");
  if (n > 12)
    throw InvalidArgument("brute_force_tsp: n = " + std::to_string(n) + " exceeds limit 12");

  std::vector<int> perm(n - 1);
  std::iota(perm.begin(), perm.end(), 1);

  TspTour best;
  double best_len = std::numeric_limits<double>::infinity();
  do {
    // Fixing node 0 first and requiring perm.front() < perm.back() halves the
    // enumeration to the (n-1)!/2 distinct cycles.
    if (perm.front() > perm.back()) continue;
    TspTour t;
    t.order.reserve(n);
    t.order.push_back(0);
    t.order.insert(t.order.end(), perm.begin(), perm.end());
    const double len = tour_length(instance, t);
    if (len < best_len) {
      best_len = len;
      best = std::move(t);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  return OracleResult{std::move(best), best_len, OracleMethod::BruteForce};
}

OracleResult two_opt_oracle(const TspInstance& instance, const TspTour& start) {
  const int n = instance.n();
  const auto check = validate_tsp(start, n);
  if (!check.ok()) throw FeasibilityError("two_opt_oracle: invalid start tour");

  std::vector<int> tour = start.order;
  auto d = [&](int a, int b) { return distance(instance.coords[a], instance.coords[b]); };

  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < n - 1 && !improved; ++i) {
      for (int j = i + 2; j < n && !improved; ++j) {
        if (i == 0 && j == n - 1) continue;  // same edge pair on the cycle
        const int a = tour[i], b = tour[i + 1];
        const int c = tour[j], e = tour[(j + 1) % n];
        const double delta = d(a, c) + d(b, e) - d(a, b) - d(c, e);
        if (delta < -1e-12) {
          std::reverse(tour.begin() + i + 1, tour.begin() + j + 1);
          improved = true;
        }
      }
    }
  }

  TspTour out{std::move(tour)};
  const double len = tour_length(instance, out);
  return OracleResult{std::move(out), len, OracleMethod::TwoOpt};
}

}  // namespace sila
