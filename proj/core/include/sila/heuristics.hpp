#ifndef SILA_HEURISTICS_HPP
#define SILA_HEURISTICS_HPP

#include <cstdint>

#include "sila/instance.hpp"
#include "sila/solution.hpp"

namespace sila {

enum class OracleMethod { BruteForce, TwoOpt };

struct OracleResult {
  TspTour tour;
  double objective = 0.0;
  OracleMethod method = OracleMethod::BruteForce;
};

// Random insertion: start from a random 3-node cycle, insert the remaining
// nodes in random order, each at the position minimizing
// d(j,i) + d(i,k) - d(j,k). Deterministic per seed.
TspTour random_insertion_tsp(const TspInstance& instance, std::uint64_t seed);

// CVRP variant: every feasible position of every existing route plus a new
// singleton route (cost 2*d(depot,i)) is considered; cheapest wins, ties by
// lowest (route index, position index).
CvrpSolution random_insertion_cvrp(const CvrpInstance& instance, std::uint64_t seed);

// Exact optimum by enumeration, n <= 12.
OracleResult brute_force_tsp(const TspInstance& instance);

// First-improvement 2-opt with a fixed edge-pair scan order, run to a local
// optimum. Every accepted move strictly shortens the tour.
OracleResult two_opt_oracle(const TspInstance& instance, const TspTour& start);

}  // namespace sila

#endif
