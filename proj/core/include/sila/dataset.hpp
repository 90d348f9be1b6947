#ifndef SILA_DATASET_HPP
#define SILA_DATASET_HPP

#include <string>
#include <vector>

#include "sila/instance.hpp"
#include "sila/solution.hpp"

namespace sila {

// A persistent set of instances of one problem kind, optionally paired with
// solutions (e.g. the current best solutions of a training dataset).
// The on-disk container is a versioned little-endian binary format that
// round-trips coordinates bit-exactly; see docs/file-formats.md.
struct Dataset {
  ProblemKind kind = ProblemKind::Tsp;
  std::vector<TspInstance> tsp;
  std::vector<CvrpInstance> cvrp;
  std::vector<TspTour> tsp_solutions;        // empty, or one per instance
  std::vector<CvrpSolution> cvrp_solutions;  // empty, or one per instance

  std::size_t size() const {
    return kind == ProblemKind::Tsp ? tsp.size() : cvrp.size();
  }
  bool has_solutions() const {
    return kind == ProblemKind::Tsp ? !tsp_solutions.empty() : !cvrp_solutions.empty();
  }
};

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace sila

#endif
