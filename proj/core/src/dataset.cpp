#include "sila/dataset.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "sila/error.hpp"

namespace sila {

namespace {

constexpr char kMagic[6] = {'S', 'I', 'L', 'A', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("dataset file truncated");
  return v;
}

void put_point(std::ostream& out, const Point& p) {
  put(out, p.x);
  put(out, p.y);
}

Point get_point(std::istream& in) {
  Point p;
  p.x = get<double>(in);
  p.y = get<double>(in);
  return p;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::uint8_t>(ds.kind == ProblemKind::Cvrp ? 1 : 0));
  put(out, static_cast<std::uint8_t>(ds.has_solutions() ? 1 : 0));
  put(out, static_cast<std::uint64_t>(ds.size()));

  if (ds.kind == ProblemKind::Tsp) {
    if (ds.has_solutions() && ds.tsp_solutions.size() != ds.tsp.size())
      throw InvalidArgument("save_dataset: solution count mismatch");
    for (std::size_t i = 0; i < ds.tsp.size(); ++i) {
      const auto& inst = ds.tsp[i];
      put(out, static_cast<std::uint32_t>(inst.n()));
      for (const auto& p : inst.coords) put_point(out, p);
      if (ds.has_solutions()) {
        for (int v : ds.tsp_solutions[i].order) put(out, static_cast<std::int32_t>(v));
      }
    }
  } else {
    if (ds.has_solutions() && ds.cvrp_solutions.size() != ds.cvrp.size())
      throw InvalidArgument("save_dataset: solution count mismatch");
    for (std::size_t i = 0; i < ds.cvrp.size(); ++i) {
      const auto& inst = ds.cvrp[i];
      put(out, static_cast<std::uint32_t>(inst.n()));
      put(out, static_cast<std::int32_t>(inst.capacity));
      put_point(out, inst.depot);
      for (const auto& p : inst.customers) put_point(out, p);
      for (int d : inst.demands) put(out, static_cast<std::int32_t>(d));
      if (ds.has_solutions()) {
        const auto& sol = ds.cvrp_solutions[i];
        for (int v : sol.order) put(out, static_cast<std::int32_t>(v));
        out.write(reinterpret_cast<const char*>(sol.via_depot.data()),
                  static_cast<std::streamsize>(sol.via_depot.size()));
      }
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a dataset file (bad magic): " + path);
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw IoError("dataset version mismatch: file has " + std::to_string(version) +
                  ", expected " + std::to_string(kVersion));

  Dataset ds;
  ds.kind = get<std::uint8_t>(in) ? ProblemKind::Cvrp : ProblemKind::Tsp;
  const bool with_solutions = get<std::uint8_t>(in) != 0;
  const auto count = get<std::uint64_t>(in);

  for (std::uint64_t i = 0; i < count; ++i) {
    const auto n = get<std::uint32_t>(in);
    if (ds.kind == ProblemKind::Tsp) {
      TspInstance inst;
      inst.coords.reserve(n);
      for (std::uint32_t k = 0; k < n; ++k) inst.coords.push_back(get_point(in));
      ds.tsp.push_back(std::move(inst));
      if (with_solutions) {
        TspTour t;
        t.order.reserve(n);
        for (std::uint32_t k = 0; k < n; ++k) t.order.push_back(get<std::int32_t>(in));
        ds.tsp_solutions.push_back(std::move(t));
      }
    } else {
      CvrpInstance inst;
      inst.capacity = get<std::int32_t>(in);
      inst.depot = get_point(in);
      inst.customers.reserve(n);
      for (std::uint32_t k = 0; k < n; ++k) inst.customers.push_back(get_point(in));
      inst.demands.reserve(n);
      for (std::uint32_t k = 0; k < n; ++k) inst.demands.push_back(get<std::int32_t>(in));
      ds.cvrp.push_back(std::move(inst));
      if (with_solutions) {
        CvrpSolution sol;
        sol.order.reserve(n);
        for (std::uint32_t k = 0; k < n; ++k) sol.order.push_back(get<std::int32_t>(in));
        sol.via_depot.resize(n);
        in.read(reinterpret_cast<char*>(sol.via_depot.data()), n);
        if (!in) throw IoError("dataset file truncated");
        ds.cvrp_solutions.push_back(std::move(sol));
      }
    }
  }
  return ds;
}

}  // namespace sila
