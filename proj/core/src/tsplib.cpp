#include "sila/tsplib.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sila/error.hpp"

namespace sila {

namespace {

// Splits "KEYWORD : value" / "KEYWORD: value" / bare section names.
bool split_keyword(const std::string& line, std::string& key, std::string& value) {
  const auto colon = line.find(':');
  if (colon == std::string::npos) {
    key = line;
    value.clear();
  } else {
    key = line.substr(0, colon);
    value = line.substr(colon + 1);
  }
  auto trim = [](std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
  };
  trim(key);
  trim(value);
  return !key.empty();
}

}  // namespace

LibraryInstance parse_library_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string name;
  std::string type;
  std::string edge_weight_type;
  int dimension = -1;
  int capacity = -1;
  std::vector<Point> coords;       // by node id, 1-based ids mapped to 0-based
  std::vector<std::uint8_t> have_coord;
  std::vector<int> demands;
  std::vector<std::uint8_t> have_demand;
  int depot_id = -1;  // 0-based

  std::string line;
  int lineno = 0;

  auto read_int = [&](std::istringstream& ss, const char* what) {
    long long v;
    if (!(ss >> v)) throw ParseError(std::string("expected ") + what, lineno);
    return static_cast<int>(v);
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string key, value;
    if (!split_keyword(line, key, value)) continue;

    if (key == "NAME") {
      name = value;
    } else if (key == "TYPE") {
      type = value;
    } else if (key == "COMMENT" || key == "DISPLAY_DATA_TYPE" ||
               key == "NODE_COORD_TYPE" || key == "EDGE_WEIGHT_FORMAT") {
      // informational
    } else if (key == "DIMENSION") {
      dimension = std::stoi(value);
      if (dimension < 1) throw ParseError("DIMENSION must be positive", lineno);
      coords.assign(dimension, {});
      have_coord.assign(dimension, 0);
      demands.assign(dimension, 0);
      have_demand.assign(dimension, 0);
    } else if (key == "EDGE_WEIGHT_TYPE") {
      edge_weight_type = value;
    } else if (key == "CAPACITY") {
      capacity = std::stoi(value);
    } else if (key == "NODE_COORD_SECTION") {
      if (dimension < 0) throw ParseError("NODE_COORD_SECTION before DIMENSION", lineno);
      for (int i = 0; i < dimension; ++i) {
        if (!std::getline(in, line)) throw ParseError("truncated NODE_COORD_SECTION", lineno);
        ++lineno;
        std::istringstream ss(line);
        const int id = read_int(ss, "node id");
        if (id < 1 || id > dimension) throw ParseError("node id out of range", lineno);
        double x, y;
        if (!(ss >> x >> y)) throw ParseError("expected two coordinates", lineno);
        coords[id - 1] = {x, y};
        have_coord[id - 1] = 1;
      }
    } else if (key == "DEMAND_SECTION") {
      if (dimension < 0) throw ParseError("DEMAND_SECTION before DIMENSION", lineno);
      for (int i = 0; i < dimension; ++i) {
        if (!std::getline(in, line)) throw ParseError("truncated DEMAND_SECTION", lineno);
        ++lineno;
        std::istringstream ss(line);
        const int id = read_int(ss, "node id");
        if (id < 1 || id > dimension) throw ParseError("node id out of range", lineno);
        demands[id - 1] = read_int(ss, "demand");
        have_demand[id - 1] = 1;
      }
    } else if (key == "DEPOT_SECTION") {
      while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        int id;
        if (!(ss >> id)) throw ParseError("expected depot id or -1", lineno);
        if (id == -1) break;
        if (depot_id >= 0) throw ParseError("multiple depots are not supported", lineno);
        if (id < 1 || dimension < 0 || id > dimension)
          throw ParseError("depot id out of range", lineno);
        depot_id = id - 1;
      }
    } else if (key == "EOF") {
      break;
    } else {
      throw ParseError("unknown keyword '" + key + "'", lineno);
    }
  }

  if (dimension < 0) throw ParseError("missing DIMENSION");
  if (edge_weight_type != "EUC_2D")
    throw ParseError("unsupported EDGE_WEIGHT_TYPE '" + edge_weight_type + "'");
  for (int i = 0; i < dimension; ++i) {
    if (!have_coord[i])
      throw ParseError("missing coordinates for node " + std::to_string(i + 1));
  }

  const bool is_cvrp = (type == "CVRP");
  if (!is_cvrp && type != "TSP")
    throw ParseError("unsupported TYPE '" + type + "'");

  // Min-max scale into [0,1]^2, one uniform scale on both axes.
  double minx = coords[0].x, maxx = coords[0].x;
  double miny = coords[0].y, maxy = coords[0].y;
  for (const auto& p : coords) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const double extent = std::max(maxx - minx, maxy - miny);
  ScaledCoordinates scaling;
  scaling.offset = {minx, miny};
  scaling.scale = extent > 0 ? extent : 1.0;
  scaling.rounding = RoundingMode::NearestInteger;
  auto to_unit = [&](const Point& p) -> Point {
    return {(p.x - minx) / scaling.scale, (p.y - miny) / scaling.scale};
  };

  LibraryInstance out;
  out.name = name;
  out.scaling = scaling;

  if (is_cvrp) {
    if (capacity < 1) throw ParseError("CVRP file missing CAPACITY");
    for (int i = 0; i < dimension; ++i) {
      if (!have_demand[i])
        throw ParseError("missing demand for node " + std::to_string(i + 1));
    }
    if (depot_id < 0) depot_id = 0;  // convention: node 1 is the depot
    out.kind = ProblemKind::Cvrp;
    out.cvrp.capacity = capacity;
    out.cvrp.depot = to_unit(coords[depot_id]);
    for (int i = 0; i < dimension; ++i) {
      if (i == depot_id) continue;
      out.cvrp.customers.push_back(to_unit(coords[i]));
      const int d = demands[i];
      if (d < 1 || d > capacity)
        throw ParseError("demand of node " + std::to_string(i + 1) + " outside (0, capacity]");
      out.cvrp.demands.push_back(d);
    }
  } else {
    out.kind = ProblemKind::Tsp;
    out.tsp.coords.reserve(dimension);
    for (const auto& p : coords) out.tsp.coords.push_back(to_unit(p));
  }
  return out;
}

}  // namespace sila
