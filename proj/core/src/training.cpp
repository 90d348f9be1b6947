#include "sila/training.hpp"

#include <fstream>
#include <sstream>

namespace sila {

TspTrainingSet make_training_set(std::vector<TspInstance> instances, std::uint64_t seed) {
  TspTrainingSet ds;
  ds.instances = std::move(instances);
  Rng rng(seed);
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    ds.best.push_back(random_insertion_tsp(ds.instances[i], rng.next_u64()));
    ds.history.push_back({tour_length(ds.instances[i], ds.best.back())});
  }
  return ds;
}

CvrpTrainingSet make_training_set(std::vector<CvrpInstance> instances, std::uint64_t seed) {
  CvrpTrainingSet ds;
  ds.instances = std::move(instances);
  Rng rng(seed);
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    ds.best.push_back(random_insertion_cvrp(ds.instances[i], rng.next_u64()));
    ds.history.push_back({cvrp_cost(ds.instances[i], ds.best.back())});
  }
  return ds;
}

Segment sample_training_segment(const TspTour& tour, int l_max, Rng& rng) {
  const int n = static_cast<int>(tour.order.size());
  if (n < 4) throw InvalidArgument("sample_training_segment: solution too small (n < 4)");
  Segment seg;
  seg.length = static_cast<int>(rng.uniform_int(4, std::min(l_max, n)));
  seg.start_pos = static_cast<int>(rng.uniform_int(0, n - 1));
  seg.backward = rng.uniform() < 0.5;
  for (int k = 0; k < seg.length; ++k)
    seg.nodes.push_back(tour.order[(seg.start_pos + k) % n]);
  if (seg.backward) std::reverse(seg.nodes.begin(), seg.nodes.end());
  return seg;
}

Segment sample_training_segment(const CvrpInstance& instance, const CvrpSolution& solution,
                                int l_max, Rng& rng) {
  const int n = static_cast<int>(solution.order.size());
  if (n < 4) throw InvalidArgument("sample_training_segment: solution too small (n < 4)");
  Segment seg;
  seg.length = static_cast<int>(rng.uniform_int(4, std::min(l_max, n)));
  seg.start_pos = static_cast<int>(rng.uniform_int(0, n - seg.length));
  for (int k = 0; k < seg.length; ++k) seg.nodes.push_back(solution.order[seg.start_pos + k]);
  for (int k = 1; k < seg.length; ++k)
    seg.via_depot.push_back(solution.via_depot[seg.start_pos + k]);
  double cap = 1.0;
  for (int k = 0; k <= seg.start_pos; ++k) {
    if (solution.via_depot[k]) cap = 1.0;
    cap -= static_cast<double>(instance.demands[solution.order[k]]) / instance.capacity;
  }
  seg.entry_capacity = cap;
  return seg;
}

std::vector<ForcedAction> segment_targets(ProblemKind kind, const Segment& segment) {
  std::vector<ForcedAction> targets;
  const int omega = static_cast<int>(segment.nodes.size());
  if (kind == ProblemKind::Tsp) {
    // interior nodes only; the destination is appended implicitly
    for (int k = 1; k < omega - 1; ++k) targets.push_back({segment.nodes[k], 0});
  } else {
    // interior nodes plus the destination's flag decision
    for (int k = 1; k < omega; ++k)
      targets.push_back({segment.nodes[k], segment.via_depot[k - 1] ? 0 : 1});
  }
  return targets;
}

void write_metrics_csv(const std::string& path, const std::vector<SilMetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "episode,epoch,mean_loss,dataset_mean_obj,heldout_mean_obj,lr,wallclock_s\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.episode << ',' << r.epoch << ',' << r.mean_loss << ',' << r.dataset_mean_obj
        << ',' << r.heldout_mean_obj << ',' << r.lr << ',' << r.wallclock_s << '\n';
  if (!out) throw IoError("write failed for " + path);
}

std::vector<WarmupMetricsRow> read_warmup_metrics(const std::string& path) {
  std::vector<WarmupMetricsRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    WarmupMetricsRow row;
    char comma;
    if (ss >> row.epoch >> comma >> row.mean_length >> comma >> row.lr >> comma >>
        row.seconds >> comma >> row.cum_seconds)
      rows.push_back(row);
  }
  return rows;
}

void append_warmup_metrics(const std::string& path, const WarmupMetricsRow& row) {
  const bool fresh = !std::ifstream(path).good();
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write " + path);
  if (fresh) out << "epoch,mean_length,lr,seconds,cum_seconds\n";
  out.precision(17);
  out << row.epoch << ',' << row.mean_length << ',' << row.lr << ',' << row.seconds << ','
      << row.cum_seconds << '\n';
}

}  // namespace sila
