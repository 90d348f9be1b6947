#include "sila/reconstruction.hpp"

#include <algorithm>
#include <unordered_set>

#include "sila/error.hpp"
#include "sila/geometry.hpp"

namespace sila {
namespace {

// Uniform composition of `total` into `parts` non-negative integers via
// stars and bars: choose parts-1 bar positions among total+parts-1 slots
// (Floyd's subset sampling keeps it O(parts)).
std::vector<int> uniform_composition(int total, int parts, Rng& rng) {
  if (parts <= 0) return {};
  if (parts == 1) return {total};
  const int slots = total + parts - 1;
  std::unordered_set<int> bars;
  for (int j = slots - (parts - 1) + 1; j <= slots; ++j) {
    const int t = static_cast<int>(rng.uniform_int(1, j));
    if (!bars.insert(t).second) bars.insert(j);
  }
  std::vector<int> sorted(bars.begin(), bars.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> gaps(parts);
  gaps[0] = sorted[0] - 1;
  for (int i = 1; i < parts - 1; ++i) gaps[i] = sorted[i] - sorted[i - 1] - 1;
  gaps[parts - 1] = slots - sorted.back();
  return gaps;
}

struct Windows {
  int omega = 0;
  std::vector<int> starts;
};

// omega ~ U[4, min(l_max, n)], M = min(floor(l_max/omega), floor(n/omega))
// non-overlapping windows, uniformly placed. Cyclic placement (TSP) may wrap
// position 0; linear placement (CVRP) never does.
Windows sample_windows(int n, int l_max, bool cyclic, Rng& rng) {
  if (n < 4) throw InvalidArgument("sample_segments: solution too small (n < 4)");
  if (l_max < 4) throw InvalidArgument("sample_segments: l_max must be >= 4");
  Windows w;
  w.omega = static_cast<int>(rng.uniform_int(4, std::min(l_max, n)));
  const int M = std::min(l_max / w.omega, n / w.omega);
  const int free_positions = n - M * w.omega;
  if (cyclic) {
    const auto gaps = uniform_composition(free_positions, M, rng);
    int pos = static_cast<int>(rng.uniform_int(0, n - 1));
    for (int i = 0; i < M; ++i) {
      pos += gaps[i];
      w.starts.push_back(pos % n);
      pos += w.omega;
    }
  } else {
    const auto gaps = uniform_composition(free_positions, M + 1, rng);
    int pos = 0;
    for (int i = 0; i < M; ++i) {
      pos += gaps[i];
      w.starts.push_back(pos);
      pos += w.omega;
    }
  }
  return w;
}

}  // namespace

SegmentBatch sample_segments_tsp(const TspTour& tour, int l_max, Rng& rng) {
  const int n = static_cast<int>(tour.order.size());
  SegmentBatch batch;
  batch.backward = rng.uniform() < 0.5;  // one direction per batch
  const Windows w = sample_windows(n, l_max, /*cyclic=*/true, rng);
  batch.omega = w.omega;
  for (const int s : w.starts) {
    Segment seg;
    seg.start_pos = s;
    seg.length = w.omega;
    seg.backward = batch.backward;
    seg.nodes.reserve(w.omega);
    for (int k = 0; k < w.omega; ++k) seg.nodes.push_back(tour.order[(s + k) % n]);
    if (batch.backward) std::reverse(seg.nodes.begin(), seg.nodes.end());
    batch.segments.push_back(std::move(seg));
  }
  return batch;
}

SegmentBatch sample_segments_cvrp(const CvrpInstance& instance, const CvrpSolution& solution,
                                  int l_max, Rng& rng) {
  const int n = static_cast<int>(solution.order.size());
  SegmentBatch batch;
  // CVRP visit orders are anchored at the depot, so windows stay forward and
  // never wrap; via-depot flags encode the traversal direction.
  batch.backward = false;
  const Windows w = sample_windows(n, l_max, /*cyclic=*/false, rng);
  batch.omega = w.omega;

  // remaining capacity just after serving each position
  std::vector<double> after(n, 0.0);
  double cap = 1.0;
  for (int k = 0; k < n; ++k) {
    if (solution.via_depot[k]) cap = 1.0;
    cap -= static_cast<double>(instance.demands[solution.order[k]]) / instance.capacity;
    after[k] = cap;
  }

  for (const int s : w.starts) {
    Segment seg;
    seg.start_pos = s;
    seg.length = w.omega;
    seg.entry_capacity = after[s];
    seg.nodes.reserve(w.omega);
    for (int k = 0; k < w.omega; ++k) seg.nodes.push_back(solution.order[s + k]);
    seg.via_depot.reserve(w.omega - 1);
    for (int k = 1; k < w.omega; ++k) seg.via_depot.push_back(solution.via_depot[s + k]);
    batch.segments.push_back(std::move(seg));
  }
  return batch;
}

double segment_cost(const TspInstance& instance, const Segment& segment) {
  double cost = 0.0;
  for (std::size_t k = 1; k < segment.nodes.size(); ++k)
    cost += distance(instance.coords[segment.nodes[k - 1]], instance.coords[segment.nodes[k]]);
  return cost;
}

double segment_cost(const CvrpInstance& instance, const Segment& segment) {
  if (segment.via_depot.size() + 1 != segment.nodes.size())
    throw InvalidArgument("segment_cost: CVRP segment flag count mismatch");
  double cost = 0.0;
  for (std::size_t k = 1; k < segment.nodes.size(); ++k) {
    const Point& prev = instance.customers[segment.nodes[k - 1]];
    const Point& cur = instance.customers[segment.nodes[k]];
    if (segment.via_depot[k - 1])
      cost += distance(prev, instance.depot) + distance(instance.depot, cur);
    else
      cost += distance(prev, cur);
  }
  return cost;
}

namespace {

template <typename Inst>
Segment accept_impl(const Inst& instance, Segment old_seg, Segment new_seg) {
  if (old_seg.nodes.size() != new_seg.nodes.size() ||
      old_seg.nodes.front() != new_seg.nodes.front() ||
      old_seg.nodes.back() != new_seg.nodes.back())
    throw InvalidArgument("accept_if_better: endpoint mismatch");
  std::vector<int> a = old_seg.nodes, b = new_seg.nodes;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw InvalidArgument("accept_if_better: node multiset mismatch");
  // strictly better wins; ties keep the incumbent
  return segment_cost(instance, new_seg) < segment_cost(instance, old_seg) ? std::move(new_seg)
                                                                           : std::move(old_seg);
}

}  // namespace

Segment accept_if_better(const TspInstance& instance, Segment old_seg, Segment new_seg) {
  return accept_impl(instance, std::move(old_seg), std::move(new_seg));
}

Segment accept_if_better(const CvrpInstance& instance, Segment old_seg, Segment new_seg) {
  return accept_impl(instance, std::move(old_seg), std::move(new_seg));
}

void merge_segments(const TspInstance& instance, TspTour& tour,
                    const std::vector<Segment>& segments) {
  const int n = static_cast<int>(tour.order.size());
  std::vector<std::uint8_t> used(n, 0);
  for (const Segment& seg : segments) {
    for (int k = 0; k < seg.length; ++k) {
      const int pos = (seg.start_pos + k) % n;
      if (used[pos]) throw InvalidArgument("merge_segments: overlapping segments");
      used[pos] = 1;
      tour.order[pos] = seg.backward ? seg.nodes[seg.length - 1 - k] : seg.nodes[k];
    }
  }
  const auto check = validate_tsp(tour, instance.n());
  if (!check.ok()) throw FeasibilityError("merge_segments: merged tour is invalid");
}

void merge_segments(const CvrpInstance& instance, CvrpSolution& solution,
                    const std::vector<Segment>& segments, PrcStats* stats) {
  const int n = static_cast<int>(solution.order.size());
  std::vector<std::uint8_t> used(n, 0);
  for (const Segment& seg : segments) {
    for (int k = 0; k < seg.length; ++k) {
      const int pos = seg.start_pos + k;
      if (pos >= n) throw InvalidArgument("merge_segments: CVRP segment out of range");
      if (used[pos]) throw InvalidArgument("merge_segments: overlapping segments");
      used[pos] = 1;
    }
  }
  // Segments apply one at a time: reconstruction may have moved depot visits,
  // so capacity downstream of a window can shift — re-validate and revert any
  // segment that would break feasibility.
  for (const Segment& seg : segments) {
    CvrpSolution candidate = solution;
    for (int k = 0; k < seg.length; ++k) candidate.order[seg.start_pos + k] = seg.nodes[k];
    for (int k = 1; k < seg.length; ++k)
      candidate.via_depot[seg.start_pos + k] = seg.via_depot[k - 1];
    if (validate_cvrp(instance, candidate).ok()) {
      solution = std::move(candidate);
    } else if (stats) {
      ++stats->rejected_merges;
    }
  }
}

}  // namespace sila
