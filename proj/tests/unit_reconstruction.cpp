#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "sila/heuristics.hpp"
#include "sila/model.hpp"
#include "sila/reconstruction.hpp"
#include "sila/rng.hpp"

using namespace sila;

namespace {

ModelConfig small_config(ProblemKind kind = ProblemKind::Tsp) {
  ModelConfig cfg;
  cfg.embedding_dim = 16;
  cfg.num_modules = 2;
  cfg.num_heads = 2;
  cfg.ff_hidden = 32;
  cfg.kind = kind;
  return cfg;
}

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

TspTour identity_tour(int n) {
  TspTour t;
  t.order.resize(n);
  std::iota(t.order.begin(), t.order.end(), 0);
  return t;
}

}  // namespace

TEST_CASE("TSP window sampling obeys the omega and count formulas") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 4 + static_cast<int>(rng.uniform_int(0, 96));
    const int l_max = 4 + static_cast<int>(rng.uniform_int(0, 46));
    const TspTour tour = identity_tour(n);
    Rng sample_rng(static_cast<std::uint64_t>(trial) * 977 + 5);
    const SegmentBatch batch = sample_segments_tsp(tour, l_max, sample_rng);

    CHECK(batch.omega >= 4);
    CHECK(batch.omega <= std::min(l_max, n));
    const int expect_m = std::min(l_max / batch.omega, n / batch.omega);
    CHECK(static_cast<int>(batch.segments.size()) == expect_m);

    // windows pairwise disjoint on the cycle; nodes copied from the tour
    std::set<int> covered;
    for (const Segment& seg : batch.segments) {
      CHECK(seg.length == batch.omega);
      CHECK(static_cast<int>(seg.nodes.size()) == batch.omega);
      for (int k = 0; k < seg.length; ++k) {
        const int pos = (seg.start_pos + k) % n;
        CHECK(covered.insert(pos).second);
        const int node = seg.backward ? seg.nodes[seg.length - 1 - k] : seg.nodes[k];
        CHECK(node == tour.order[pos]);
      }
    }
  }
}

TEST_CASE("CVRP window sampling never wraps and tracks entry capacity") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const CvrpInstance inst = generate_cvrp(40, 20, static_cast<std::uint64_t>(trial));
    const CvrpSolution sol = random_insertion_cvrp(inst, static_cast<std::uint64_t>(trial) + 7);
    Rng sample_rng(static_cast<std::uint64_t>(trial) * 31 + 1);
    const SegmentBatch batch = sample_segments_cvrp(inst, sol, 15, sample_rng);

    std::set<int> covered;
    for (const Segment& seg : batch.segments) {
      CHECK(!seg.backward);  // CVRP windows are always forward
      CHECK(seg.start_pos + seg.length <= static_cast<int>(sol.order.size()));
      CHECK(seg.via_depot.size() + 1 == seg.nodes.size());
      for (int k = 0; k < seg.length; ++k) CHECK(covered.insert(seg.start_pos + k).second);

      // independent entry-capacity oracle: replay the prefix of the solution
      double cap = 1.0;
      for (int k = 0; k <= seg.start_pos; ++k) {
        if (sol.via_depot[k]) cap = 1.0;
        cap -= static_cast<double>(inst.demands[sol.order[k]]) / inst.capacity;
      }
      CHECK(seg.entry_capacity == doctest::Approx(cap).epsilon(1e-12));
    }
  }
}

TEST_CASE("TSP segment cost equals the explicit edge sum") {
  const TspInstance inst = generate_tsp(20, 3);
  Segment seg;
  seg.nodes = {4, 9, 0, 17, 2};
  seg.length = 5;
  double expect = 0.0;
  for (int k = 1; k < 5; ++k)
    expect += dist(inst.coords[seg.nodes[k - 1]], inst.coords[seg.nodes[k]]);
  CHECK(segment_cost(inst, seg) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("CVRP segment cost routes via-depot arrivals through the depot") {
  CvrpInstance inst;
  inst.depot = {0.0, 0.0};
  inst.capacity = 10;
  inst.customers = {{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
  inst.demands = {1, 1, 1};
  Segment seg;
  seg.nodes = {0, 1, 2};
  seg.length = 3;
  seg.via_depot = {1, 0};  // 0 -> depot -> 1, then 1 -> 2 direct
  const double expect = (1.0 + 2.0) + 1.0;
  CHECK(segment_cost(inst, seg) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("accept_if_better keeps the incumbent on ties and rejects mismatches") {
  TspInstance inst;
  inst.coords = {{-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}, {1.0, 0.0}};
  Segment old_seg;
  old_seg.nodes = {0, 1, 2, 3};
  old_seg.length = 4;
  Segment mirrored = old_seg;
  mirrored.nodes = {0, 2, 1, 3};  // symmetric layout: identical cost
  CHECK(segment_cost(inst, old_seg) == doctest::Approx(segment_cost(inst, mirrored)));
  const Segment kept = accept_if_better(inst, old_seg, mirrored);
  CHECK(kept.nodes == old_seg.nodes);

  // strictly better candidate wins
  TspInstance line;
  line.coords = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
  Segment bad;
  bad.nodes = {0, 2, 1, 3};
  bad.length = 4;
  Segment good;
  good.nodes = {0, 1, 2, 3};
  good.length = 4;
  const Segment winner = accept_if_better(line, bad, good);
  CHECK(winner.nodes == good.nodes);

  // endpoint mismatch and node-set mismatch are contract violations
  Segment wrong_end = good;
  wrong_end.nodes = {1, 0, 2, 3};
  CHECK_THROWS_AS((void)accept_if_better(line, good, wrong_end), InvalidArgument);
  Segment wrong_set = good;
  wrong_set.nodes = {0, 1, 1, 3};
  CHECK_THROWS_AS((void)accept_if_better(line, good, wrong_set), InvalidArgument);
}

TEST_CASE("merging reversed-direction segments reproduces the window in tour order") {
  const TspInstance inst = generate_tsp(12, 4);
  TspTour tour = identity_tour(12);
  Segment seg;
  seg.start_pos = 9;  // wraps: positions 9, 10, 11, 0
  seg.length = 4;
  seg.backward = true;
  seg.nodes = {0, 11, 10, 9};  // decode order against the tour direction
  merge_segments(inst, tour, {seg});
  CHECK(tour.order == identity_tour(12).order);  // writes back unchanged
}

TEST_CASE("TSP merge applies the exact segment-cost delta to the tour length") {
  const TspInstance inst = generate_tsp(30, 5);
  TspTour tour = random_insertion_tsp(inst, 6);
  Rng rng(7);
  SegmentBatch batch = sample_segments_tsp(tour, 12, rng);

  const double before = tour_length(inst, tour);
  double delta = 0.0;
  std::vector<Segment> improved;
  for (Segment seg : batch.segments) {
    Segment alt = seg;
    std::reverse(alt.nodes.begin() + 1, alt.nodes.end() - 1);  // valid rearrangement
    const Segment kept = accept_if_better(inst, seg, alt);
    delta += segment_cost(inst, kept) - segment_cost(inst, seg);
    improved.push_back(kept);
  }
  merge_segments(inst, tour, improved);
  CHECK(validate_tsp(tour, inst.n()).ok());
  CHECK(tour_length(inst, tour) == doctest::Approx(before + delta).epsilon(1e-9));
  CHECK(delta <= 1e-12);  // accept never worsens
}

TEST_CASE("overlapping segments are rejected by merge") {
  const TspInstance inst = generate_tsp(10, 8);
  TspTour tour = identity_tour(10);
  Segment a, b;
  a.start_pos = 0;
  a.length = 5;
  a.nodes = {0, 1, 2, 3, 4};
  b.start_pos = 4;
  b.length = 4;
  b.nodes = {4, 5, 6, 7};
  CHECK_THROWS_AS(merge_segments(inst, tour, {a, b}), InvalidArgument);
}

TEST_CASE("model reconstruction preserves endpoints and the node multiset") {
  const ModelConfig cfg = small_config();
  auto store = init_model<float>(cfg, 9);
  const TspInstance inst = generate_tsp(40, 10);
  TspTour tour = random_insertion_tsp(inst, 11);
  Rng rng(12);
  const SegmentBatch batch = sample_segments_tsp(tour, 16, rng);

  Tape<float> tape(&store, /*grad_enabled=*/false);
  const auto embed = encode<float>(tape, inst);
  const std::vector<Tape<float>::Ref> embed_of(batch.segments.size(), embed);
  PrcStats stats;
  const auto rebuilt = reconstruct_segments(tape, cfg, embed_of, {}, batch.segments, &stats);
  REQUIRE(rebuilt.size() == batch.segments.size());
  for (std::size_t i = 0; i < rebuilt.size(); ++i) {
    CHECK(rebuilt[i].nodes.front() == batch.segments[i].nodes.front());
    CHECK(rebuilt[i].nodes.back() == batch.segments[i].nodes.back());
    std::vector<int> a = rebuilt[i].nodes, b = batch.segments[i].nodes;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("PRC on TSP yields a monotone trace and a valid final tour") {
  const ModelConfig cfg = small_config();
  auto store = init_model<float>(cfg, 13);
  const TspInstance inst = generate_tsp(30, 14);
  const TspTour start = random_insertion_tsp(inst, 15);
  PrcConfig pc;
  pc.l_max = 12;
  pc.iterations = 10;
  pc.seed = 16;
  const auto result = prc_tsp(inst, start, cfg, store, pc);

  REQUIRE(result.trace.size() == 11);  // initial objective + one per iteration
  CHECK(result.trace.front() == doctest::Approx(tour_length(inst, start)).epsilon(1e-9));
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    CHECK(result.trace[i] <= result.trace[i - 1] + 1e-9);
  CHECK(validate_tsp(result.solution, inst.n()).ok());
  CHECK(result.trace.back() ==
        doctest::Approx(tour_length(inst, result.solution)).epsilon(1e-9));
}

TEST_CASE("PRC on CVRP stays feasible with a monotone trace") {
  const ModelConfig cfg = small_config(ProblemKind::Cvrp);
  auto store = init_model<float>(cfg, 17);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const CvrpInstance inst = generate_cvrp(30, 15, seed);
    const CvrpSolution start = random_insertion_cvrp(inst, seed + 3);
    PrcConfig pc;
    pc.l_max = 10;
    pc.iterations = 6;
    pc.seed = seed + 21;
    const auto result = prc_cvrp(inst, start, cfg, store, pc);
    for (std::size_t i = 1; i < result.trace.size(); ++i)
      CHECK(result.trace[i] <= result.trace[i - 1] + 1e-9);
    CHECK(validate_cvrp(inst, result.solution).ok());
    CHECK(result.trace.back() ==
          doctest::Approx(cvrp_cost(inst, result.solution)).epsilon(1e-9));
  }
}

TEST_CASE("multi-instance PRC matches its single-instance wrapper") {
  const ModelConfig cfg = small_config();
  auto store = init_model<float>(cfg, 23);
  const TspInstance inst = generate_tsp(25, 24);
  const TspTour start = random_insertion_tsp(inst, 25);
  PrcConfig pc;
  pc.l_max = 10;
  pc.iterations = 5;
  pc.seed = 26;

  const auto solo = prc_tsp(inst, start, cfg, store, pc);
  const std::vector<const TspInstance*> instances{&inst};
  const auto batched = prc_tsp<float>(instances, {start}, cfg, store, pc);
  REQUIRE(batched.size() == 1);
  CHECK(batched[0].solution.order == solo.solution.order);
  CHECK(batched[0].trace == solo.trace);
}

TEST_CASE("fuzzed PRC never throws and never worsens") {
  const ModelConfig cfg = small_config();
  auto store = init_model<float>(cfg, 27);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int n = 10 + static_cast<int>(seed) * 7;
    const TspInstance inst = generate_tsp(n, seed ^ 0x55ULL);
    const TspTour start = random_insertion_tsp(inst, seed);
    PrcConfig pc;
    pc.l_max = 4 + static_cast<int>(seed) * 3;
    pc.iterations = 4;
    pc.seed = seed * 101;
    const auto result = prc_tsp(inst, start, cfg, store, pc);
    CHECK(result.trace.back() <= result.trace.front() + 1e-9);
    CHECK(validate_tsp(result.solution, n).ok());
  }
}
