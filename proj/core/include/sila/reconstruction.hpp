#ifndef SILA_RECONSTRUCTION_HPP
#define SILA_RECONSTRUCTION_HPP

#include <cstdint>
#include <vector>

#include "sila/model.hpp"
#include "sila/solution.hpp"

namespace sila {

// One partial solution: a contiguous window of the parent visit order with
// fixed endpoints. `nodes` lists node ids in decoding order (first = start,
// last = destination); `backward` records that the window was sampled against
// tour direction, so merging writes it back reversed. CVRP: `via_depot` holds
// the flags of nodes[1..] (the start node's arrival flag lies outside the
// window and is fixed), `entry_capacity` is d_r just after serving nodes[0].
struct Segment {
  int start_pos = 0;
  int length = 0;  // omega, node count including both endpoints
  bool backward = false;
  std::vector<int> nodes;
  std::vector<std::uint8_t> via_depot;
  double entry_capacity = 1.0;
};

struct SegmentBatch {
  std::vector<Segment> segments;
  int omega = 0;
  bool backward = false;  // one direction flag per batch
};

struct PrcConfig {
  int l_max = 1000;
  int iterations = 100;
  std::uint64_t seed = 0;
};

struct PrcStats {
  long long infeasible_reconstructions = 0;
  long long rejected_merges = 0;
  long long accepted = 0;
};

// omega ~ uniform [4, min(l_max, n)], M = min(floor(l_max/omega),
// floor(n/omega)) pairwise non-overlapping windows placed uniformly at
// random (cyclic for TSP; CVRP windows never wrap since the visit order is
// anchored at the depot). Throws InvalidArgument for n < 4.
SegmentBatch sample_segments_tsp(const TspTour& tour, int l_max, Rng& rng);
SegmentBatch sample_segments_cvrp(const CvrpInstance& instance, const CvrpSolution& solution,
                                  int l_max, Rng& rng);

// Window-local objective: the omega-1 arrival edges of nodes[1..], flag-aware
// for CVRP (a via-depot arrival costs d(prev, depot) + d(depot, node)).
// Boundary edges outside the window cannot change and are excluded.
double segment_cost(const TspInstance& instance, const Segment& segment);
double segment_cost(const CvrpInstance& instance, const Segment& segment);

// Returns the strictly cheaper segment; ties keep `old_seg`. Throws
// InvalidArgument if the node multisets or endpoints disagree.
Segment accept_if_better(const TspInstance& instance, Segment old_seg, Segment new_seg);
Segment accept_if_better(const CvrpInstance& instance, Segment old_seg, Segment new_seg);

// Replaces each segment's window in the visit order. Windows must be
// pairwise non-overlapping. The CVRP overload re-validates the merged
// solution after each segment (capacity downstream of a window may shift)
// and reverts segments that would break feasibility, counting them.
void merge_segments(const TspInstance& instance, TspTour& tour,
                    const std::vector<Segment>& segments);
void merge_segments(const CvrpInstance& instance, CvrpSolution& solution,
                    const std::vector<Segment>& segments, PrcStats* stats = nullptr);

// Greedy model re-decoding of each segment between its fixed endpoints, all
// segments batched into shared decode steps. `embed_of[i]` is the tape ref of
// segment i's encoded instance. Node multiset and endpoints are preserved.
template <typename T>
std::vector<Segment> reconstruct_segments(Tape<T>& tape, const ModelConfig& cfg,
                                          const std::vector<typename Tape<T>::Ref>& embed_of,
                                          const std::vector<const CvrpInstance*>& cvrp_of,
                                          const std::vector<Segment>& segments,
                                          PrcStats* stats = nullptr) {
  const bool cvrp = cfg.kind == ProblemKind::Cvrp;
  const int S = static_cast<int>(segments.size());
  if (static_cast<int>(embed_of.size()) != S)
    throw InvalidArgument("reconstruct_segments: embedding list size mismatch");
  std::vector<DecodeState> states(S);
  for (int i = 0; i < S; ++i) {
    const Segment& seg = segments[i];
    DecodeState& st = states[i];
    st.kind = cfg.kind;
    st.embeddings = embed_of[i];
    st.start = seg.nodes.front();
    st.dest = seg.nodes.back();
    st.available.assign(seg.nodes.begin() + 1, seg.nodes.end() - 1);
    if (cvrp) {
      st.cvrp = cvrp_of[i];
      st.remaining_capacity = seg.entry_capacity;
      st.finish_with_dest = true;  // the destination's flag is re-decided
    }
  }
  std::vector<RolloutOutcome<T>> outcomes;
  try {
    outcomes = run_rollouts(tape, cfg, states, DecodeMode::Greedy, nullptr);
  } catch (const FeasibilityError&) {
    if (stats) stats->infeasible_reconstructions += S;
    return segments;  // dead end: keep the originals
  }
  std::vector<Segment> out(segments);
  for (int i = 0; i < S; ++i) {
    Segment& seg = out[i];
    seg.nodes.assign(1, segments[i].nodes.front());
    seg.nodes.insert(seg.nodes.end(), outcomes[i].order.begin(), outcomes[i].order.end());
    if (cvrp) {
      seg.via_depot = outcomes[i].via_depot;  // interior + destination flags
    } else {
      seg.nodes.push_back(segments[i].nodes.back());  // destination appended
    }
  }
  return out;
}

template <typename TourT>
struct PrcResult {
  TourT solution;
  std::vector<double> trace;  // objective after each iteration; size iters+1
  PrcStats stats;
};

// PRC over a set of TSP instances in lockstep: every iteration batches all
// instances' segments into shared decode steps. Objective traces are exactly
// monotone non-increasing by the accept-if-better rule.
template <typename T>
std::vector<PrcResult<TspTour>> prc_tsp(const std::vector<const TspInstance*>& instances,
                                        std::vector<TspTour> starts, const ModelConfig& cfg,
                                        ParameterStore<T>& store, const PrcConfig& config) {
  if (cfg.kind != ProblemKind::Tsp) throw InvalidArgument("prc_tsp: model is not a TSP model");
  if (config.l_max < 4) throw InvalidArgument("prc: l_max must be >= 4");
  const int N = static_cast<int>(instances.size());
  if (static_cast<int>(starts.size()) != N)
    throw InvalidArgument("prc: instance/start count mismatch");
  std::vector<PrcResult<TspTour>> results(N);
  Rng rng(config.seed);
  std::vector<Rng> inst_rng;
  inst_rng.reserve(N);
  for (int i = 0; i < N; ++i) inst_rng.push_back(rng.fork(static_cast<std::uint64_t>(i)));
  for (int i = 0; i < N; ++i) {
    results[i].solution = std::move(starts[i]);
    results[i].trace.push_back(tour_length(*instances[i], results[i].solution));
  }
  for (int iter = 0; iter < config.iterations; ++iter) {
    Tape<T> tape(&store, /*grad_enabled=*/false);
    std::vector<Segment> all_segments;
    std::vector<typename Tape<T>::Ref> embed_of;
    std::vector<int> owner;
    std::vector<int> counts(N, 0);
    for (int i = 0; i < N; ++i) {
      const auto batch = sample_segments_tsp(results[i].solution, config.l_max, inst_rng[i]);
      const auto embed = encode<T>(tape, *instances[i]);
      counts[i] = static_cast<int>(batch.segments.size());
      for (const Segment& s : batch.segments) {
        all_segments.push_back(s);
        embed_of.push_back(embed);
        owner.push_back(i);
      }
    }
    const auto redone = reconstruct_segments(tape, cfg, embed_of, {}, all_segments, nullptr);
    std::size_t at = 0;
    for (int i = 0; i < N; ++i) {
      std::vector<Segment> accepted;
      for (int k = 0; k < counts[i]; ++k, ++at) {
        Segment kept = accept_if_better(*instances[i], all_segments[at], redone[at]);
        if (segment_cost(*instances[i], kept) < segment_cost(*instances[i], all_segments[at]))
          ++results[i].stats.accepted;
        accepted.push_back(std::move(kept));
      }
      merge_segments(*instances[i], results[i].solution, accepted);
      results[i].trace.push_back(tour_length(*instances[i], results[i].solution));
    }
  }
  return results;
}

template <typename T>
std::vector<PrcResult<CvrpSolution>> prc_cvrp(const std::vector<const CvrpInstance*>& instances,
                                              std::vector<CvrpSolution> starts,
                                              const ModelConfig& cfg, ParameterStore<T>& store,
                                              const PrcConfig& config) {
  if (cfg.kind != ProblemKind::Cvrp) throw InvalidArgument("prc_cvrp: model is not a CVRP model");
  if (config.l_max < 4) throw InvalidArgument("prc: l_max must be >= 4");
  const int N = static_cast<int>(instances.size());
  if (static_cast<int>(starts.size()) != N)
    throw InvalidArgument("prc: instance/start count mismatch");
  std::vector<PrcResult<CvrpSolution>> results(N);
  Rng rng(config.seed);
  std::vector<Rng> inst_rng;
  inst_rng.reserve(N);
  for (int i = 0; i < N; ++i) inst_rng.push_back(rng.fork(static_cast<std::uint64_t>(i)));
  for (int i = 0; i < N; ++i) {
    results[i].solution = std::move(starts[i]);
    results[i].trace.push_back(cvrp_cost(*instances[i], results[i].solution));
  }
  for (int iter = 0; iter < config.iterations; ++iter) {
    Tape<T> tape(&store, /*grad_enabled=*/false);
    std::vector<Segment> all_segments;
    std::vector<typename Tape<T>::Ref> embed_of;
    std::vector<const CvrpInstance*> cvrp_of;
    std::vector<int> counts(N, 0);
    for (int i = 0; i < N; ++i) {
      const auto batch =
          sample_segments_cvrp(*instances[i], results[i].solution, config.l_max, inst_rng[i]);
      const auto embed = encode<T>(tape, *instances[i]);
      counts[i] = static_cast<int>(batch.segments.size());
      for (const Segment& s : batch.segments) {
        all_segments.push_back(s);
        embed_of.push_back(embed);
        cvrp_of.push_back(instances[i]);
      }
    }
    const auto redone = reconstruct_segments(tape, cfg, embed_of, cvrp_of, all_segments,
                                             N > 0 ? &results[0].stats : nullptr);
    std::size_t at = 0;
    for (int i = 0; i < N; ++i) {
      std::vector<Segment> accepted;
      for (int k = 0; k < counts[i]; ++k, ++at)
        accepted.push_back(accept_if_better(*instances[i], all_segments[at], redone[at]));
      merge_segments(*instances[i], results[i].solution, accepted, &results[i].stats);
      results[i].trace.push_back(cvrp_cost(*instances[i], results[i].solution));
    }
  }
  return results;
}

// Single-instance conveniences.
template <typename T>
PrcResult<TspTour> prc_tsp(const TspInstance& instance, TspTour start, const ModelConfig& cfg,
                           ParameterStore<T>& store, const PrcConfig& config) {
  std::vector<TspTour> starts{std::move(start)};
  return prc_tsp<T>({&instance}, std::move(starts), cfg, store, config)[0];
}

template <typename T>
PrcResult<CvrpSolution> prc_cvrp(const CvrpInstance& instance, CvrpSolution start,
                                 const ModelConfig& cfg, ParameterStore<T>& store,
                                 const PrcConfig& config) {
  std::vector<CvrpSolution> starts{std::move(start)};
  return prc_cvrp<T>({&instance}, std::move(starts), cfg, store, config)[0];
}

}  // namespace sila

#endif
