#ifndef SILA_BENCH_HPP
#define SILA_BENCH_HPP

#include <chrono>
#include <string>
#include <vector>

#include "sila/model.hpp"

namespace sila {

struct MemoryEntry {
  int size = 0;              // available-node count m
  long long peak_bytes = 0;  // ledger-counted peak live activation bytes
  double step_ms = 0.0;
  bool out_of_budget = false;
};

struct MemoryReport {
  std::string variant;  // "linear" or "quadratic"
  std::vector<MemoryEntry> entries;
};

enum class DecoderVariant { Linear, Quadratic };

// Peak live activation bytes of one decode step per size, counted by the
// allocation ledger (never OS RSS). The step runs exactly as in training
// (gradients enabled, attention weights cached), which is where the linear
// versus quadratic distinction matters. Sizes whose estimated footprint
// exceeds `budget_bytes` become out-of-budget entries instead of crashing.
template <typename T>
MemoryReport bench_memory(const std::vector<int>& sizes, DecoderVariant variant,
                          const ModelConfig& cfg, ParameterStore<T>& store,
                          std::uint64_t seed,
                          long long budget_bytes = 3'750'000'000LL) {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] <= 0) throw InvalidArgument("bench_memory: sizes must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1])
      throw InvalidArgument("bench_memory: sizes must be strictly increasing");
  }
  MemoryReport report;
  report.variant = variant == DecoderVariant::Linear ? "linear" : "quadratic";
  for (const int m : sizes) {
    MemoryEntry entry;
    entry.size = m;
    if (variant == DecoderVariant::Quadratic) {
      // dominated by the cached attention weights: L layers x heads x m^2
      const long long est = static_cast<long long>(cfg.num_modules) * cfg.num_heads *
                            static_cast<long long>(m) * m * static_cast<long long>(sizeof(T));
      if (est > budget_bytes) {
        entry.out_of_budget = true;
        report.entries.push_back(entry);
        continue;
      }
    }
    const TspInstance instance = generate_tsp(m + 1, seed + static_cast<std::uint64_t>(m));
    auto& ledger = AllocationLedger::instance();
    try {
      Tape<T> tape(&store, /*grad_enabled=*/true);
      const auto embed = encode<T>(tape, instance);
      DecodeState st;
      st.kind = ProblemKind::Tsp;
      st.embeddings = embed;
      st.start = st.dest = m;  // the extra node; m nodes stay available
      for (int j = 0; j < m; ++j) st.available.push_back(j);
      const std::vector<const DecodeState*> states{&st};

      ledger.reset();
      ledger.enabled = true;
      const auto t0 = std::chrono::steady_clock::now();
      if (variant == DecoderVariant::Linear)
        (void)decode_step(tape, cfg, states);
      else
        (void)decode_step_reference(tape, cfg, states);
      entry.step_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count();
      entry.peak_bytes = ledger.peak_bytes;
      ledger.enabled = false;
    } catch (const std::bad_alloc&) {
      ledger.enabled = false;
      entry.out_of_budget = true;
    }
    report.entries.push_back(entry);
  }
  return report;
}

// Per-step near/far selection-probability summary plus a rank histogram.
struct StepProfile {
  double near5 = 0.0;  // mean probability over the 5 nearest available nodes
  double far5 = 0.0;   // mean probability over the 5 farthest
};

struct ProbProfile {
  std::vector<double> bucket_mean;       // mean probability per distance-rank bucket
  std::vector<long long> bucket_count;   // decode steps contributing per bucket
  std::vector<StepProfile> steps;        // steps with >= 10 available nodes
};

// Walks greedy rollouts and buckets each step's selection probabilities by
// the nodes' distance rank to the current start node (Figure-7-style
// diagnostic). Steps with fewer than `buckets` available nodes are skipped.
template <typename T>
ProbProfile prob_distance_profile(const ModelConfig& cfg, ParameterStore<T>& store,
                                  const std::vector<TspInstance>& instances, int buckets,
                                  std::uint64_t seed) {
  if (buckets <= 0) throw InvalidArgument("prob_distance_profile: buckets must be positive");
  ProbProfile profile;
  profile.bucket_mean.assign(buckets, 0.0);
  profile.bucket_count.assign(buckets, 0);
  Rng rng(seed);
  for (const TspInstance& inst : instances) {
    Tape<T> tape(&store, /*grad_enabled=*/false);
    const auto embed = encode<T>(tape, inst);
    const std::size_t watermark = tape.node_count();
    DecodeState st;
    st.kind = ProblemKind::Tsp;
    st.embeddings = embed;
    const int first = static_cast<int>(rng.uniform_int(0, inst.n() - 1));
    st.start = st.dest = first;
    for (int j = 0; j < inst.n(); ++j)
      if (j != first) st.available.push_back(j);

    while (!st.available.empty()) {
      const std::vector<const DecodeState*> states{&st};
      const auto step = decode_step(tape, cfg, states);
      const auto probs = step_probs(tape, step, 0);
      const int base = step.base[0];
      const int a = static_cast<int>(st.available.size());

      // available indices sorted by distance to the current start node
      std::vector<int> rank(a);
      for (int k = 0; k < a; ++k) rank[k] = k;
      std::sort(rank.begin(), rank.end(), [&](int x, int y) {
        return distance(inst.coords[st.start], inst.coords[st.available[x]]) <
               distance(inst.coords[st.start], inst.coords[st.available[y]]);
      });
      if (a >= buckets) {
        for (int r = 0; r < a; ++r) {
          const int bucket = static_cast<int>(static_cast<long long>(r) * buckets / a);
          profile.bucket_mean[bucket] += probs[base + rank[r]];
          profile.bucket_count[bucket] += 1;
        }
      }
      if (a >= 10) {
        StepProfile sp;
        for (int r = 0; r < 5; ++r) {
          sp.near5 += probs[base + rank[r]] / 5.0;
          sp.far5 += probs[base + rank[a - 1 - r]] / 5.0;
        }
        profile.steps.push_back(sp);
      }

      // greedy advance (ties toward the lowest node index)
      int pick = 0;
      for (int k = 1; k < a; ++k) {
        if (probs[base + k] > probs[base + pick] ||
            (probs[base + k] == probs[base + pick] && st.available[k] < st.available[pick]))
          pick = k;
      }
      st.start = st.available[pick];
      st.available.erase(st.available.begin() + pick);
      tape.truncate(watermark);
    }
  }
  for (int b = 0; b < buckets; ++b)
    if (profile.bucket_count[b] > 0) profile.bucket_mean[b] /= profile.bucket_count[b];
  return profile;
}

void write_memory_csv(const std::string& path, const MemoryReport& report);
void write_profile_csv(const std::string& path, const ProbProfile& profile);

}  // namespace sila

#endif
