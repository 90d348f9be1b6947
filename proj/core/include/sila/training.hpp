#ifndef SILA_TRAINING_HPP
#define SILA_TRAINING_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "sila/checkpoint.hpp"
#include "sila/heuristics.hpp"
#include "sila/model.hpp"
#include "sila/reconstruction.hpp"

namespace sila {

// ---------------------------------------------------------------- warm-up --

struct WarmupConfig {
  int n = 20;                     // instance scale
  int epochs = 30;
  int batch_size = 64;            // instances per optimizer step
  int instances_per_epoch = 2000;
  int micro_batch = 8;            // instances per tape (gradient accumulation)
  int capacity = 30;              // CVRP warm-up vehicle capacity
  std::uint64_t seed = 0;
};

struct WarmupEpochResult {
  double mean_length = 0.0;       // mean sampled-rollout objective this epoch
  long long rejected_steps = 0;
};

// One policy-gradient epoch: per instance, n multi-start sampled rollouts
// (rollout i starts at node i), shared baseline b(s) = mean return, return
// R = -length, advantage-weighted log-likelihood ascent, one Adam step per
// batch with deterministic micro-batch gradient accumulation.
template <typename T>
WarmupEpochResult warmup_epoch(ParameterStore<T>& store, AdamState& adam,
                               const ModelConfig& cfg, const WarmupConfig& wc, Rng& rng) {
  using Ref = typename Tape<T>::Ref;
  const bool cvrp = cfg.kind == ProblemKind::Cvrp;
  const int n = wc.n;
  WarmupEpochResult result;
  long long rollouts_total = 0;

  for (int done = 0; done < wc.instances_per_epoch;) {
    const int batch = std::min(wc.batch_size, wc.instances_per_epoch - done);
    store.zero_grads();
    for (int mb = 0; mb < batch;) {
      const int chunk = std::min(wc.micro_batch, batch - mb);
      Tape<T> tape(&store, /*grad_enabled=*/true);
      std::vector<DecodeState> states;
      states.reserve(static_cast<std::size_t>(chunk) * n);
      std::vector<TspInstance> tsp_chunk(cvrp ? 0 : chunk);
      std::vector<CvrpInstance> cvrp_chunk(cvrp ? chunk : 0);
      for (int c = 0; c < chunk; ++c) {
        const std::uint64_t inst_seed = rng.next_u64();
        Ref embed = -1;
        if (cvrp) {
          cvrp_chunk[c] = generate_cvrp(n, wc.capacity, inst_seed);
          embed = encode<T>(tape, cvrp_chunk[c]);
        } else {
          tsp_chunk[c] = generate_tsp(n, inst_seed);
          embed = encode<T>(tape, tsp_chunk[c]);
        }
        for (int i = 0; i < n; ++i) {  // multi-start: rollout i begins at node i
          DecodeState st;
          st.kind = cfg.kind;
          st.embeddings = embed;
          st.start = st.dest = i;
          if (cvrp) {
            st.cvrp = &cvrp_chunk[c];
            st.remaining_capacity =
                1.0 - static_cast<double>(cvrp_chunk[c].demands[i]) / cvrp_chunk[c].capacity;
          }
          for (int j = 0; j < n; ++j)
            if (j != i) st.available.push_back(j);
          states.push_back(std::move(st));
        }
      }
      Rng roll_rng = rng.fork(0x726f6c6cULL);
      auto outcomes = run_rollouts(tape, cfg, states, DecodeMode::Sample, &roll_rng,
                                   /*record_nll=*/true);

      std::vector<Ref> weighted;
      weighted.reserve(outcomes.size());
      for (int c = 0; c < chunk; ++c) {
        std::vector<double> lengths(n);
        for (int i = 0; i < n; ++i) {
          const auto& oc = outcomes[static_cast<std::size_t>(c) * n + i];
          if (cvrp) {
            CvrpSolution sol;
            sol.order.push_back(i);
            sol.via_depot.push_back(1);
            sol.order.insert(sol.order.end(), oc.order.begin(), oc.order.end());
            sol.via_depot.insert(sol.via_depot.end(), oc.via_depot.begin(),
                                 oc.via_depot.end());
            lengths[i] = cvrp_cost(cvrp_chunk[c], sol);
          } else {
            TspTour tour;
            tour.order.push_back(i);
            tour.order.insert(tour.order.end(), oc.order.begin(), oc.order.end());
            lengths[i] = tour_length(tsp_chunk[c], tour);
          }
          result.mean_length += lengths[i];
          ++rollouts_total;
        }
        double baseline = 0.0;
        for (double len : lengths) baseline += len;
        baseline /= n;
        for (int i = 0; i < n; ++i) {
          const auto& oc = outcomes[static_cast<std::size_t>(c) * n + i];
          const double advantage = -lengths[i] - (-baseline);  // R - b(s), R = -length
          const double w = advantage / (static_cast<double>(batch) * n);
          if (oc.nll_nodes.empty() || w == 0.0) continue;
          weighted.push_back(tape.scale(tape.sum_scalars(oc.nll_nodes), w));
        }
      }
      if (!weighted.empty()) tape.backward(tape.sum_scalars(weighted));
      mb += chunk;
    }
    if (!adam.step(store)) ++result.rejected_steps;
    done += batch;
  }
  if (rollouts_total > 0) result.mean_length /= static_cast<double>(rollouts_total);
  return result;
}

// Mean greedy full-rollout objective over a set of instances, batched into
// shared decode steps on one no-grad tape. First nodes are drawn per
// instance from `seed`.
template <typename T>
std::vector<double> greedy_tsp_lengths(const std::vector<const TspInstance*>& instances,
                                       const ModelConfig& cfg, ParameterStore<T>& store,
                                       std::uint64_t seed) {
  Tape<T> tape(&store, /*grad_enabled=*/false);
  Rng rng(seed);
  const int N = static_cast<int>(instances.size());
  std::vector<DecodeState> states(N);
  std::vector<int> firsts(N);
  for (int i = 0; i < N; ++i) {
    const auto embed = encode<T>(tape, *instances[i]);
    DecodeState& st = states[i];
    st.kind = ProblemKind::Tsp;
    st.embeddings = embed;
    firsts[i] = static_cast<int>(rng.uniform_int(0, instances[i]->n() - 1));
    st.start = st.dest = firsts[i];
    for (int j = 0; j < instances[i]->n(); ++j)
      if (j != firsts[i]) st.available.push_back(j);
  }
  auto outcomes = run_rollouts(tape, cfg, states, DecodeMode::Greedy, nullptr);
  std::vector<double> lengths(N);
  for (int i = 0; i < N; ++i) {
    TspTour tour;
    tour.order.push_back(firsts[i]);
    tour.order.insert(tour.order.end(), outcomes[i].order.begin(), outcomes[i].order.end());
    lengths[i] = tour_length(*instances[i], tour);
  }
  return lengths;
}

// ------------------------------------------------------ SIL training loop --

struct SilConfig {
  int episodes = 2;
  int prc_iterations = 100;  // reconstruction iterations per episode
  int train_epochs = 20;     // cross-entropy epochs per episode
  int batch_size = 64;
  int micro_batch = 8;
  int l_max = 1000;
  double improvement_threshold = 1e-4;  // relative held-out improvement
  std::uint64_t seed = 0;
};

// Instances plus their current best (pseudo-label) solutions.
struct TspTrainingSet {
  std::vector<TspInstance> instances;
  std::vector<TspTour> best;
  std::vector<std::vector<double>> history;  // mean-objective-relevant per-instance trace
  int episode = 0;

  int size() const { return static_cast<int>(instances.size()); }
};

struct CvrpTrainingSet {
  std::vector<CvrpInstance> instances;
  std::vector<CvrpSolution> best;
  std::vector<std::vector<double>> history;
  int episode = 0;

  int size() const { return static_cast<int>(instances.size()); }
};

// Random-insertion initialization of the pseudo-label pool.
TspTrainingSet make_training_set(std::vector<TspInstance> instances, std::uint64_t seed);
CvrpTrainingSet make_training_set(std::vector<CvrpInstance> instances, std::uint64_t seed);

// One contiguous pseudo-label window: omega ~ U[4, min(l_max, n)], uniform
// position (cyclic for TSP), uniform direction (TSP only).
Segment sample_training_segment(const TspTour& tour, int l_max, Rng& rng);
Segment sample_training_segment(const CvrpInstance& instance, const CvrpSolution& solution,
                                int l_max, Rng& rng);

// Teacher-forcing targets for a pseudo-label segment: its interior nodes in
// order (CVRP: with via-depot actions, plus the destination's flag decision).
std::vector<ForcedAction> segment_targets(ProblemKind kind, const Segment& segment);

template <typename T>
DecodeState segment_state(const ModelConfig& cfg, typename Tape<T>::Ref embed,
                          const Segment& seg, const CvrpInstance* cvrp) {
  DecodeState st;
  st.kind = cfg.kind;
  st.embeddings = embed;
  st.start = seg.nodes.front();
  st.dest = seg.nodes.back();
  st.available.assign(seg.nodes.begin() + 1, seg.nodes.end() - 1);
  if (cfg.kind == ProblemKind::Cvrp) {
    st.cvrp = cvrp;
    st.remaining_capacity = seg.entry_capacity;
    st.finish_with_dest = true;
  }
  return st;
}

// Improves every stored solution with PRC under the current model; returns
// the new mean objective. Instances run in lockstep groups so each decode
// step stays one large batched tape op.
template <typename T>
double reconstruction_epoch(TspTrainingSet& ds, const ModelConfig& cfg, ParameterStore<T>& store,
                            const PrcConfig& config, int group_size = 16) {
  double total = 0.0;
  for (int at = 0; at < ds.size(); at += group_size) {
    const int count = std::min(group_size, ds.size() - at);
    std::vector<const TspInstance*> instances(count);
    std::vector<TspTour> starts(count);
    for (int i = 0; i < count; ++i) {
      instances[i] = &ds.instances[at + i];
      starts[i] = ds.best[at + i];
    }
    PrcConfig group_cfg = config;
    group_cfg.seed = config.seed ^ (static_cast<std::uint64_t>(at) * 0x9e3779b97f4a7c15ULL);
    auto results = prc_tsp<T>(instances, std::move(starts), cfg, store, group_cfg);
    for (int i = 0; i < count; ++i) {
      ds.best[at + i] = std::move(results[i].solution);
      const double obj = results[i].trace.back();
      ds.history[at + i].push_back(obj);
      total += obj;
    }
  }
  return ds.size() > 0 ? total / ds.size() : 0.0;
}

template <typename T>
double reconstruction_epoch(CvrpTrainingSet& ds, const ModelConfig& cfg, ParameterStore<T>& store,
                            const PrcConfig& config, int group_size = 16) {
  double total = 0.0;
  for (int at = 0; at < ds.size(); at += group_size) {
    const int count = std::min(group_size, ds.size() - at);
    std::vector<const CvrpInstance*> instances(count);
    std::vector<CvrpSolution> starts(count);
    for (int i = 0; i < count; ++i) {
      instances[i] = &ds.instances[at + i];
      starts[i] = ds.best[at + i];
    }
    PrcConfig group_cfg = config;
    group_cfg.seed = config.seed ^ (static_cast<std::uint64_t>(at) * 0x9e3779b97f4a7c15ULL);
    auto results = prc_cvrp<T>(instances, std::move(starts), cfg, store, group_cfg);
    for (int i = 0; i < count; ++i) {
      ds.best[at + i] = std::move(results[i].solution);
      const double obj = results[i].trace.back();
      ds.history[at + i].push_back(obj);
      total += obj;
    }
  }
  return ds.size() > 0 ? total / ds.size() : 0.0;
}

struct TrainEpochResult {
  double mean_loss = 0.0;       // mean per-item sum of -log p
  long long skipped_items = 0;  // teacher-forcing failures
  long long rejected_steps = 0;
};

namespace training_detail {

template <typename T, typename DatasetT>
TrainEpochResult ce_epoch(ParameterStore<T>& store, AdamState& adam, const ModelConfig& cfg,
                          const DatasetT& ds, const SilConfig& sc, Rng& rng) {
  using Ref = typename Tape<T>::Ref;
  constexpr bool cvrp = std::is_same_v<DatasetT, CvrpTrainingSet>;
  TrainEpochResult result;
  long long items = 0;

  std::vector<int> idx(ds.size());
  for (int i = 0; i < ds.size(); ++i) idx[i] = i;
  rng.shuffle(idx);

  for (int at = 0; at < ds.size();) {
    const int batch = std::min(sc.batch_size, ds.size() - at);
    store.zero_grads();
    double batch_loss = 0.0;
    bool batch_ok = true;
    for (int mb = 0; mb < batch;) {
      const int chunk = std::min(sc.micro_batch, batch - mb);
      Tape<T> tape(&store, /*grad_enabled=*/true);
      std::vector<DecodeState> states;
      std::vector<std::vector<ForcedAction>> forced;
      for (int c = 0; c < chunk; ++c) {
        const int item = idx[at + mb + c];
        Segment seg;
        if constexpr (cvrp)
          seg = sample_training_segment(ds.instances[item], ds.best[item], sc.l_max, rng);
        else
          seg = sample_training_segment(ds.best[item], sc.l_max, rng);
        const Ref embed = encode<T>(tape, ds.instances[item]);
        const CvrpInstance* cvrp_instance = nullptr;
        if constexpr (cvrp) cvrp_instance = &ds.instances[item];
        states.push_back(segment_state<T>(cfg, embed, seg, cvrp_instance));
        forced.push_back(segment_targets(cfg.kind, seg));
      }
      try {
        auto outcomes = run_rollouts(tape, cfg, states, DecodeMode::Greedy, nullptr,
                                     /*record_nll=*/true, &forced);
        std::vector<Ref> weighted;
        for (const auto& oc : outcomes) {
          double item_loss = 0.0;
          for (const Ref r : oc.nll_nodes)
            item_loss += static_cast<double>(tape.value(r)(0, 0));
          batch_loss += item_loss;
          ++items;
          if (!oc.nll_nodes.empty())
            weighted.push_back(tape.scale(tape.sum_scalars(oc.nll_nodes), 1.0 / batch));
        }
        if (!weighted.empty()) tape.backward(tape.sum_scalars(weighted));
      } catch (const Error&) {
        result.skipped_items += chunk;
        batch_ok = false;
      }
      mb += chunk;
    }
    if (batch_ok && !adam.step(store)) ++result.rejected_steps;
    result.mean_loss += batch_loss;
    at += batch;
  }
  if (items > 0) result.mean_loss /= static_cast<double>(items);
  adam.epoch_decay();  // 0.97 once per epoch
  return result;
}

}  // namespace training_detail

// One cross-entropy epoch over freshly sampled pseudo-label segments.
template <typename T>
TrainEpochResult train_epoch(ParameterStore<T>& store, AdamState& adam, const ModelConfig& cfg,
                             const TspTrainingSet& ds, const SilConfig& sc, Rng& rng) {
  return training_detail::ce_epoch(store, adam, cfg, ds, sc, rng);
}

template <typename T>
TrainEpochResult train_epoch(ParameterStore<T>& store, AdamState& adam, const ModelConfig& cfg,
                             const CvrpTrainingSet& ds, const SilConfig& sc, Rng& rng) {
  return training_detail::ce_epoch(store, adam, cfg, ds, sc, rng);
}

struct SilMetricsRow {
  int episode = 0;
  int epoch = 0;  // 0 = reconstruction epoch, 1..train_epochs = CE epochs
  double mean_loss = 0.0;
  double dataset_mean_obj = 0.0;
  double heldout_mean_obj = 0.0;
  double lr = 0.0;
  double wallclock_s = 0.0;
};

void write_metrics_csv(const std::string& path, const std::vector<SilMetricsRow>& rows);

// The self-improvement loop: per episode one reconstruction epoch then
// train_epochs cross-entropy epochs; checkpoints each episode, tracks the
// best held-out greedy objective, and stops early when relative held-out
// improvement stays below the threshold for two consecutive episodes.
template <typename T>
std::vector<SilMetricsRow> sil_run(TspTrainingSet& ds, ParameterStore<T>& store, AdamState& adam,
                                   const ModelConfig& cfg, const SilConfig& sc,
                                   const std::vector<TspInstance>& heldout,
                                   const std::string& ckpt_dir) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };
  std::vector<SilMetricsRow> rows;
  Rng rng(sc.seed);
  std::vector<const TspInstance*> heldout_ptrs;
  for (const auto& inst : heldout) heldout_ptrs.push_back(&inst);

  const auto heldout_mean = [&]() -> double {
    if (heldout_ptrs.empty()) return 0.0;
    const auto lengths = greedy_tsp_lengths<T>(heldout_ptrs, cfg, store, sc.seed ^ 0x48454c44ULL);
    double s = 0.0;
    for (double v : lengths) s += v;
    return s / static_cast<double>(lengths.size());
  };

  double prev_heldout = heldout_mean();
  double best_heldout = prev_heldout;
  int stale_episodes = 0;
  if (!ckpt_dir.empty())
    save_checkpoint(ckpt_dir + "/best.ckpt", store, adam, CheckpointMeta{cfg, ds.episode});

  for (int ep = 0; ep < sc.episodes; ++ep) {
    PrcConfig prc_cfg;
    prc_cfg.l_max = sc.l_max;
    prc_cfg.iterations = sc.prc_iterations;
    prc_cfg.seed = rng.next_u64();
    const double ds_mean = reconstruction_epoch(ds, cfg, store, prc_cfg);
    rows.push_back({ds.episode + 1, 0, 0.0, ds_mean, prev_heldout, adam.learning_rate, elapsed()});

    for (int e = 1; e <= sc.train_epochs; ++e) {
      const auto r = train_epoch(store, adam, cfg, ds, sc, rng);
      rows.push_back({ds.episode + 1, e, r.mean_loss, ds_mean, prev_heldout,
                      adam.learning_rate, elapsed()});
    }
    ++ds.episode;

    const double cur = heldout_mean();
    rows.back().heldout_mean_obj = cur;
    if (!ckpt_dir.empty()) {
      save_checkpoint(ckpt_dir + "/episode_" + std::to_string(ds.episode) + ".ckpt", store,
                      adam, CheckpointMeta{cfg, ds.episode});
      if (cur < best_heldout) {
        best_heldout = cur;
        save_checkpoint(ckpt_dir + "/best.ckpt", store, adam, CheckpointMeta{cfg, ds.episode});
      }
    }
    const double rel =
        prev_heldout > 0.0 ? (prev_heldout - cur) / prev_heldout : 0.0;
    stale_episodes = rel < sc.improvement_threshold ? stale_episodes + 1 : 0;
    prev_heldout = cur;
    if (stale_episodes >= 2) break;
  }
  return rows;
}

// ------------------------------------------------- resumable warm-up runs --

struct WarmupMetricsRow {
  int epoch = 0;
  double mean_length = 0.0;
  double lr = 0.0;
  double seconds = 0.0;      // wallclock of this epoch
  double cum_seconds = 0.0;  // training time summed across resumes
};

std::vector<WarmupMetricsRow> read_warmup_metrics(const std::string& path);
void append_warmup_metrics(const std::string& path, const WarmupMetricsRow& row);

struct WarmupRunStatus {
  int epochs_done = 0;
  double cum_seconds = 0.0;
  std::vector<double> epoch_means;
};

// Drives warm-up epoch by epoch, checkpointing after each one. With `resume`
// an interrupted run continues from the stored epoch counter; per-epoch RNG
// streams derive from (seed, epoch), so a resumed run reproduces an
// uninterrupted one bit for bit. Cumulative training time carries across
// resumes through the metrics file.
template <typename T>
WarmupRunStatus warmup_run(const std::string& ckpt_path, const std::string& metrics_path,
                           const ModelConfig& cfg, const WarmupConfig& wc, bool resume) {
  using Clock = std::chrono::steady_clock;
  ParameterStore<T> store;
  AdamState adam;
  WarmupRunStatus status;
  bool loaded = false;
  if (resume) {
    std::ifstream probe(ckpt_path, std::ios::binary);
    if (probe) {
      CheckpointMeta meta;
      load_checkpoint(ckpt_path, store, adam, meta);
      if (!(meta.config == cfg))
        throw InvalidArgument("warmup_run: checkpoint config mismatch on resume");
      status.epochs_done = static_cast<int>(meta.episode);
      for (const auto& row : read_warmup_metrics(metrics_path)) {
        status.cum_seconds = row.cum_seconds;
        status.epoch_means.push_back(row.mean_length);
      }
      loaded = true;
    }
  }
  if (!loaded) {
    store = init_model<T>(cfg, wc.seed);
    save_checkpoint(ckpt_path, store, adam, CheckpointMeta{cfg, 0});
    // a fresh run must not inherit rows from an older metrics file
    std::ofstream(metrics_path, std::ios::trunc) << "epoch,mean_length,lr,seconds,cum_seconds\n";
  }
  for (int epoch = status.epochs_done; epoch < wc.epochs; ++epoch) {
    Rng epoch_rng(wc.seed ^ (static_cast<std::uint64_t>(epoch + 1) * 0x9e3779b97f4a7c15ULL));
    const auto t0 = Clock::now();
    const auto r = warmup_epoch(store, adam, cfg, wc, epoch_rng);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    status.cum_seconds += secs;
    status.epochs_done = epoch + 1;
    status.epoch_means.push_back(r.mean_length);
    save_checkpoint(ckpt_path, store, adam, CheckpointMeta{cfg, epoch + 1});
    append_warmup_metrics(metrics_path,
                          {epoch + 1, r.mean_length, adam.learning_rate, secs,
                           status.cum_seconds});
  }
  return status;
}

}  // namespace sila

#endif
