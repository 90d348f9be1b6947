// Acceptance suite: one process invocation per criterion, each printing a
// single PASS/FAIL line with its measured quantities. Criteria 6, 7 and 10
// consume the shared warm-up checkpoint produced by --prepare-warmup, which
// trains resumably inside the work directory and is safe to re-run.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sila/bench.hpp"
#include "sila/checkpoint.hpp"
#include "sila/heuristics.hpp"
#include "sila/reconstruction.hpp"
#include "sila/training.hpp"
#include "sila/tsplib.hpp"

namespace {

using namespace sila;
using Clock = std::chrono::steady_clock;

std::string g_work = ".";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int verdict(int criterion, bool pass, const std::string& details) {
  std::printf("ACCEPTANCE %d: %s - %s\n", criterion, pass ? "PASS" : "FAIL", details.c_str());
  return pass ? 0 : 1;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

// ------------------------------------------------------- warm-up fixture --
// TSP20, 30 epochs x 2000 instances, fp32, fixed seed. Training resumes from
// the stored epoch counter, so repeated invocations (and an externally
// launched run over the same files) converge on the same artifacts. The
// fixture stops adding epochs once the criterion-6 runtime budget (2 h) is
// spent, so a slow host yields a partially warmed checkpoint plus an honest
// runtime failure in criterion 6 rather than an unbounded test.
constexpr double kWarmupBudgetSeconds = 7200.0;

ModelConfig warmup_model() { return ModelConfig{}; }  // d=128, L=6, heads=8, TSP

WarmupConfig warmup_config() {
  WarmupConfig wc;
  wc.n = 20;
  wc.epochs = 30;
  wc.batch_size = 64;
  wc.instances_per_epoch = 2000;
  wc.micro_batch = 8;
  wc.seed = 20;
  return wc;
}

std::string warmup_ckpt_path() { return g_work + "/warmup_tsp20.ckpt"; }
std::string warmup_metrics_path() { return g_work + "/warmup_tsp20.csv"; }

WarmupRunStatus warmup_status() {
  // epochs=0 + resume never trains; it just loads counters (or initializes).
  WarmupConfig wc = warmup_config();
  wc.epochs = 0;
  return warmup_run<float>(warmup_ckpt_path(), warmup_metrics_path(), warmup_model(), wc,
                           /*resume=*/true);
}

int prepare_warmup() {
  const ModelConfig cfg = warmup_model();
  const WarmupConfig target = warmup_config();
  WarmupRunStatus status = warmup_status();
  while (status.epochs_done < target.epochs && status.cum_seconds < kWarmupBudgetSeconds) {
    WarmupConfig step = target;
    step.epochs = status.epochs_done + 1;
    status = warmup_run<float>(warmup_ckpt_path(), warmup_metrics_path(), cfg, step,
                               /*resume=*/true);
    std::printf("warmup fixture: epoch %d/%d done, %.0f s cumulative\n", status.epochs_done,
                target.epochs, status.cum_seconds);
    std::fflush(stdout);
  }
  std::printf("warmup fixture ready: %d epochs, %.0f s training time\n", status.epochs_done,
              status.cum_seconds);
  return 0;
}

ParameterStore<float> load_warmup_store() {
  ParameterStore<float> store;
  AdamState adam;
  CheckpointMeta meta;
  load_checkpoint(warmup_ckpt_path(), store, adam, meta);
  return store;
}

// ------------------------------------------------------------- criterion 1 --
// Random-insertion TSP1K mean over 128 instances = 26.11 +- 2%, < 2 min.
int criterion1() {
  const auto t0 = Clock::now();
  std::vector<double> lengths;
  for (std::uint64_t i = 0; i < 128; ++i) {
    const TspInstance inst = generate_tsp(1000, i);
    lengths.push_back(tour_length(inst, random_insertion_tsp(inst, i ^ 0xabcdULL)));
  }
  const double m = mean(lengths);
  const double secs = seconds_since(t0);
  const bool pass = std::abs(m - 26.11) <= 0.02 * 26.11 && secs < 120.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "random-insertion TSP1K mean %.4f (target 26.11 +- 2%%), %.1f s (< 120 s)", m,
                secs);
  return verdict(1, pass, buf);
}

// ------------------------------------------------------------- criterion 2 --
// Random-insertion TSP10K mean over 16 instances = 81.82 +- 2%, < 15 min.
int criterion2() {
  const auto t0 = Clock::now();
  std::vector<double> lengths;
  for (std::uint64_t i = 0; i < 16; ++i) {
    const TspInstance inst = generate_tsp(10000, i + 1000);
    lengths.push_back(tour_length(inst, random_insertion_tsp(inst, i ^ 0x10cULL)));
  }
  const double m = mean(lengths);
  const double secs = seconds_since(t0);
  const bool pass = std::abs(m - 81.82) <= 0.02 * 81.82 && secs < 900.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "random-insertion TSP10K mean %.4f (target 81.82 +- 2%%), %.1f s (< 900 s)", m,
                secs);
  return verdict(2, pass, buf);
}

// ------------------------------------------------------------- criterion 3 --
// grad_check < 1e-4 at 64-bit through the composed decode-step loss, touching
// the encoder, attention-layer, module and head parameters, TSP and CVRP.
int criterion3() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name = "-";

  const auto check_model = [&](ProblemKind kind, const std::vector<std::string>& names) {
    ModelConfig cfg;
    cfg.kind = kind;
    auto store = init_model<double>(cfg, 123);
    const TspInstance tsp = generate_tsp(10, 7);
    const CvrpInstance cvrp = generate_cvrp(9, 12, 7);

    const auto make_loss = [&](Tape<double>& tape) {
      DecodeState st;
      st.kind = kind;
      if (kind == ProblemKind::Cvrp) {
        st.cvrp = &cvrp;
        st.embeddings = encode<double>(tape, cvrp);
        st.start = st.dest = 0;
        st.remaining_capacity = 0.6;
        for (int i = 1; i < cvrp.n(); ++i) st.available.push_back(i);
      } else {
        st.embeddings = encode<double>(tape, tsp);
        st.start = st.dest = 0;
        for (int i = 1; i < tsp.n(); ++i) st.available.push_back(i);
      }
      const std::vector<const DecodeState*> states{&st};
      const auto step = decode_step(tape, cfg, states);
      SoftmaxSpec sp = step.specs[0];
      sp.target = 0 * sp.rows + step.base[0] + 2;  // a fixed selectable decision
      return tape.softmax_nll(step.logits, {sp});
    };

    Tape<double> tape(&store, /*grad_enabled=*/true);
    store.zero_grads();
    tape.backward(make_loss(tape));

    const auto loss_value = [&]() {
      Tape<double> t(&store, /*grad_enabled=*/false);
      return static_cast<double>(t.value(make_loss(t))(0, 0));
    };
    for (const std::string& name : names) {
      // eps 1e-4: small gradients under a O(1) loss make 1e-5 central
      // differences roundoff-bound (error falls ~10x per decade of eps)
      const double err = grad_check(store, store.find(name), loss_value, 1e-4, 40);
      if (err > worst) {
        worst = err;
        worst_name = (kind == ProblemKind::Cvrp ? "cvrp " : "tsp ") + name;
      }
    }
  };

  check_model(ProblemKind::Tsp,
              {"enc.W0", "enc.b0", "rep.W1", "rep.W2", "mod0.agg.Wq", "mod0.agg.Wk",
               "mod0.agg.Wv", "mod0.agg.Wo", "mod0.agg.ff.W1", "mod0.agg.ff.b1",
               "mod0.agg.ff.W2", "mod0.agg.ff.b2", "mod2.bro.Wq", "mod5.bro.ff.W2",
               "head.WO"});
  check_model(ProblemKind::Cvrp, {"enc.W0", "rep.W1", "rep.b1", "mod0.bro.Wv", "head.WO"});

  const double secs = seconds_since(t0);
  const bool pass = worst < 1e-4 && secs < 300.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "max grad_check relative error %.3e at %s (< 1e-4), %.1f s",
                worst, worst_name.c_str(), secs);
  return verdict(3, pass, buf);
}

// ------------------------------------------------------------- criterion 4 --
// 1000 fuzzed PRC runs (TSP and CVRP, n in [10, 500], random and briefly
// warm-started parameters): monotone traces + validator-clean solutions.
int criterion4() {
  const auto t0 = Clock::now();
  ModelConfig tsp_cfg;
  ModelConfig cvrp_cfg;
  cvrp_cfg.kind = ProblemKind::Cvrp;

  auto tsp_rand = init_model<float>(tsp_cfg, 1);
  auto cvrp_rand = init_model<float>(cvrp_cfg, 2);
  auto tsp_warm = init_model<float>(tsp_cfg, 3);
  auto cvrp_warm = init_model<float>(cvrp_cfg, 4);
  {
    AdamState adam;
    WarmupConfig wc;
    wc.n = 10;
    wc.batch_size = 16;
    wc.instances_per_epoch = 32;
    wc.micro_batch = 8;
    Rng r1(5), r2(6);
    (void)warmup_epoch(tsp_warm, adam, tsp_cfg, wc, r1);
    AdamState adam2;
    (void)warmup_epoch(cvrp_warm, adam2, cvrp_cfg, wc, r2);
  }

  Rng fuzz(0xf022);
  long long runs = 0, monotone_ok = 0, valid_ok = 0;
  const int group = 25;
  for (int g = 0; g < 40; ++g) {  // 40 groups x 25 instances = 1000 runs
    const bool cvrp = g % 2 == 1;
    const bool warm = (g / 2) % 2 == 1;
    PrcConfig pc;
    pc.iterations = 2;
    pc.l_max = 4 + static_cast<int>(fuzz.uniform_int(0, 26));
    pc.seed = fuzz.next_u64();

    if (!cvrp) {
      std::vector<TspInstance> insts;
      std::vector<TspTour> starts;
      for (int i = 0; i < group; ++i) {
        const double u = fuzz.uniform();
        const int n = 10 + static_cast<int>(u * u * 490);
        insts.push_back(generate_tsp(n, fuzz.next_u64()));
        starts.push_back(random_insertion_tsp(insts.back(), fuzz.next_u64()));
      }
      std::vector<const TspInstance*> ptrs;
      for (const auto& inst : insts) ptrs.push_back(&inst);
      const auto results =
          prc_tsp<float>(ptrs, std::move(starts), tsp_cfg, warm ? tsp_warm : tsp_rand, pc);
      for (int i = 0; i < group; ++i) {
        ++runs;
        bool mono = true;
        for (std::size_t k = 1; k < results[i].trace.size(); ++k)
          mono = mono && results[i].trace[k] <= results[i].trace[k - 1] + 1e-9;
        monotone_ok += mono;
        valid_ok += validate_tsp(results[i].solution, insts[i].n()).ok();
      }
    } else {
      std::vector<CvrpInstance> insts;
      std::vector<CvrpSolution> starts;
      for (int i = 0; i < group; ++i) {
        const double u = fuzz.uniform();
        const int n = 10 + static_cast<int>(u * u * 490);
        const int capacity = 10 + static_cast<int>(fuzz.uniform_int(0, 40));
        insts.push_back(generate_cvrp(n, capacity, fuzz.next_u64()));
        starts.push_back(random_insertion_cvrp(insts.back(), fuzz.next_u64()));
      }
      std::vector<const CvrpInstance*> ptrs;
      for (const auto& inst : insts) ptrs.push_back(&inst);
      const auto results =
          prc_cvrp<float>(ptrs, std::move(starts), cvrp_cfg, warm ? cvrp_warm : cvrp_rand, pc);
      for (int i = 0; i < group; ++i) {
        ++runs;
        bool mono = true;
        for (std::size_t k = 1; k < results[i].trace.size(); ++k)
          mono = mono && results[i].trace[k] <= results[i].trace[k - 1] + 1e-9;
        monotone_ok += mono;
        valid_ok += validate_cvrp(insts[i], results[i].solution).ok();
      }
    }
  }

  const double secs = seconds_since(t0);
  const bool pass = runs == 1000 && monotone_ok == 1000 && valid_ok == 1000 && secs < 1200.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%lld PRC runs: %lld monotone, %lld validator-clean (need 1000/1000), %.1f s "
                "(< 1200 s)",
                runs, monotone_ok, valid_ok, secs);
  return verdict(4, pass, buf);
}

// ------------------------------------------------------------- criterion 5 --
// Linear decoder peak-memory ratios in [1.7, 2.6] on (2000 vs 1000) and
// (4000 vs 2000); quadratic reference >= 3.4 on the same pairs.
int criterion5() {
  const auto t0 = Clock::now();
  ModelConfig cfg;
  auto store = init_model<float>(cfg, 55);
  const std::vector<int> sizes{1000, 2000, 4000};
  const auto lin = bench_memory(sizes, DecoderVariant::Linear, cfg, store, 1);
  const auto quad = bench_memory(sizes, DecoderVariant::Quadratic, cfg, store, 1);

  const auto ratio = [](const MemoryReport& r, int hi, int lo) {
    if (r.entries[hi].out_of_budget || r.entries[lo].out_of_budget) return -1.0;
    return static_cast<double>(r.entries[hi].peak_bytes) /
           static_cast<double>(r.entries[lo].peak_bytes);
  };
  const double l1 = ratio(lin, 1, 0), l2 = ratio(lin, 2, 1);
  const double q1 = ratio(quad, 1, 0), q2 = ratio(quad, 2, 1);
  const double secs = seconds_since(t0);
  const bool pass = l1 >= 1.7 && l1 <= 2.6 && l2 >= 1.7 && l2 <= 2.6 && q1 >= 3.4 &&
                    q2 >= 3.4 && secs < 600.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "linear ratios %.2f, %.2f (need [1.7, 2.6]); quadratic %.2f, %.2f (need >= "
                "3.4), %.1f s",
                l1, l2, q1, q2, secs);
  return verdict(5, pass, buf);
}

// ------------------------------------------------------------- criterion 6 --
// Warm-up efficacy: greedy tours on 100 held-out TSP20 shorter on average
// than random insertion, with the full 30 x 2000 schedule inside 2 h.
int criterion6() {
  const WarmupRunStatus status = warmup_status();
  auto store = load_warmup_store();
  const ModelConfig cfg = warmup_model();

  std::vector<TspInstance> heldout;
  for (std::uint64_t i = 0; i < 100; ++i) heldout.push_back(generate_tsp(20, 0x6e1d + i));
  std::vector<const TspInstance*> ptrs;
  for (const auto& inst : heldout) ptrs.push_back(&inst);
  const auto greedy = greedy_tsp_lengths<float>(ptrs, cfg, store, 0x9eedULL);
  std::vector<double> ri;
  for (std::uint64_t i = 0; i < heldout.size(); ++i)
    ri.push_back(tour_length(heldout[i], random_insertion_tsp(heldout[i], i ^ 0x5eedULL)));

  const double greedy_mean = mean(greedy), ri_mean = mean(ri);
  const bool efficacy = greedy_mean < ri_mean;
  const bool schedule = status.epochs_done == warmup_config().epochs;
  const bool runtime = status.cum_seconds <= kWarmupBudgetSeconds;
  char buf[260];
  std::snprintf(buf, sizeof(buf),
                "greedy mean %.4f vs random-insertion %.4f on 100 held-out TSP20 (%s); warm-up "
                "%d/30 epochs in %.0f s (bound 7200 s)",
                greedy_mean, ri_mean, efficacy ? "shorter" : "NOT shorter", status.epochs_done,
                status.cum_seconds);
  return verdict(6, efficacy && schedule && runtime, buf);
}

// ------------------------------------------------------------- criterion 7 --
// Desk-scale SIL on TSP200: dataset mean non-increasing across episodes;
// held-out PRC100 beats random insertion on average and on >= 90% of
// instances; runtime <= 4 h.
int criterion7() {
  const auto t0 = Clock::now();
  const ModelConfig cfg = warmup_model();
  auto store = load_warmup_store();
  AdamState adam;

  std::vector<TspInstance> instances;
  for (std::uint64_t i = 0; i < 100; ++i) instances.push_back(generate_tsp(200, 0x7e57 + i));
  TspTrainingSet ds = make_training_set(std::move(instances), 0x1abe1);

  SilConfig sc;
  sc.episodes = 2;
  sc.prc_iterations = 100;
  sc.train_epochs = 20;
  sc.batch_size = 64;
  sc.micro_batch = 8;
  sc.l_max = 50;
  sc.seed = 0x517;

  std::vector<TspInstance> heldout;
  for (std::uint64_t i = 0; i < 20; ++i) heldout.push_back(generate_tsp(200, 0xae0 + i));

  const std::string dir = g_work + "/sil_tsp200";
  std::filesystem::create_directories(dir);
  const auto rows = sil_run(ds, store, adam, cfg, sc, heldout, dir);
  write_metrics_csv(dir + "/sil_metrics.csv", rows);

  bool ds_monotone = true;
  double prev = 1e300;
  for (const auto& row : rows)
    if (row.epoch == 0) {
      ds_monotone = ds_monotone && row.dataset_mean_obj <= prev + 1e-9;
      prev = row.dataset_mean_obj;
    }

  // held-out evaluation: random insertion vs 100 PRC iterations, lockstep
  std::vector<const TspInstance*> hptrs;
  std::vector<TspTour> starts;
  std::vector<double> ri;
  for (std::uint64_t i = 0; i < heldout.size(); ++i) {
    hptrs.push_back(&heldout[i]);
    starts.push_back(random_insertion_tsp(heldout[i], i ^ 0x2222ULL));
    ri.push_back(tour_length(heldout[i], starts.back()));
  }
  PrcConfig pc;
  pc.l_max = 50;
  pc.iterations = 100;
  pc.seed = 0x9a9a;
  const auto results = prc_tsp<float>(hptrs, std::move(starts), cfg, store, pc);
  std::vector<double> prc;
  int improved = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    prc.push_back(results[i].trace.back());
    improved += results[i].trace.back() < ri[i] - 1e-12;
  }
  const double secs = seconds_since(t0);
  const double frac = static_cast<double>(improved) / static_cast<double>(ri.size());
  const bool pass = ds_monotone && mean(prc) < mean(ri) && frac >= 0.9 && secs <= 14400.0;
  char buf[260];
  std::snprintf(buf, sizeof(buf),
                "dataset mean %s; held-out PRC100 mean %.4f vs random-insertion %.4f, improved "
                "%d/%zu (need >= 90%%), %.0f s (<= 14400 s)",
                ds_monotone ? "non-increasing" : "INCREASED", mean(prc), mean(ri), improved,
                ri.size(), secs);
  return verdict(7, pass, buf);
}

// ------------------------------------------------------------- criterion 8 --
// 20 cross-entropy epochs on a frozen pseudo-label set: epoch 20 < epoch 1.
int criterion8() {
  const auto t0 = Clock::now();
  ModelConfig cfg;
  auto store = init_model<float>(cfg, 88);
  AdamState adam;
  std::vector<TspInstance> instances;
  for (std::uint64_t i = 0; i < 32; ++i) instances.push_back(generate_tsp(50, 0x88 + i));
  TspTrainingSet ds = make_training_set(std::move(instances), 0x88);

  SilConfig sc;
  sc.batch_size = 8;  // several optimizer steps per epoch
  sc.micro_batch = 8;
  sc.l_max = 25;
  adam.learning_rate = 1e-3;
  double first = 0.0, last = 0.0;
  for (int e = 1; e <= 20; ++e) {
    // identical segment draw every epoch: the epoch-over-epoch comparison then
    // measures the fit to the frozen pseudo-labels, not sampling noise
    Rng rng(0x8888);
    const auto r = train_epoch(store, adam, cfg, ds, sc, rng);
    if (e == 1) first = r.mean_loss;
    last = r.mean_loss;
  }
  const double secs = seconds_since(t0);
  const bool pass = last < first && secs < 1800.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "epoch-mean loss %.4f (epoch 1) -> %.4f (epoch 20), %.1f s (< 1800 s)", first,
                last, secs);
  return verdict(8, pass, buf);
}

// ------------------------------------------------------------- criterion 9 --
// CVRP100 (D=50) end-to-end feasibility across 500 fuzz runs: generation,
// insertion, PRC and pseudo-label segment training all validator-clean.
int criterion9() {
  const auto t0 = Clock::now();
  ModelConfig cfg;
  cfg.kind = ProblemKind::Cvrp;
  auto store = init_model<float>(cfg, 99);

  Rng fuzz(0x99);
  long long runs = 0, clean = 0;
  const int group = 25;
  for (int g = 0; g < 20; ++g) {  // 20 groups x 25 = 500 runs
    std::vector<CvrpInstance> insts;
    std::vector<CvrpSolution> starts;
    std::vector<bool> ok(group, true);
    for (int i = 0; i < group; ++i) {
      insts.push_back(generate_cvrp(100, 50, fuzz.next_u64()));
      starts.push_back(random_insertion_cvrp(insts.back(), fuzz.next_u64()));
      ok[i] = ok[i] && validate_cvrp(insts[i], starts[i]).ok();
    }
    std::vector<const CvrpInstance*> ptrs;
    for (const auto& inst : insts) ptrs.push_back(&inst);
    PrcConfig pc;
    pc.iterations = 2;
    pc.l_max = 30;
    pc.seed = fuzz.next_u64();
    const auto results = prc_cvrp<float>(ptrs, std::move(starts), cfg, store, pc);

    Tape<float> tape(&store, /*grad_enabled=*/true);
    std::vector<DecodeState> states;
    std::vector<std::vector<ForcedAction>> forced;
    Rng seg_rng(fuzz.next_u64());
    for (int i = 0; i < group; ++i) {
      ok[i] = ok[i] && validate_cvrp(insts[i], results[i].solution).ok();
      bool mono = true;
      for (std::size_t k = 1; k < results[i].trace.size(); ++k)
        mono = mono && results[i].trace[k] <= results[i].trace[k - 1] + 1e-9;
      ok[i] = ok[i] && mono;
      const Segment seg =
          sample_training_segment(insts[i], results[i].solution, 30, seg_rng);
      const auto embed = encode<float>(tape, insts[i]);
      states.push_back(segment_state<float>(cfg, embed, seg, &insts[i]));
      forced.push_back(segment_targets(cfg.kind, seg));
    }
    // teacher-forced training pass over the sampled pseudo-label segments
    const auto outcomes = run_rollouts(tape, cfg, states, DecodeMode::Greedy, nullptr,
                                       /*record_nll=*/true, &forced);
    for (int i = 0; i < group; ++i) {
      ++runs;
      clean += ok[i] && !outcomes[i].order.empty();
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = runs == 500 && clean == 500 && secs < 1200.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%lld CVRP100 end-to-end runs, %lld validator-clean (need 500/500), %.1f s (< "
                "1200 s)",
                runs, clean, secs);
  return verdict(9, pass, buf);
}

// ------------------------------------------------------------ criterion 10 --
// After warm-up, the 5 nearest available nodes outweigh the 5 farthest on
// >= 95% of sampled decode steps.
int criterion10() {
  const auto t0 = Clock::now();
  auto store = load_warmup_store();
  const ModelConfig cfg = warmup_model();
  std::vector<TspInstance> instances;
  for (std::uint64_t i = 0; i < 100; ++i) instances.push_back(generate_tsp(20, 0xd1a6 + i));
  const auto profile = prob_distance_profile(cfg, store, instances, 10, 0xd1a6);

  long long near_wins = 0;
  for (const auto& s : profile.steps) near_wins += s.near5 > s.far5;
  const double frac = profile.steps.empty()
                          ? 0.0
                          : static_cast<double>(near_wins) /
                                static_cast<double>(profile.steps.size());
  const double secs = seconds_since(t0);
  const bool pass = !profile.steps.empty() && frac >= 0.95 && secs < 300.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "5-nearest outweigh 5-farthest on %lld/%zu decode steps (%.1f%%, need >= 95%%), "
                "%.1f s",
                near_wins, profile.steps.size(), 100.0 * frac, secs);
  return verdict(10, pass, buf);
}

// ------------------------------------------------------------ criterion 11 --
// Parser: pcb3038 (n=3038) plus a synthetic EUC_2D file whose integer tour
// length is known by hand.
int criterion11() {
  const auto t0 = Clock::now();

  // synthetic check: 4 corners of a 30 x 40 rectangle; optimal cycle = 140
  const std::string synth = g_work + "/synthetic_rect.tsp";
  {
    std::ofstream out(synth);
    out << "NAME : synthetic_rect\nTYPE : TSP\nDIMENSION : 4\n"
        << "EDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n"
        << "1 0 0\n2 30 0\n3 30 40\n4 0 40\nEOF\n";
  }
  bool synth_ok = false;
  std::string synth_msg;
  try {
    const auto lib = parse_library_instance(synth);
    TspTour tour;
    tour.order = {0, 1, 2, 3};
    const double len = tour_length(lib.tsp, tour, &lib.scaling);
    synth_ok = lib.tsp.n() == 4 && len == 140.0;
    synth_msg = "synthetic rectangle length " + std::to_string(len) + " (expect 140)";
  } catch (const std::exception& e) {
    synth_msg = std::string("synthetic parse failed: ") + e.what();
  }

  // pcb3038: looked up in the work dir or $SILA_TSPLIB_DIR; the file itself
  // is TSPLIB-licensed data that is not bundled with this repository.
  bool pcb_ok = false;
  std::string pcb_msg;
  std::vector<std::string> candidates{g_work + "/pcb3038.tsp", "data/pcb3038.tsp"};
  if (const char* dir = std::getenv("SILA_TSPLIB_DIR"))
    candidates.insert(candidates.begin(), std::string(dir) + "/pcb3038.tsp");
  std::string found;
  for (const auto& c : candidates)
    if (std::ifstream(c).good()) {
      found = c;
      break;
    }
  if (found.empty()) {
    pcb_msg = "pcb3038.tsp not found (searched $SILA_TSPLIB_DIR, work dir, data/); supply the "
              "TSPLIB file to run this half";
  } else {
    try {
      const auto lib = parse_library_instance(found);
      const TspTour tour = random_insertion_tsp(lib.tsp, 1);
      const double len = tour_length(lib.tsp, tour, &lib.scaling);
      pcb_ok = lib.tsp.n() == 3038 && std::abs(len - std::round(len)) < 1e-9;
      pcb_msg = "pcb3038 n=" + std::to_string(lib.tsp.n()) +
                ", integer random-insertion length " + std::to_string(len);
    } catch (const std::exception& e) {
      pcb_msg = std::string("pcb3038 parse failed: ") + e.what();
    }
  }

  const double secs = seconds_since(t0);
  const bool pass = synth_ok && pcb_ok && secs < 60.0;
  char buf[360];
  std::snprintf(buf, sizeof(buf), "%s; %s; %.1f s", synth_msg.c_str(), pcb_msg.c_str(), secs);
  return verdict(11, pass, buf);
}

}  // namespace

int main(int argc, char** argv) {
  bool prepare = false;
  int criterion = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--prepare-warmup") {
      prepare = true;
    } else if (arg == "--criterion" && i + 1 < argc) {
      criterion = std::atoi(argv[++i]);
    } else if (arg == "--work-dir" && i + 1 < argc) {
      g_work = argv[++i];
    } else {
      std::fprintf(stderr, "usage: acceptance [--prepare-warmup | --criterion N] [--work-dir D]\n");
      return 2;
    }
  }
  std::filesystem::create_directories(g_work);
  try {
    if (prepare) return prepare_warmup();
    switch (criterion) {
      case 1: return criterion1();
      case 2: return criterion2();
      case 3: return criterion3();
      case 4: return criterion4();
      case 5: return criterion5();
      case 6: return criterion6();
      case 7: return criterion7();
      case 8: return criterion8();
      case 9: return criterion9();
      case 10: return criterion10();
      case 11: return criterion11();
      default:
        std::fprintf(stderr, "unknown criterion %d\n", criterion);
        return 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (criterion > 0) return verdict(criterion, false, std::string("exception: ") + e.what());
    return 1;
  }
}
