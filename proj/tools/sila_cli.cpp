// sila — command-line driver for dataset generation, warm-up training, the
// self-improvement loop, PRC solving, evaluation, and benchmarks.
#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "sila/bench.hpp"
#include "sila/checkpoint.hpp"
#include "sila/dataset.hpp"
#include "sila/heuristics.hpp"
#include "sila/training.hpp"
#include "sila/tsplib.hpp"

namespace {

using namespace sila;

std::string out_path(const std::string& path) {
  if (path.empty() || path.front() == '/' || path.rfind("./", 0) == 0) return path;
  const char* dir = std::getenv("SILA_OUT_DIR");
  if (!dir || !*dir) return path;
  return std::string(dir) + "/" + path;
}

// Dispatches on the checkpoint's stored scalar width.
template <typename F>
void with_checkpoint(const std::string& path, F&& f) {
  if (checkpoint_scalar_bytes(path) == 4) {
    ParameterStore<float> store;
    AdamState adam;
    CheckpointMeta meta;
    load_checkpoint(path, store, adam, meta);
    f(store, adam, meta);
  } else {
    ParameterStore<double> store;
    AdamState adam;
    CheckpointMeta meta;
    load_checkpoint(path, store, adam, meta);
    f(store, adam, meta);
  }
}

// Ordered parallel map over [0, count) with a fixed-size worker pool.
template <typename F>
void parallel_for(int count, int jobs, F&& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : workers) t.join();
}

struct GenArgs {
  bool tsp = false, cvrp = false, force = false;
  int n = 100, capacity = 50, count = 128;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  if (a.tsp == a.cvrp) throw InvalidArgument("gen: pass exactly one of --tsp / --cvrp");
  const std::string path = out_path(a.out);
  if (!a.force && std::ifstream(path).good())
    throw InvalidArgument("gen: " + path + " exists (use --force to overwrite)");
  Dataset ds;
  Rng rng(a.seed);
  if (a.tsp) {
    ds.kind = ProblemKind::Tsp;
    for (int i = 0; i < a.count; ++i) ds.tsp.push_back(generate_tsp(a.n, rng.next_u64()));
  } else {
    ds.kind = ProblemKind::Cvrp;
    for (int i = 0; i < a.count; ++i)
      ds.cvrp.push_back(generate_cvrp(a.n, a.capacity, rng.next_u64()));
  }
  save_dataset(ds, path);
  std::cout << "gen: wrote " << a.count << " " << (a.tsp ? "TSP" : "CVRP") << a.n
            << " instances (seed " << a.seed << ") to " << path << "\n";
  return 0;
}

struct WarmupArgs {
  bool tsp = true, cvrp = false, resume = false, fp64 = false;
  WarmupConfig wc;
  std::string ckpt = "warmup.ckpt";
  std::string metrics = "warmup_metrics.csv";
};

int cmd_warmup(const WarmupArgs& a) {
  ModelConfig cfg;
  cfg.kind = a.cvrp ? ProblemKind::Cvrp : ProblemKind::Tsp;
  cfg.validate();
  if (a.wc.n < 4) throw InvalidArgument("warmup: n must be >= 4");
  const std::string ckpt = out_path(a.ckpt), metrics = out_path(a.metrics);
  const WarmupRunStatus status =
      a.fp64 ? warmup_run<double>(ckpt, metrics, cfg, a.wc, a.resume)
             : warmup_run<float>(ckpt, metrics, cfg, a.wc, a.resume);
  std::cout << "warmup: " << status.epochs_done << " epochs done, "
            << status.cum_seconds << " s training time, checkpoint " << ckpt << "\n";
  if (!status.epoch_means.empty())
    std::cout << "warmup: mean sampled length " << status.epoch_means.front() << " -> "
              << status.epoch_means.back() << "\n";
  return 0;
}

struct SilArgs {
  std::string dataset, ckpt, out_dir = ".";
  SilConfig sc;
  int heldout = 64;
  std::uint64_t heldout_seed = 0xb007;
};

int cmd_sil(const SilArgs& a) {
  const Dataset ds = load_dataset(a.dataset);
  if (ds.kind != ProblemKind::Tsp)
    throw InvalidArgument("sil: only TSP datasets are supported by this command");
  const std::string dir = out_path(a.out_dir);
  std::filesystem::create_directories(dir);
  with_checkpoint(a.ckpt, [&](auto& store, AdamState& adam, const CheckpointMeta& meta) {
    if (meta.config.kind != ds.kind)
      throw InvalidArgument("sil: checkpoint problem kind does not match the dataset");
    const int scale = ds.tsp.front().n();
    std::vector<TspInstance> heldout;
    Rng hrng(a.heldout_seed);
    for (int i = 0; i < a.heldout; ++i) heldout.push_back(generate_tsp(scale, hrng.next_u64()));
    TspTrainingSet training = make_training_set(ds.tsp, a.sc.seed ^ 0x52494e49ULL);
    const auto rows =
        sil_run(training, store, adam, meta.config, a.sc, heldout, dir);
    write_metrics_csv(dir + "/sil_metrics.csv", rows);
    std::cout << "sil: " << training.episode << " episodes, metrics in " << dir
              << "/sil_metrics.csv, best checkpoint " << dir << "/best.ckpt\n";
  });
  return 0;
}

struct SolveArgs {
  std::string dataset, library_file, ckpt, out = "results.csv", trace;
  int iters = 100;
  int jobs = 1;
  std::uint64_t seed = 0;
};

int cmd_solve(const SolveArgs& a) {
  if (a.dataset.empty() == a.library_file.empty())
    throw InvalidArgument("solve: pass exactly one of --dataset / a TSPLIB file");
  const std::string out = out_path(a.out);

  with_checkpoint(a.ckpt, [&](auto& store, AdamState&, const CheckpointMeta& meta) {
    std::ofstream csv(out);
    if (!csv) throw IoError("cannot write " + out);
    csv << "instance,init_obj,final_obj,iters,seconds\n";
    csv.precision(17);
    std::ofstream trace_csv;
    if (!a.trace.empty()) {
      trace_csv.open(out_path(a.trace));
      if (!trace_csv) throw IoError("cannot write " + a.trace);
      trace_csv << "instance,iteration,objective\n";
      trace_csv.precision(17);
    }

    PrcConfig pc;
    pc.l_max = 1000;
    pc.iterations = a.iters;

    if (!a.library_file.empty()) {
      const auto lib = parse_library_instance(a.library_file);
      if (lib.kind != meta.config.kind)
        throw InvalidArgument("solve: checkpoint problem kind does not match the instance");
      const auto t0 = std::chrono::steady_clock::now();
      if (lib.kind == ProblemKind::Tsp) {
        const TspTour init = random_insertion_tsp(lib.tsp, a.seed);
        pc.seed = a.seed;
        auto res = prc_tsp(lib.tsp, init, meta.config, store, pc);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        csv << lib.name << ',' << tour_length(lib.tsp, init, &lib.scaling) << ','
            << tour_length(lib.tsp, res.solution, &lib.scaling) << ',' << a.iters << ','
            << secs << '\n';
        for (std::size_t i = 0; i < res.trace.size(); ++i)
          if (trace_csv) trace_csv << lib.name << ',' << i << ',' << res.trace[i] << '\n';
      } else {
        const CvrpSolution init = random_insertion_cvrp(lib.cvrp, a.seed);
        pc.seed = a.seed;
        auto res = prc_cvrp(lib.cvrp, init, meta.config, store, pc);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        csv << lib.name << ',' << cvrp_cost(lib.cvrp, init, &lib.scaling) << ','
            << cvrp_cost(lib.cvrp, res.solution, &lib.scaling) << ',' << a.iters << ','
            << secs << '\n';
      }
      std::cout << "solve: results in " << out << "\n";
      return;
    }

    const Dataset ds = load_dataset(a.dataset);
    if (ds.kind != meta.config.kind)
      throw InvalidArgument("solve: checkpoint problem kind does not match the dataset");
    const int count = ds.size();
    struct Row {
      double init = 0.0, final_obj = 0.0, secs = 0.0;
      std::vector<double> trace;
    };
    std::vector<Row> rows(count);
    parallel_for(count, a.jobs, [&](int i) {
      const auto t0 = std::chrono::steady_clock::now();
      PrcConfig pci = pc;
      pci.seed = a.seed ^ (static_cast<std::uint64_t>(i) * 0x9e3779b97f4a7c15ULL);
      if (ds.kind == ProblemKind::Tsp) {
        const TspTour init = random_insertion_tsp(ds.tsp[i], pci.seed);
        auto res = prc_tsp(ds.tsp[i], init, meta.config, store, pci);
        rows[i].init = tour_length(ds.tsp[i], init);
        rows[i].final_obj = tour_length(ds.tsp[i], res.solution);
        rows[i].trace = std::move(res.trace);
      } else {
        const CvrpSolution init = random_insertion_cvrp(ds.cvrp[i], pci.seed);
        auto res = prc_cvrp(ds.cvrp[i], init, meta.config, store, pci);
        rows[i].init = cvrp_cost(ds.cvrp[i], init);
        rows[i].final_obj = cvrp_cost(ds.cvrp[i], res.solution);
        rows[i].trace = std::move(res.trace);
      }
      rows[i].secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    for (int i = 0; i < count; ++i) {
      csv << i << ',' << rows[i].init << ',' << rows[i].final_obj << ',' << a.iters << ','
          << rows[i].secs << '\n';
      if (trace_csv)
        for (std::size_t k = 0; k < rows[i].trace.size(); ++k)
          trace_csv << i << ',' << k << ',' << rows[i].trace[k] << '\n';
    }
    std::cout << "solve: " << count << " instances, results in " << out << "\n";
  });
  return 0;
}

struct EvalArgs {
  std::string results, refs, out = "gaps.csv";
};

int cmd_eval(const EvalArgs& a) {
  std::ifstream res(a.results);
  if (!res) throw IoError("cannot open " + a.results);
  std::ifstream ref(a.refs);
  if (!ref) throw IoError("cannot open " + a.refs);
  std::vector<double> objs, refs;
  std::string line;
  std::getline(res, line);  // header
  while (std::getline(res, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // instance
    std::getline(ss, cell, ',');  // init_obj
    std::getline(ss, cell, ',');  // final_obj
    objs.push_back(std::stod(cell));
  }
  double v;
  while (ref >> v) refs.push_back(v);
  if (objs.size() != refs.size())
    throw InvalidArgument("eval: result/reference instance count mismatch (" +
                          std::to_string(objs.size()) + " vs " + std::to_string(refs.size()) +
                          ")");
  const std::string out = out_path(a.out);
  std::ofstream csv(out);
  if (!csv) throw IoError("cannot write " + out);
  csv << "instance,objective,reference,gap\n";
  csv.precision(17);
  double mean_gap = 0.0;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const double gap = (objs[i] - refs[i]) / refs[i];
    mean_gap += gap;
    csv << i << ',' << objs[i] << ',' << refs[i] << ',' << gap << '\n';
    std::printf("%6zu  obj %12.4f  ref %12.4f  gap %+.2f%%\n", i, objs[i], refs[i], 100 * gap);
  }
  mean_gap /= static_cast<double>(objs.size());
  std::printf("mean gap over %zu instances: %+.2f%%\n", objs.size(), 100 * mean_gap);
  std::cout << "eval: per-instance gaps in " << out << "\n";
  return 0;
}

struct BenchArgs {
  std::vector<int> sizes{1000, 2000, 4000};
  std::string variant = "linear";
  std::string ckpt;
  std::string out = "memory.csv";
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& a) {
  DecoderVariant variant;
  if (a.variant == "linear")
    variant = DecoderVariant::Linear;
  else if (a.variant == "quadratic")
    variant = DecoderVariant::Quadratic;
  else
    throw InvalidArgument("bench: --variant must be linear or quadratic");
  MemoryReport report;
  if (!a.ckpt.empty()) {
    with_checkpoint(a.ckpt, [&](auto& store, AdamState&, const CheckpointMeta& meta) {
      report = bench_memory(a.sizes, variant, meta.config, store, a.seed);
    });
  } else {
    ModelConfig cfg;  // defaults: d=128, L=6, heads=8
    auto store = init_model<float>(cfg, a.seed);
    report = bench_memory(a.sizes, variant, cfg, store, a.seed);
  }
  const std::string out = out_path(a.out);
  write_memory_csv(out, report);
  for (const auto& e : report.entries)
    std::cout << "bench: m=" << e.size << " " << report.variant << " peak "
              << (e.out_of_budget ? std::string("(out of budget)")
                                  : std::to_string(e.peak_bytes) + " B")
              << "\n";
  std::cout << "bench: report in " << out << "\n";
  return 0;
}

struct DiagArgs {
  std::string ckpt;
  std::string out = "prob_profile.csv";
  int buckets = 10, instances = 16, n = 100;
  std::uint64_t seed = 0;
};

int cmd_diag(const DiagArgs& a) {
  if (a.ckpt.empty()) throw InvalidArgument("diag: --ckpt is required");
  std::vector<TspInstance> instances;
  Rng rng(a.seed);
  for (int i = 0; i < a.instances; ++i) instances.push_back(generate_tsp(a.n, rng.next_u64()));
  with_checkpoint(a.ckpt, [&](auto& store, AdamState&, const CheckpointMeta& meta) {
    if (meta.config.kind != ProblemKind::Tsp)
      throw InvalidArgument("diag: requires a TSP checkpoint");
    const auto profile = prob_distance_profile(meta.config, store, instances, a.buckets, a.seed);
    const std::string out = out_path(a.out);
    write_profile_csv(out, profile);
    std::cout << "diag: " << profile.steps.size() << " sampled steps, profile in " << out
              << "\n";
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-improved learning for neural combinatorial optimization"};
  app.set_config("--config", "", "Read options from a key=value config file");
  bool emit_config = false;
  app.add_flag("--emit-config", emit_config, "Print the fully resolved configuration");
  app.require_subcommand(1);

  GenArgs gen;
  auto* sc_gen = app.add_subcommand("gen", "Generate a dataset");
  sc_gen->add_flag("--tsp", gen.tsp, "Generate TSP instances");
  sc_gen->add_flag("--cvrp", gen.cvrp, "Generate CVRP instances");
  sc_gen->add_option("-n,--nodes", gen.n, "Instance size");
  sc_gen->add_option("--capacity", gen.capacity, "CVRP vehicle capacity");
  sc_gen->add_option("--count", gen.count, "Number of instances");
  sc_gen->add_option("--seed", gen.seed, "Random seed");
  sc_gen->add_option("-o,--out", gen.out, "Output dataset path")->required();
  sc_gen->add_flag("--force", gen.force, "Overwrite an existing file");

  WarmupArgs wu;
  auto* sc_wu = app.add_subcommand("warmup", "Policy-gradient warm-up training");
  sc_wu->add_flag("--tsp", wu.tsp, "TSP model (default)");
  sc_wu->add_flag("--cvrp", wu.cvrp, "CVRP model");
  sc_wu->add_option("-n,--nodes", wu.wc.n, "Training instance size");
  sc_wu->add_option("--epochs", wu.wc.epochs, "Epoch count");
  sc_wu->add_option("--batch", wu.wc.batch_size, "Instances per optimizer step");
  sc_wu->add_option("--instances", wu.wc.instances_per_epoch, "Instances per epoch");
  sc_wu->add_option("--micro-batch", wu.wc.micro_batch, "Instances per gradient chunk");
  sc_wu->add_option("--capacity", wu.wc.capacity, "CVRP warm-up capacity");
  sc_wu->add_option("--seed", wu.wc.seed, "Random seed");
  sc_wu->add_option("--ckpt", wu.ckpt, "Checkpoint output path");
  sc_wu->add_option("--metrics", wu.metrics, "Metrics CSV path");
  sc_wu->add_flag("--resume", wu.resume, "Resume from the checkpoint if present");
  sc_wu->add_flag("--fp64", wu.fp64, "Train in double precision (default float)");

  SilArgs sil;
  auto* sc_sil = app.add_subcommand("sil", "Self-improved learning loop");
  sc_sil->add_option("--dataset", sil.dataset, "Training dataset")->required();
  sc_sil->add_option("--ckpt", sil.ckpt, "Warm-up checkpoint")->required();
  sc_sil->add_option("--episodes", sil.sc.episodes, "Episode budget");
  sc_sil->add_option("--iters", sil.sc.prc_iterations, "PRC iterations per episode");
  sc_sil->add_option("--train-epochs", sil.sc.train_epochs, "CE epochs per episode");
  sc_sil->add_option("--batch", sil.sc.batch_size, "Training batch size");
  sc_sil->add_option("--micro-batch", sil.sc.micro_batch, "Segments per gradient chunk");
  sc_sil->add_option("--lmax", sil.sc.l_max, "Maximum segment length");
  sc_sil->add_option("--seed", sil.sc.seed, "Random seed");
  sc_sil->add_option("--heldout", sil.heldout, "Held-out instance count");
  sc_sil->add_option("--out-dir", sil.out_dir, "Checkpoint/metrics directory");

  SolveArgs solve;
  auto* sc_solve = app.add_subcommand("solve", "Random insertion + PRC solving");
  sc_solve->add_option("--dataset", solve.dataset, "Instance dataset");
  sc_solve->add_option("file", solve.library_file, "TSPLIB/CVRPLIB instance file");
  sc_solve->add_option("--ckpt", solve.ckpt, "Model checkpoint")->required();
  sc_solve->add_option("--iters", solve.iters, "PRC iterations");
  sc_solve->add_option("--seed", solve.seed, "Random seed");
  sc_solve->add_option("--jobs", solve.jobs, "Worker threads");
  sc_solve->add_option("-o,--out", solve.out, "Results CSV path");
  sc_solve->add_option("--trace", solve.trace, "Per-iteration objective CSV path");

  EvalArgs eval;
  auto* sc_eval = app.add_subcommand("eval", "Gap table against reference objectives");
  sc_eval->add_option("--results", eval.results, "Results CSV from solve")->required();
  sc_eval->add_option("--refs", eval.refs, "Reference objectives, one per line")->required();
  sc_eval->add_option("-o,--out", eval.out, "Gap CSV path");

  BenchArgs bench;
  auto* sc_bench = app.add_subcommand("bench", "Decoder memory benchmark");
  sc_bench->add_option("--sizes", bench.sizes, "Available-node counts")->delimiter(',');
  sc_bench->add_option("--variant", bench.variant, "linear or quadratic");
  sc_bench->add_option("--ckpt", bench.ckpt, "Optional checkpoint (default random params)");
  sc_bench->add_option("--seed", bench.seed, "Random seed");
  sc_bench->add_option("-o,--out", bench.out, "Report CSV path");

  DiagArgs diag;
  auto* sc_diag = app.add_subcommand("diag", "Probability-vs-distance diagnostic");
  sc_diag->add_option("--ckpt", diag.ckpt, "Model checkpoint")->required();
  sc_diag->add_option("--buckets", diag.buckets, "Distance-rank buckets");
  sc_diag->add_option("--instances", diag.instances, "Instance count");
  sc_diag->add_option("-n,--nodes", diag.n, "Instance size");
  sc_diag->add_option("--seed", diag.seed, "Random seed");
  sc_diag->add_option("-o,--out", diag.out, "Profile CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (emit_config) std::cout << app.config_to_str(true, true);
    if (sc_gen->parsed()) return cmd_gen(gen);
    if (sc_wu->parsed()) return cmd_warmup(wu);
    if (sc_sil->parsed()) return cmd_sil(sil);
    if (sc_solve->parsed()) return cmd_solve(solve);
    if (sc_eval->parsed()) return cmd_eval(eval);
    if (sc_bench->parsed()) return cmd_bench(bench);
    if (sc_diag->parsed()) return cmd_diag(diag);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
