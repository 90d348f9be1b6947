#ifndef SILA_MODEL_HPP
#define SILA_MODEL_HPP

#include <string>
#include <utility>
#include <vector>

#include "sila/config.hpp"
#include "sila/instance.hpp"
#include "sila/solution.hpp"
#include "sila/tape.hpp"

namespace sila {

inline int encoder_input_width(const ModelConfig& cfg) {
  return cfg.kind == ProblemKind::Cvrp ? 3 : 2;
}

// Registers every model parameter with its canonical name and shape.
// Encoder: enc.W0 / enc.b0. Representative projections: rep.W1 / rep.W2
// (CVRP: input width d+1 for the fused remaining capacity, plus biases).
// Per module l and part in {agg, bro}: mod{l}.{part}.{Wq,Wk,Wv,Wo} and
// mod{l}.{part}.ff.{W1,b1,W2,b2}. Output head: head.WO (d x 1, CVRP d x 2).
template <typename T>
void build_parameters(const ModelConfig& cfg, ParameterStore<T>& store) {
  cfg.validate();
  const int d = cfg.embedding_dim;
  const bool cvrp = cfg.kind == ProblemKind::Cvrp;
  store.add("enc.W0", encoder_input_width(cfg), d);
  store.add("enc.b0", 1, d);
  const int rep_in = cvrp ? d + 1 : d;
  store.add("rep.W1", rep_in, d);
  store.add("rep.W2", rep_in, d);
  if (cvrp) {
    store.add("rep.b1", 1, d);
    store.add("rep.b2", 1, d);
  }
  for (int l = 0; l < cfg.num_modules; ++l) {
    for (const char* part : {"agg", "bro"}) {
      const std::string p = "mod" + std::to_string(l) + "." + part + ".";
      store.add(p + "Wq", d, d);
      store.add(p + "Wk", d, d);
      store.add(p + "Wv", d, d);
      store.add(p + "Wo", d, d);
      store.add(p + "ff.W1", d, cfg.ff_hidden);
      store.add(p + "ff.b1", 1, cfg.ff_hidden);
      store.add(p + "ff.W2", cfg.ff_hidden, d);
      store.add(p + "ff.b2", 1, d);
    }
  }
  store.add("head.WO", d, cvrp ? 2 : 1);
}

template <typename T>
ParameterStore<T> init_model(const ModelConfig& cfg, std::uint64_t seed) {
  ParameterStore<T> store;
  build_parameters(cfg, store);
  Rng rng(seed);
  store.init_uniform(rng);
  return store;
}

// Raw per-node features. TSP: (x, y). CVRP: row 0 is the depot with demand 0,
// rows 1..n are customers with (x, y, delta_i / D).
template <typename T>
Array2<T> node_features(const TspInstance& instance) {
  Array2<T> f(instance.n(), 2);
  for (int i = 0; i < instance.n(); ++i) {
    f(i, 0) = static_cast<T>(instance.coords[i].x);
    f(i, 1) = static_cast<T>(instance.coords[i].y);
  }
  return f;
}

template <typename T>
Array2<T> node_features(const CvrpInstance& instance) {
  Array2<T> f(instance.n() + 1, 3);
  f(0, 0) = static_cast<T>(instance.depot.x);
  f(0, 1) = static_cast<T>(instance.depot.y);
  f(0, 2) = T(0);
  for (int i = 0; i < instance.n(); ++i) {
    f(i + 1, 0) = static_cast<T>(instance.customers[i].x);
    f(i + 1, 1) = static_cast<T>(instance.customers[i].y);
    f(i + 1, 2) = static_cast<T>(static_cast<double>(instance.demands[i]) / instance.capacity);
  }
  return f;
}

// h_i = W0 s_i + b0; there is no attention in the encoder.
template <typename T>
typename Tape<T>::Ref encode_features(Tape<T>& tape, typename Tape<T>::Ref features) {
  return tape.linear(features, tape.param("enc.W0"), tape.param("enc.b0"));
}

template <typename T>
typename Tape<T>::Ref encode(Tape<T>& tape, const TspInstance& instance) {
  return encode_features<T>(tape, tape.constant(node_features<T>(instance)));
}

template <typename T>
typename Tape<T>::Ref encode(Tape<T>& tape, const CvrpInstance& instance) {
  return encode_features<T>(tape, tape.constant(node_features<T>(instance)));
}

// One in-flight decoding context. `embeddings` is a tape ref to the encoded
// instance (CVRP: row 0 is the depot, customer i lives in row i+1).
struct DecodeState {
  ProblemKind kind = ProblemKind::Tsp;
  int embeddings = -1;
  std::vector<int> available;  // selectable node ids
  int start = -1;              // x_{t-1}, most recently selected
  int dest = -1;               // x_1, fixed destination
  double remaining_capacity = 1.0;  // d_r in [0,1], CVRP only
  const CvrpInstance* cvrp = nullptr;
  // CVRP segments: once `available` empties, one extra step decides the
  // destination's via-depot flag.
  bool finish_with_dest = false;

  int context_rows() const {
    return 2 + (kind == ProblemKind::Cvrp ? 1 : 0) + static_cast<int>(available.size());
  }
};

// Result of one batched decode step: a shared logits node plus, per state,
// the softmax spec over that state's rows. `base[b]` is the row index (within
// spec b) of the first available node; row base[b]+k holds available[k].
template <typename T>
struct DecodeStep {
  typename Tape<T>::Ref logits = -1;
  std::vector<SoftmaxSpec> specs;
  std::vector<int> base;
};

namespace model_detail {

// AttentionLayer(X, C) per the paper's appendix: multi-head attention with a
// residual, then a ReLU feed-forward with a residual; no normalization.
template <typename T>
typename Tape<T>::Ref attention_layer(Tape<T>& tape, const std::string& prefix,
                                      typename Tape<T>::Ref X, typename Tape<T>::Ref C,
                                      const std::vector<AttnBlock>& blocks, int heads) {
  using Ref = typename Tape<T>::Ref;
  const Ref Q = tape.linear(X, tape.param(prefix + "Wq"));
  const Ref K = tape.linear(C, tape.param(prefix + "Wk"));
  const Ref V = tape.linear(C, tape.param(prefix + "Wv"));
  const Ref A = tape.heads_attention(Q, K, V, heads, blocks);
  const Ref X1 = tape.add(tape.linear(A, tape.param(prefix + "Wo")), X);
  const Ref F = tape.linear(
      tape.relu(tape.linear(X1, tape.param(prefix + "ff.W1"), tape.param(prefix + "ff.b1"))),
      tape.param(prefix + "ff.W2"), tape.param(prefix + "ff.b2"));
  return tape.add(F, X1);
}

// Builds the interleaved decoder inputs for a batch of states. On return:
// R is the 2B x d representative stack ([W1 h_dest; W2 h_start] per state,
// CVRP-fused with d_r), H is the sum(m_b) x d context stack
// ([rep1; rep2; (depot); available...] per state), hoff/m give each state's
// row window inside H.
template <typename T>
void build_decoder_inputs(Tape<T>& tape, const ModelConfig& cfg,
                          const std::vector<const DecodeState*>& states,
                          typename Tape<T>::Ref& R, typename Tape<T>::Ref& H,
                          std::vector<int>& hoff, std::vector<int>& m) {
  using Ref = typename Tape<T>::Ref;
  const bool cvrp = cfg.kind == ProblemKind::Cvrp;
  const int B = static_cast<int>(states.size());
  const int extra = cvrp ? 1 : 0;

  std::vector<Ref> gathers;
  gathers.reserve(B);
  std::vector<int> goff(B);
  int gtotal = 0;
  for (int b = 0; b < B; ++b) {
    const DecodeState& st = *states[b];
    if (st.available.empty())
      throw InvalidArgument("decode_step: empty available set");
    if (st.start < 0 || st.dest < 0)
      throw InvalidArgument("decode_step: start/destination unset");
    const auto row_of = [cvrp](int node) { return cvrp ? node + 1 : node; };
    std::vector<int> idx;
    idx.reserve(2 + extra + st.available.size());
    idx.push_back(row_of(st.dest));
    idx.push_back(row_of(st.start));
    if (cvrp) idx.push_back(0);  // depot context row
    for (int v : st.available) idx.push_back(row_of(v));
    goff[b] = gtotal;
    gtotal += static_cast<int>(idx.size());
    gathers.push_back(tape.gather_rows(st.embeddings, std::move(idx)));
  }
  const Ref G = tape.concat_rows(gathers);

  std::vector<int> didx(B), sidx(B);
  for (int b = 0; b < B; ++b) {
    didx[b] = goff[b];
    sidx[b] = goff[b] + 1;
  }
  Ref D = tape.gather_rows(G, std::move(didx));
  Ref S = tape.gather_rows(G, std::move(sidx));
  if (cvrp) {
    std::vector<T> dr(B);
    for (int b = 0; b < B; ++b) dr[b] = static_cast<T>(states[b]->remaining_capacity);
    D = tape.append_col(D, dr);
    S = tape.append_col(S, dr);
  }
  const Ref R1 = cvrp ? tape.linear(D, tape.param("rep.W1"), tape.param("rep.b1"))
                      : tape.linear(D, tape.param("rep.W1"));
  const Ref R2 = cvrp ? tape.linear(S, tape.param("rep.W2"), tape.param("rep.b2"))
                      : tape.linear(S, tape.param("rep.W2"));

  const Ref RH = tape.concat_rows({R1, R2, G});
  std::vector<int> ridx, hidx;
  ridx.reserve(2 * B);
  hoff.assign(B, 0);
  m.assign(B, 0);
  int htotal = 0;
  for (int b = 0; b < B; ++b) {
    ridx.push_back(b);
    ridx.push_back(B + b);
    const int gb = 2 + extra + static_cast<int>(states[b]->available.size());
    hoff[b] = htotal;
    m[b] = gb;
    hidx.push_back(b);
    hidx.push_back(B + b);
    for (int k = 2; k < gb; ++k) hidx.push_back(2 * B + goff[b] + k);
    htotal += gb;
  }
  R = tape.gather_rows(RH, std::move(ridx));
  H = tape.gather_rows(RH, std::move(hidx));
}

// Per-state masks and softmax specs shared by both decoder variants.
// Context rows (representatives, depot) are masked in every action; CVRP
// masks the direct action of any node whose demand exceeds d_r.
template <typename T>
void fill_specs(const ModelConfig& cfg, const std::vector<const DecodeState*>& states,
                const std::vector<int>& hoff, const std::vector<int>& m,
                DecodeStep<T>& step) {
  const bool cvrp = cfg.kind == ProblemKind::Cvrp;
  const int extra = cvrp ? 1 : 0;
  const int actions = cvrp ? 2 : 1;
  const int B = static_cast<int>(states.size());
  step.specs.resize(B);
  step.base.assign(B, 2 + extra);
  for (int b = 0; b < B; ++b) {
    const DecodeState& st = *states[b];
    SoftmaxSpec& sp = step.specs[b];
    sp.row0 = hoff[b];
    sp.rows = m[b];
    sp.actions = actions;
    sp.mask.assign(static_cast<std::size_t>(sp.rows) * actions, 1);
    for (int a = 0; a < actions; ++a)
      for (int r = 0; r < 2 + extra; ++r) sp.mask[a * sp.rows + r] = 0;
    if (cvrp) {
      for (std::size_t k = 0; k < st.available.size(); ++k) {
        const double frac =
            static_cast<double>(st.cvrp->demands[st.available[k]]) / st.cvrp->capacity;
        // action 0 = via depot, action 1 = direct from the previous customer
        if (frac > st.remaining_capacity + 1e-9)
          sp.mask[1 * sp.rows + (2 + extra + static_cast<int>(k))] = 0;
      }
    }
  }
}

}  // namespace model_detail

// One decoding step of the linear-attention decoder over a batch of
// independent states. L modules of aggregate (R attends to H) then broadcast
// (H attends to R) attention, followed by the output head on H.
template <typename T>
DecodeStep<T> decode_step(Tape<T>& tape, const ModelConfig& cfg,
                          const std::vector<const DecodeState*>& states) {
  using Ref = typename Tape<T>::Ref;
  if (states.empty()) throw InvalidArgument("decode_step: no states");
  Ref R = -1, H = -1;
  std::vector<int> hoff, m;
  model_detail::build_decoder_inputs(tape, cfg, states, R, H, hoff, m);

  const int B = static_cast<int>(states.size());
  std::vector<AttnBlock> agg(B), bro(B);
  for (int b = 0; b < B; ++b) {
    agg[b] = {2 * b, 2, hoff[b], m[b]};
    bro[b] = {hoff[b], m[b], 2 * b, 2};
  }
  for (int l = 0; l < cfg.num_modules; ++l) {
    const std::string p = "mod" + std::to_string(l) + ".";
    R = model_detail::attention_layer(tape, p + "agg.", R, H, agg, cfg.num_heads);
    H = model_detail::attention_layer(tape, p + "bro.", H, R, bro, cfg.num_heads);
  }

  DecodeStep<T> step;
  step.logits = tape.linear(H, tape.param("head.WO"));
  model_detail::fill_specs(cfg, states, hoff, m, step);
  return step;
}

// Quadratic reference decoder for the memory comparison: identical inputs and
// head, but every module is full self-attention over all context rows (the
// per-step O(m^2) design of earlier heavy decoders). Shares the aggregate
// parameters; it exists only for benchmarking, never for solving.
template <typename T>
DecodeStep<T> decode_step_reference(Tape<T>& tape, const ModelConfig& cfg,
                                    const std::vector<const DecodeState*>& states) {
  using Ref = typename Tape<T>::Ref;
  if (states.empty()) throw InvalidArgument("decode_step: no states");
  Ref R = -1, H = -1;
  std::vector<int> hoff, m;
  model_detail::build_decoder_inputs(tape, cfg, states, R, H, hoff, m);

  const int B = static_cast<int>(states.size());
  std::vector<AttnBlock> self(B);
  for (int b = 0; b < B; ++b) self[b] = {hoff[b], m[b], hoff[b], m[b]};
  for (int l = 0; l < cfg.num_modules; ++l) {
    const std::string p = "mod" + std::to_string(l) + ".";
    H = model_detail::attention_layer(tape, p + "agg.", H, H, self, cfg.num_heads);
  }

  DecodeStep<T> step;
  step.logits = tape.linear(H, tape.param("head.WO"));
  model_detail::fill_specs(cfg, states, hoff, m, step);
  return step;
}

// Probabilities of state b's decision in flat action-major order
// (flat = action * rows + row; masked entries are exactly 0).
template <typename T>
std::vector<double> step_probs(const Tape<T>& tape, const DecodeStep<T>& step, int b) {
  return Tape<T>::compute_probs(tape.value(step.logits), {step.specs[b]})->front();
}

enum class DecodeMode { Greedy, Sample };

// One forced decision for teacher-forced decoding: node id + action
// (action 0 = via depot, 1 = direct; always 0 for TSP).
struct ForcedAction {
  int node = -1;
  int action = 0;
};

template <typename T>
struct RolloutOutcome {
  std::vector<int> order;               // selected nodes, in selection order
  std::vector<std::uint8_t> via_depot;  // CVRP: 1 = reached from the depot
  double logprob = 0.0;                 // sum of log p(chosen)
  std::vector<typename Tape<T>::Ref> nll_nodes;  // per-step -log p, weight 1
};

// Shared rollout driver. Runs all states to completion (empty available set;
// CVRP segments additionally decide the destination flag), batching every
// still-active state into a single decode step per iteration. With
// `record_nll` each chosen decision also becomes a unit-weight NLL node so
// callers can scale and sum them into a differentiable loss. `forced`
// (teacher forcing) overrides greedy/sampled selection.
template <typename T>
std::vector<RolloutOutcome<T>> run_rollouts(
    Tape<T>& tape, const ModelConfig& cfg, std::vector<DecodeState>& states,
    DecodeMode mode, Rng* rng, bool record_nll = false,
    const std::vector<std::vector<ForcedAction>>* forced = nullptr) {
  const bool cvrp = cfg.kind == ProblemKind::Cvrp;
  const int B = static_cast<int>(states.size());
  if (mode == DecodeMode::Sample && rng == nullptr)
    throw InvalidArgument("run_rollouts: sampling needs an rng");
  std::vector<RolloutOutcome<T>> out(B);
  std::vector<int> forced_at(B, 0);
  // On no-grad tapes each step's activations are freed once its decisions
  // are read, keeping live memory proportional to a single step.
  const std::size_t watermark = tape.node_count();

  for (;;) {
    std::vector<int> active;
    std::vector<const DecodeState*> batch;
    for (int b = 0; b < B; ++b) {
      DecodeState& st = states[b];
      if (st.available.empty()) {
        if (st.finish_with_dest && st.dest >= 0) {
          // final CVRP segment step: only the destination, flag to decide
          st.available.push_back(st.dest);
          st.finish_with_dest = false;
        } else {
          continue;
        }
      }
      active.push_back(b);
      batch.push_back(&st);
    }
    if (active.empty()) break;

    const DecodeStep<T> step = decode_step(tape, cfg, batch);
    for (std::size_t i = 0; i < active.size(); ++i) {
      const int b = active[i];
      DecodeState& st = states[b];
      const SoftmaxSpec& sp = step.specs[i];
      const auto probs = step_probs(tape, step, static_cast<int>(i));
      const int base = step.base[i];
      const int rows = sp.rows;

      int pick = -1;  // index into st.available
      int action = 0;
      if (forced) {
        const ForcedAction fa = (*forced)[b][forced_at[b]++];
        for (std::size_t k = 0; k < st.available.size(); ++k)
          if (st.available[k] == fa.node) pick = static_cast<int>(k);
        if (pick < 0)
          throw InvalidArgument("run_rollouts: forced node not available");
        action = cvrp ? fa.action : 0;
      } else if (mode == DecodeMode::Greedy) {
        double best = -1.0;
        for (int a = 0; a < sp.actions; ++a)
          for (std::size_t k = 0; k < st.available.size(); ++k) {
            const double p = probs[a * rows + base + static_cast<int>(k)];
            const bool better =
                p > best ||
                (p == best && pick >= 0 && st.available[k] < st.available[pick]);
            if (better) {
              best = p;
              pick = static_cast<int>(k);
              action = a;
            }
          }
      } else {
        double u = rng->uniform();
        for (int a = 0; a < sp.actions && pick < 0; ++a)
          for (std::size_t k = 0; k < st.available.size(); ++k) {
            u -= probs[a * rows + base + static_cast<int>(k)];
            if (u <= 0.0) {
              pick = static_cast<int>(k);
              action = a;
              break;
            }
          }
        if (pick < 0) {  // numerical tail: take the last feasible action
          for (int a = sp.actions - 1; a >= 0 && pick < 0; --a)
            for (int k = static_cast<int>(st.available.size()) - 1; k >= 0; --k)
              if (probs[a * rows + base + k] > 0.0) {
                pick = k;
                action = a;
                break;
              }
        }
      }

      const int flat = action * rows + base + pick;
      if (sp.mask[flat] == 0)
        throw FeasibilityError("run_rollouts: selected a masked action");
      const int node = st.available[pick];
      out[b].order.push_back(node);
      if (cvrp) out[b].via_depot.push_back(action == 0 ? 1 : 0);
      out[b].logprob += std::log(std::max(probs[flat], 1e-300));
      if (record_nll && tape.grad_enabled()) {
        SoftmaxSpec nll_spec = sp;
        nll_spec.target = flat;
        nll_spec.weight = 1.0;
        out[b].nll_nodes.push_back(tape.softmax_nll(step.logits, {nll_spec}));
      }

      st.available.erase(st.available.begin() + pick);
      st.start = node;
      if (cvrp) {
        const double frac =
            static_cast<double>(st.cvrp->demands[node]) / st.cvrp->capacity;
        if (action == 0)
          st.remaining_capacity = 1.0 - frac;
        else
          st.remaining_capacity -= frac;
      }
    }
    if (!tape.grad_enabled()) tape.truncate(watermark);
  }
  return out;
}

// Full greedy/sampled TSP rollout on a no-grad tape; the first node is chosen
// uniformly at random (or forced via first_node >= 0).
template <typename T>
struct SampledTour {
  TspTour tour;
  double logprob = 0.0;
};

template <typename T>
SampledTour<T> full_tsp_rollout(const TspInstance& instance, const ModelConfig& cfg,
                                ParameterStore<T>& store, DecodeMode mode,
                                std::uint64_t seed, int first_node = -1) {
  Tape<T> tape(&store, /*grad_enabled=*/false);
  Rng rng(seed);
  const auto embed = encode<T>(tape, instance);
  DecodeState st;
  st.kind = ProblemKind::Tsp;
  st.embeddings = embed;
  const int first = first_node >= 0
                        ? first_node
                        : static_cast<int>(rng.uniform_int(0, instance.n() - 1));
  st.start = st.dest = first;
  for (int i = 0; i < instance.n(); ++i)
    if (i != first) st.available.push_back(i);
  std::vector<DecodeState> states{std::move(st)};
  auto outcomes = run_rollouts(tape, cfg, states, mode, &rng);
  SampledTour<T> result;
  result.tour.order.push_back(first);
  result.tour.order.insert(result.tour.order.end(), outcomes[0].order.begin(),
                           outcomes[0].order.end());
  result.logprob = outcomes[0].logprob;
  return result;
}

template <typename T>
struct SampledCvrp {
  CvrpSolution solution;
  double logprob = 0.0;
};

// Full CVRP rollout; the first customer is chosen uniformly (or forced) and
// always reached from the depot.
template <typename T>
SampledCvrp<T> full_cvrp_rollout(const CvrpInstance& instance, const ModelConfig& cfg,
                                 ParameterStore<T>& store, DecodeMode mode,
                                 std::uint64_t seed, int first_node = -1) {
  Tape<T> tape(&store, /*grad_enabled=*/false);
  Rng rng(seed);
  const auto embed = encode<T>(tape, instance);
  DecodeState st;
  st.kind = ProblemKind::Cvrp;
  st.cvrp = &instance;
  st.embeddings = embed;
  const int first = first_node >= 0
                        ? first_node
                        : static_cast<int>(rng.uniform_int(0, instance.n() - 1));
  st.start = st.dest = first;
  st.remaining_capacity =
      1.0 - static_cast<double>(instance.demands[first]) / instance.capacity;
  for (int i = 0; i < instance.n(); ++i)
    if (i != first) st.available.push_back(i);
  std::vector<DecodeState> states{std::move(st)};
  auto outcomes = run_rollouts(tape, cfg, states, mode, &rng);
  SampledCvrp<T> result;
  result.solution.order.push_back(first);
  result.solution.via_depot.push_back(1);
  result.solution.order.insert(result.solution.order.end(), outcomes[0].order.begin(),
                               outcomes[0].order.end());
  result.solution.via_depot.insert(result.solution.via_depot.end(),
                                   outcomes[0].via_depot.begin(),
                                   outcomes[0].via_depot.end());
  result.logprob = outcomes[0].logprob;
  return result;
}

}  // namespace sila

#endif
