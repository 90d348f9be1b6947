#ifndef SILA_TAPE_HPP
#define SILA_TAPE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "sila/params.hpp"
#include "sila/tensor.hpp"

namespace sila {

template <typename T>
void check_same_shape(const Array2<T>& a, const Array2<T>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": shape mismatch");
}

inline void check_cols(int a, int b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": shape mismatch");
}

// One attention block: rows [q0, q0+qn) of Q attend to rows [k0, k0+kn) of
// K/V. Batching many independent (rollout, segment) states into one tape op
// keeps the projection matmuls large.
struct AttnBlock {
  int q0, qn, k0, kn;
};

// Softmax over one decision: `rows` logits rows starting at `row0`, each with
// `actions` columns, flattened action-major (flat = action * rows + row).
// mask entries with 0 receive exactly zero probability.
struct SoftmaxSpec {
  int row0 = 0;
  int rows = 0;
  int actions = 1;
  std::vector<std::uint8_t> mask;  // rows*actions entries, 1 = selectable
  int target = -1;                 // flat index, used by the NLL op
  double weight = 1.0;             // loss weight, used by the NLL op
};

// Append-only reverse-mode differentiation record. Values are cached during
// the forward pass; backward() walks the record in reverse and frees each
// node's buffers as soon as they can no longer be referenced.
template <typename T>
class Tape {
public:
  using Ref = int;
  using Mat = typename Array2<T>::Mat;

  explicit Tape(ParameterStore<T>* store = nullptr, bool grad_enabled = true)
      : store_(store), grad_enabled_(grad_enabled && store != nullptr) {}

  ParameterStore<T>* store() { return store_; }
  bool grad_enabled() const { return grad_enabled_; }

  // ---- leaves ----

  Ref constant(Array2<T> v) {
    Node n;
    n.value = std::move(v);
    return push(std::move(n));
  }

  // Non-owning leaf over caller-managed storage (e.g. frozen embeddings).
  Ref external(const Array2<T>* v) {
    Node n;
    n.ext = v;
    return push(std::move(n));
  }

  Ref param(int param_index) {
    if (!store_) throw InvalidArgument("tape has no parameter store");
    auto it = param_nodes_.find(param_index);
    if (it != param_nodes_.end()) return it->second;
    Node n;
    n.param = param_index;
    n.ext = &store_->at(param_index).value;
    n.needs_grad = grad_enabled_;
    const Ref r = push(std::move(n));
    param_nodes_[param_index] = r;
    return r;
  }

  Ref param(const std::string& name) {
    if (!store_) throw InvalidArgument("tape has no parameter store");
    const int idx = store_->find(name);
    if (idx < 0) throw InvalidArgument("unknown parameter '" + name + "'");
    return param(idx);
  }

  // ---- access ----

  const Array2<T>& value(Ref r) const {
    const Node& n = nodes_[r];
    return n.ext ? *n.ext : n.value;
  }

  const Array2<T>& grad(Ref r) const { return nodes_[r].grad; }

  // ---- ops ----

  Ref matmul(Ref a, Ref b) {
    check_cols(value(a).cols(), value(b).rows(), "matmul");
    Array2<T> out(value(a).rows(), value(b).cols());
    out.map().noalias() = value(a).map() * value(b).map();
    return make(std::move(out), {a, b}, [a, b](Tape& t, Ref self) {
      const auto& dy = t.nodes_[self].grad;
      if (t.needs(a)) t.accum(a, dy.map() * t.value(b).map().transpose());
      if (t.needs(b)) t.accum(b, t.value(a).map().transpose() * dy.map());
    });
  }

  // X*W (+ row-broadcast bias).
  Ref linear(Ref x, Ref w, Ref bias = -1) {
    check_cols(value(x).cols(), value(w).rows(), "linear");
    Array2<T> out(value(x).rows(), value(w).cols());
    out.map().noalias() = value(x).map() * value(w).map();
    if (bias >= 0) {
      if (value(bias).rows() != 1 || value(bias).cols() != out.cols())
        throw ShapeError("linear: bias must be 1 x out_cols");
      out.map().rowwise() += value(bias).map().row(0);
    }
    return make(std::move(out), {x, w, bias}, [x, w, bias](Tape& t, Ref self) {
      const auto& dy = t.nodes_[self].grad;
      if (t.needs(x)) t.accum(x, dy.map() * t.value(w).map().transpose());
      if (t.needs(w)) t.accum(w, t.value(x).map().transpose() * dy.map());
      if (bias >= 0 && t.needs(bias)) t.accum(bias, dy.map().colwise().sum());
    });
  }

  Ref add(Ref a, Ref b) {
    check_same_shape(value(a), value(b), "add");
    Array2<T> out(value(a).rows(), value(a).cols());
    out.map() = value(a).map() + value(b).map();
    return make(std::move(out), {a, b}, [a, b](Tape& t, Ref self) {
      const auto& dy = t.nodes_[self].grad;
      if (t.needs(a)) t.accum(a, dy.map());
      if (t.needs(b)) t.accum(b, dy.map());
    });
  }

  Ref scale(Ref a, double s) {
    Array2<T> out(value(a).rows(), value(a).cols());
    out.map() = value(a).map() * T(s);
    return make(std::move(out), {a}, [a, s](Tape& t, Ref self) {
      if (t.needs(a)) t.accum(a, t.nodes_[self].grad.map() * T(s));
    });
  }

  Ref relu(Ref x) {
    Array2<T> out(value(x).rows(), value(x).cols());
    out.map() = value(x).map().cwiseMax(T(0));
    return make(std::move(out), {x}, [x](Tape& t, Ref self) {
      if (!t.needs(x)) return;
      const auto& dy = t.nodes_[self].grad;
      t.accum(x, (t.value(x).map().array() > T(0))
                     .select(dy.map().array(), typename Mat::Scalar(0))
                     .matrix());
    });
  }

  Ref concat_rows(const std::vector<Ref>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: empty input");
    const int cols = value(parts[0]).cols();
    int rows = 0;
    for (Ref p : parts) {
      check_cols(value(p).cols(), cols, "concat_rows");
      rows += value(p).rows();
    }
    Array2<T> out(rows, cols);
    int at = 0;
    for (Ref p : parts) {
      out.map().middleRows(at, value(p).rows()) = value(p).map();
      at += value(p).rows();
    }
    return make(std::move(out), parts, [parts](Tape& t, Ref self) {
      const auto& dy = t.nodes_[self].grad;
      int at = 0;
      for (Ref p : parts) {
        const int r = t.value(p).rows();
        if (t.needs(p)) t.accum(p, dy.map().middleRows(at, r));
        at += r;
      }
    });
  }

  Ref gather_rows(Ref src, std::vector<int> indices) {
    const auto& v = value(src);
    Array2<T> out(static_cast<int>(indices.size()), v.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] < 0 || indices[i] >= v.rows()) throw ShapeError("gather_rows: index out of range");
      out.map().row(static_cast<int>(i)) = v.map().row(indices[i]);
    }
    auto idx = std::make_shared<std::vector<int>>(std::move(indices));
    return make(std::move(out), {src}, [src, idx](Tape& t, Ref self) {
      if (!t.needs(src)) return;
      const auto& dy = t.nodes_[self].grad;
      auto g = t.grad_target(src);
      for (std::size_t i = 0; i < idx->size(); ++i)
        g.row((*idx)[i]) += dy.map().row(static_cast<int>(i));
    });
  }

  // Appends one constant column (e.g. remaining capacity) to every row.
  Ref append_col(Ref x, const std::vector<T>& col) {
    const auto& v = value(x);
    if (static_cast<int>(col.size()) != v.rows())
      throw ShapeError("append_col: column length must equal row count");
    Array2<T> out(v.rows(), v.cols() + 1);
    out.map().leftCols(v.cols()) = v.map();
    for (int r = 0; r < v.rows(); ++r) out(r, v.cols()) = col[r];
    return make(std::move(out), {x}, [x](Tape& t, Ref self) {
      if (!t.needs(x)) return;
      const auto& dy = t.nodes_[self].grad;
      t.accum(x, dy.map().leftCols(dy.cols() - 1));
    });
  }

  // Scaled-dot-product attention over independent blocks, with the feature
  // dimension split into `heads` equal slices. Q, K, V are already projected.
  // An optional boolean mask (qn x kn, single block only) zeroes attention to
  // masked context rows; a fully masked row is an error.
  Ref heads_attention(Ref q, Ref k, Ref v, int heads, std::vector<AttnBlock> blocks,
                      const Array2<std::uint8_t>* mask = nullptr) {
    const int d = value(q).cols();
    if (d % heads != 0) throw ShapeError("heads_attention: cols not divisible by heads");
    if (value(k).cols() != d || value(v).cols() != d)
      throw ShapeError("heads_attention: K/V width mismatch");
    if (mask && blocks.size() != 1)
      throw ShapeError("heads_attention: mask supported for a single block only");
    const int hd = d / heads;
    const T scale = T(1.0) / static_cast<T>(std::sqrt(static_cast<double>(hd)));

    if (mask) {
      const auto& b = blocks[0];
      if (mask->rows() != b.qn || mask->cols() != b.kn)
        throw ShapeError("heads_attention: mask shape mismatch");
      for (int r = 0; r < b.qn; ++r) {
        bool any = false;
        for (int c = 0; c < b.kn; ++c) any = any || (*mask)(r, c);
        if (!any) throw InvalidArgument("heads_attention: fully masked attention row");
      }
    }

    Array2<T> out(value(q).rows(), d);
    const bool keep_cache = grad_enabled_ && (needs(q) || needs(k) || needs(v));
    // weights[b*heads + h] holds the qn x kn softmax matrix of block b, head h.
    // Scores live in Array2 buffers so the allocation ledger sees the
    // (potentially quadratic) attention-weight memory.
    auto cache = std::make_shared<std::vector<Array2<T>>>();
    if (keep_cache) cache->reserve(blocks.size() * heads);

    for (const auto& blk : blocks) {
      for (int h = 0; h < heads; ++h) {
        auto Qh = value(q).map().block(blk.q0, h * hd, blk.qn, hd);
        auto Kh = value(k).map().block(blk.k0, h * hd, blk.kn, hd);
        auto Vh = value(v).map().block(blk.k0, h * hd, blk.kn, hd);
        Array2<T> Sbuf(blk.qn, blk.kn);
        auto S = Sbuf.map();
        S.noalias() = (Qh * Kh.transpose()) * scale;
        if (mask) {
          for (int r = 0; r < blk.qn; ++r)
            for (int c = 0; c < blk.kn; ++c)
              if (!(*mask)(r, c)) S(r, c) = T(-1e30);
        }
        // row softmax with max subtraction
        for (int r = 0; r < S.rows(); ++r) {
          auto row = S.row(r);
          row = (row.array() - row.maxCoeff()).exp().matrix();
          row /= row.sum();
        }
        if (mask) {
          for (int r = 0; r < blk.qn; ++r)
            for (int c = 0; c < blk.kn; ++c)
              if (!(*mask)(r, c)) S(r, c) = T(0);
        }
        out.map().block(blk.q0, h * hd, blk.qn, hd).noalias() = S * Vh;
        if (keep_cache) cache->push_back(std::move(Sbuf));
      }
    }

    auto blocks_ptr = std::make_shared<std::vector<AttnBlock>>(std::move(blocks));
    return make(std::move(out), {q, k, v},
                [q, k, v, heads, hd, scale, cache, blocks_ptr](Tape& t, Ref self) {
                  const auto& dy = t.nodes_[self].grad;
                  std::size_t ci = 0;
                  for (const auto& blk : *blocks_ptr) {
                    for (int h = 0; h < heads; ++h) {
                      const auto A = (*cache)[ci++].map();
                      auto dOh = dy.map().block(blk.q0, h * hd, blk.qn, hd);
                      auto Qh = t.value(q).map().block(blk.q0, h * hd, blk.qn, hd);
                      auto Kh = t.value(k).map().block(blk.k0, h * hd, blk.kn, hd);
                      auto Vh = t.value(v).map().block(blk.k0, h * hd, blk.kn, hd);
                      if (t.needs(v)) {
                        t.grad_target(v).block(blk.k0, h * hd, blk.kn, hd).noalias() +=
                            A.transpose() * dOh;
                      }
                      if (t.needs(q) || t.needs(k)) {
                        Mat dA = dOh * Vh.transpose();
                        Mat dS = A.array() * (dA.array().colwise() -
                                              (dA.array() * A.array()).rowwise().sum());
                        if (t.needs(q))
                          t.grad_target(q).block(blk.q0, h * hd, blk.qn, hd).noalias() +=
                              dS * Kh * scale;
                        if (t.needs(k))
                          t.grad_target(k).block(blk.k0, h * hd, blk.kn, hd).noalias() +=
                              dS.transpose() * Qh * scale;
                      }
                    }
                  }
                  cache->clear();
                });
  }

  // softmax(Q K^T / sqrt(d)) V with an optional boolean mask; single head.
  Ref attention(Ref q, Ref k, Ref v, const Array2<std::uint8_t>* mask = nullptr) {
    std::vector<AttnBlock> blocks{{0, value(q).rows(), 0, value(k).rows()}};
    return heads_attention(q, k, v, 1, std::move(blocks), mask);
  }

  // Per-decision masked probabilities; masked actions are exactly 0. Output
  // has the logits' shape; rows not covered by any spec stay 0.
  Ref block_softmax(Ref logits, const std::vector<SoftmaxSpec>& specs) {
    Array2<T> out(value(logits).rows(), value(logits).cols());
    auto probs = compute_probs(value(logits), specs);
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const auto& sp = specs[s];
      for (int a = 0; a < sp.actions; ++a)
        for (int i = 0; i < sp.rows; ++i)
          out(sp.row0 + i, a) = (*probs)[s][a * sp.rows + i];
    }
    auto specs_ptr = std::make_shared<std::vector<SoftmaxSpec>>(specs);
    return make(std::move(out), {logits}, [logits, specs_ptr, probs](Tape& t, Ref self) {
      if (!t.needs(logits)) return;
      const auto& dy = t.nodes_[self].grad;
      auto g = t.grad_target(logits);
      for (std::size_t s = 0; s < specs_ptr->size(); ++s) {
        const auto& sp = (*specs_ptr)[s];
        const auto& p = (*probs)[s];
        // dL/du_j = p_j * (dy_j - sum_i dy_i p_i)
        double dot = 0.0;
        for (int a = 0; a < sp.actions; ++a)
          for (int i = 0; i < sp.rows; ++i)
            dot += static_cast<double>(dy(sp.row0 + i, a)) * p[a * sp.rows + i];
        for (int a = 0; a < sp.actions; ++a)
          for (int i = 0; i < sp.rows; ++i) {
            const double pj = p[a * sp.rows + i];
            if (pj > 0.0)
              g(sp.row0 + i, a) += T(pj * (static_cast<double>(dy(sp.row0 + i, a)) - dot));
          }
      }
    });
  }

  // Sum of weight * (-log p_target) over all decisions; returns a scalar node.
  Ref softmax_nll(Ref logits, const std::vector<SoftmaxSpec>& specs) {
    auto probs = compute_probs(value(logits), specs);
    double loss = 0.0;
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const auto& sp = specs[s];
      if (sp.target < 0 || sp.target >= sp.rows * sp.actions)
        throw InvalidArgument("softmax_nll: target out of range");
      const double p = (*probs)[s][sp.target];
      loss += sp.weight * -std::log(std::max(p, 1e-300));
    }
    Array2<T> out(1, 1);
    out(0, 0) = T(loss);
    auto specs_ptr = std::make_shared<std::vector<SoftmaxSpec>>(specs);
    return make(std::move(out), {logits}, [logits, specs_ptr, probs](Tape& t, Ref self) {
      if (!t.needs(logits)) return;
      const double dy = static_cast<double>(t.nodes_[self].grad(0, 0));
      auto g = t.grad_target(logits);
      for (std::size_t s = 0; s < specs_ptr->size(); ++s) {
        const auto& sp = (*specs_ptr)[s];
        const auto& p = (*probs)[s];
        for (int a = 0; a < sp.actions; ++a)
          for (int i = 0; i < sp.rows; ++i) {
            const int flat = a * sp.rows + i;
            if (!sp.mask.empty() && !sp.mask[flat]) continue;
            const double indicator = (flat == sp.target) ? 1.0 : 0.0;
            g(sp.row0 + i, a) += T(dy * sp.weight * (p[flat] - indicator));
          }
      }
    });
  }

  Ref sum_scalars(const std::vector<Ref>& parts) {
    double s = 0.0;
    for (Ref p : parts) {
      if (value(p).rows() != 1 || value(p).cols() != 1)
        throw ShapeError("sum_scalars: inputs must be 1x1");
      s += static_cast<double>(value(p)(0, 0));
    }
    Array2<T> out(1, 1);
    out(0, 0) = T(s);
    return make(std::move(out), parts, [parts](Tape& t, Ref self) {
      const T dy = t.nodes_[self].grad(0, 0);
      Array2<T> one(1, 1);
      one(0, 0) = dy;
      for (Ref p : parts)
        if (t.needs(p)) t.accum(p, one.map());
    });
  }

  // ---- backward ----

  // Accumulates d(loss)/d(param) into the store's gradient slots. Node
  // buffers are freed as the reverse sweep passes them.
  void backward(Ref loss) {
    if (!grad_enabled_) throw InvalidArgument("backward on a no-grad tape");
    if (value(loss).rows() != 1 || value(loss).cols() != 1)
      throw InvalidArgument("backward: loss must be scalar");
    if (!nodes_[loss].needs_grad) return;  // loss does not touch any parameter
    nodes_[loss].grad.resize(1, 1);
    nodes_[loss].grad(0, 0) = T(1);
    for (Ref i = static_cast<Ref>(nodes_.size()) - 1; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.back && !n.grad.empty()) n.back(*this, i);
      n.value.clear();
      n.grad.clear();
      n.back = nullptr;
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

  // Drops every node at index >= keep and frees its buffers. Only valid on
  // no-grad tapes (a training tape must retain its record for backward);
  // inference drivers use this to bound live memory across decode steps.
  void truncate(std::size_t keep) {
    if (grad_enabled_) throw InvalidArgument("truncate on a grad-enabled tape");
    if (keep >= nodes_.size()) return;
    for (auto it = param_nodes_.begin(); it != param_nodes_.end();) {
      if (it->second >= static_cast<Ref>(keep))
        it = param_nodes_.erase(it);
      else
        ++it;
    }
    nodes_.resize(keep);
  }

private:
  struct Node {
    Array2<T> value;
    const Array2<T>* ext = nullptr;
    Array2<T> grad;
    int param = -1;
    bool needs_grad = false;
    std::function<void(Tape&, Ref)> back;
  };

  Ref push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<Ref>(nodes_.size()) - 1;
  }

  bool needs(Ref r) const { return r >= 0 && nodes_[r].needs_grad; }

  Ref make(Array2<T> value, const std::vector<Ref>& inputs,
           std::function<void(Tape&, Ref)> back) {
    Node n;
    n.value = std::move(value);
    for (Ref in : inputs) n.needs_grad = n.needs_grad || needs(in);
    n.needs_grad = n.needs_grad && grad_enabled_;
    if (n.needs_grad) n.back = std::move(back);
    return push(std::move(n));
  }

  // Gradient buffer for a node: parameters accumulate straight into the store.
  typename Array2<T>::Map grad_target(Ref r) {
    Node& n = nodes_[r];
    if (n.param >= 0) return store_->at(n.param).grad.map();
    if (n.grad.empty()) n.grad.resize(value(r).rows(), value(r).cols());
    return n.grad.map();
  }

  template <typename E>
  void accum(Ref r, const E& expr) {
    grad_target(r) += expr;
  }

public:
  // Shared masked-softmax kernel; returns per-spec probability vectors in
  // flat action-major order. Public so rollout drivers can sample actions
  // from logits without adding tape nodes.
  static std::shared_ptr<std::vector<std::vector<double>>> compute_probs(
      const Array2<T>& logits, const std::vector<SoftmaxSpec>& specs) {
    auto out = std::make_shared<std::vector<std::vector<double>>>();
    out->reserve(specs.size());
    for (const auto& sp : specs) {
      const int len = sp.rows * sp.actions;
      if (sp.row0 < 0 || sp.row0 + sp.rows > logits.rows() || sp.actions > logits.cols())
        throw ShapeError("softmax: spec outside logits");
      if (!sp.mask.empty() && static_cast<int>(sp.mask.size()) != len)
        throw ShapeError("softmax: mask length mismatch");
      std::vector<double> p(len, 0.0);
      double mx = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (int a = 0; a < sp.actions; ++a)
        for (int i = 0; i < sp.rows; ++i) {
          const int flat = a * sp.rows + i;
          if (!sp.mask.empty() && !sp.mask[flat]) continue;
          any = true;
          mx = std::max(mx, static_cast<double>(logits(sp.row0 + i, a)));
        }
      if (!any) throw InvalidArgument("softmax: no selectable action (degenerate mask)");
      double z = 0.0;
      for (int a = 0; a < sp.actions; ++a)
        for (int i = 0; i < sp.rows; ++i) {
          const int flat = a * sp.rows + i;
          if (!sp.mask.empty() && !sp.mask[flat]) continue;
          p[flat] = std::exp(static_cast<double>(logits(sp.row0 + i, a)) - mx);
          z += p[flat];
        }
      for (double& v : p) v /= z;
      out->push_back(std::move(p));
    }
    return out;
  }

private:
  std::vector<Node> nodes_;
  ParameterStore<T>* store_;
  bool grad_enabled_;
  std::unordered_map<int, Ref> param_nodes_;
};

// -log p(target), with zero probabilities clamped to 1e-12 (counted).
inline long long& cross_entropy_clamp_count() {
  static long long count = 0;
  return count;
}

inline double cross_entropy(const std::vector<double>& probabilities, int target) {
  if (target < 0 || target >= static_cast<int>(probabilities.size()))
    throw InvalidArgument("cross_entropy: target out of range");
  double p = probabilities[target];
  if (p < 1e-12) {
    p = 1e-12;
    ++cross_entropy_clamp_count();
  }
  return -std::log(p);
}

// Central finite differences against the analytic gradient already stored in
// the parameter's grad slot. Samples at most `max_coords` coordinates for
// large parameters. Returns the max relative error with denominator
// max(|fd|, |analytic|, 1e-8).
template <typename T>
double grad_check(ParameterStore<T>& store, int param_index,
                  const std::function<double()>& loss_fn, double eps = 1e-5,
                  int max_coords = 100) {
  auto& p = store.at(param_index);
  const int total = p.value.rows() * p.value.cols();
  const int count = std::min(total, max_coords);
  double max_err = 0.0;
  for (int s = 0; s < count; ++s) {
    const int flat = static_cast<int>(static_cast<long long>(s) * total / count);
    const int r = flat / p.value.cols();
    const int c = flat % p.value.cols();
    const T saved = p.value(r, c);
    p.value(r, c) = saved + T(eps);
    const double fp = loss_fn();
    p.value(r, c) = saved - T(eps);
    const double fm = loss_fn();
    p.value(r, c) = saved;
    const double fd = (fp - fm) / (2.0 * eps);
    const double an = static_cast<double>(p.grad(r, c));
    const double err = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
    max_err = std::max(max_err, err);
  }
  return max_err;
}

}  // namespace sila

#endif
