#ifndef SILA_PARAMS_HPP
#define SILA_PARAMS_HPP

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "sila/rng.hpp"
#include "sila/tensor.hpp"

namespace sila {

template <typename T>
struct Parameter {
  std::string name;
  Array2<T> value;
  Array2<T> grad;
  Array2<T> moment1;  // Adam first moment
  Array2<T> moment2;  // Adam second moment
};

// Named parameter slots with gradient accumulators and Adam moments.
template <typename T>
class ParameterStore {
public:
  int add(const std::string& name, int rows, int cols) {
    if (index_.count(name)) throw InvalidArgument("parameter '" + name + "' already exists");
    Parameter<T> p;
    p.name = name;
    p.value.resize(rows, cols);
    p.grad.resize(rows, cols);
    p.moment1.resize(rows, cols);
    p.moment2.resize(rows, cols);
    const int idx = static_cast<int>(params_.size());
    params_.push_back(std::move(p));
    index_[name] = idx;
    return idx;
  }

  int find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }
  Parameter<T>& at(int i) { return params_[i]; }
  const Parameter<T>& at(int i) const { return params_[i]; }
  Parameter<T>& at(const std::string& name) {
    const int i = find(name);
    if (i < 0) throw InvalidArgument("unknown parameter '" + name + "'");
    return params_[i];
  }
  int size() const { return static_cast<int>(params_.size()); }

  void zero_grads() {
    for (auto& p : params_) p.grad.map().setZero();
  }

  // Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; fan_in is the input
  // width (rows, since forward passes compute X * W).
  void init_uniform(Rng& rng) {
    for (auto& p : params_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, p.value.rows())));
      for (int r = 0; r < p.value.rows(); ++r)
        for (int c = 0; c < p.value.cols(); ++c)
          p.value(r, c) = static_cast<T>(rng.uniform(-bound, bound));
    }
  }

  double grad_norm() const {
    double s = 0.0;
    for (const auto& p : params_) s += static_cast<double>(p.grad.map().template cast<double>().squaredNorm());
    return std::sqrt(s);
  }

  template <typename U>
  ParameterStore<U> cast() const {
    ParameterStore<U> out;
    for (const auto& p : params_) {
      const int idx = out.add(p.name, p.value.rows(), p.value.cols());
      out.at(idx).value.map() = p.value.map().template cast<U>();
      out.at(idx).moment1.map() = p.moment1.map().template cast<U>();
      out.at(idx).moment2.map() = p.moment2.map().template cast<U>();
    }
    return out;
  }

private:
  std::vector<Parameter<T>> params_;
  std::unordered_map<std::string, int> index_;
};

// Bias-corrected Adam with a per-epoch multiplicative learning-rate decay.
struct AdamState {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double epoch_decay_factor = 0.97;
  long long step_count = 0;
  long long rejected_steps = 0;

  template <typename T>
  bool step(ParameterStore<T>& store) {
    for (int i = 0; i < store.size(); ++i) {
      if (!store.at(i).grad.all_finite()) {
        ++rejected_steps;
        return false;
      }
    }
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (int i = 0; i < store.size(); ++i) {
      auto& p = store.at(i);
      auto v = p.value.map();
      auto g = p.grad.map();
      auto m1 = p.moment1.map();
      auto m2 = p.moment2.map();
      m1 = T(beta1) * m1 + T(1.0 - beta1) * g;
      m2 = T(beta2) * m2.array().matrix() + T(1.0 - beta2) * g.array().square().matrix();
      v.array() -= T(learning_rate) *
                   (m1.array() / T(bc1)) /
                   ((m2.array() / T(bc2)).sqrt() + T(epsilon));
    }
    return true;
  }

  void epoch_decay() { learning_rate *= epoch_decay_factor; }
};

}  // namespace sila

#endif
