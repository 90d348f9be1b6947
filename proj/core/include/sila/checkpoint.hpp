#ifndef SILA_CHECKPOINT_HPP
#define SILA_CHECKPOINT_HPP

#include <cstring>
#include <fstream>
#include <string>

#include "sila/config.hpp"
#include "sila/params.hpp"

namespace sila {

// Versioned binary checkpoint: model config + named parameter tensors with
// Adam moments + optimizer scalars + training episode counter. Round-trips
// bit-exactly at the stored precision.
struct CheckpointMeta {
  ModelConfig config;
  long long episode = 0;
};

namespace ckpt_detail {

constexpr char kMagic[8] = {'S', 'I', 'L', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("checkpoint truncated");
  return v;
}

template <typename T>
void put_array(std::ostream& out, const Array2<T>& a) {
  out.write(reinterpret_cast<const char*>(a.data()), a.bytes());
}

template <typename T>
void get_array(std::istream& in, Array2<T>& a) {
  in.read(reinterpret_cast<char*>(a.data()), a.bytes());
  if (!in) throw IoError("checkpoint truncated");
}

}  // namespace ckpt_detail

template <typename T>
void save_checkpoint(const std::string& path, const ParameterStore<T>& store,
                     const AdamState& adam, const CheckpointMeta& meta) {
  using namespace ckpt_detail;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::uint8_t>(sizeof(T)));
  put(out, static_cast<std::uint8_t>(meta.config.kind == ProblemKind::Cvrp ? 1 : 0));
  put(out, static_cast<std::int32_t>(meta.config.embedding_dim));
  put(out, static_cast<std::int32_t>(meta.config.num_modules));
  put(out, static_cast<std::int32_t>(meta.config.num_heads));
  put(out, static_cast<std::int32_t>(meta.config.ff_hidden));
  put(out, static_cast<std::int64_t>(meta.episode));
  put(out, adam.learning_rate);
  put(out, adam.beta1);
  put(out, adam.beta2);
  put(out, adam.epsilon);
  put(out, adam.epoch_decay_factor);
  put(out, static_cast<std::int64_t>(adam.step_count));
  put(out, static_cast<std::int64_t>(adam.rejected_steps));
  put(out, static_cast<std::uint32_t>(store.size()));
  for (int i = 0; i < store.size(); ++i) {
    const auto& p = store.at(i);
    put(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put(out, static_cast<std::int32_t>(p.value.rows()));
    put(out, static_cast<std::int32_t>(p.value.cols()));
    put_array(out, p.value);
    put_array(out, p.moment1);
    put_array(out, p.moment2);
  }
  if (!out) throw IoError("write failed for " + path);
}

template <typename T>
void load_checkpoint(const std::string& path, ParameterStore<T>& store, AdamState& adam,
                     CheckpointMeta& meta) {
  using namespace ckpt_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a checkpoint file: " + path);
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw IoError("checkpoint version mismatch: " + std::to_string(version));
  const auto scalar_bytes = get<std::uint8_t>(in);
  if (scalar_bytes != sizeof(T))
    throw IoError("checkpoint precision mismatch: stored " + std::to_string(scalar_bytes) +
                  "-byte scalars, expected " + std::to_string(sizeof(T)));
  meta.config.kind = get<std::uint8_t>(in) ? ProblemKind::Cvrp : ProblemKind::Tsp;
  meta.config.embedding_dim = get<std::int32_t>(in);
  meta.config.num_modules = get<std::int32_t>(in);
  meta.config.num_heads = get<std::int32_t>(in);
  meta.config.ff_hidden = get<std::int32_t>(in);
  meta.episode = get<std::int64_t>(in);
  adam.learning_rate = get<double>(in);
  adam.beta1 = get<double>(in);
  adam.beta2 = get<double>(in);
  adam.epsilon = get<double>(in);
  adam.epoch_decay_factor = get<double>(in);
  adam.step_count = get<std::int64_t>(in);
  adam.rejected_steps = get<std::int64_t>(in);
  const auto count = get<std::uint32_t>(in);
  store = ParameterStore<T>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = get<std::int32_t>(in);
    const auto cols = get<std::int32_t>(in);
    const int idx = store.add(name, rows, cols);
    auto& p = store.at(idx);
    get_array(in, p.value);
    get_array(in, p.moment1);
    get_array(in, p.moment2);
  }
}

// Reads only the stored scalar width, so callers can pick the right
// ParameterStore precision before loading.
inline int checkpoint_scalar_bytes(const std::string& path) {
  using namespace ckpt_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a checkpoint file: " + path);
  get<std::uint32_t>(in);
  return get<std::uint8_t>(in);
}

}  // namespace sila

#endif
