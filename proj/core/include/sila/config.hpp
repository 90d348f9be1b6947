#ifndef SILA_CONFIG_HPP
#define SILA_CONFIG_HPP

#include "sila/error.hpp"
#include "sila/instance.hpp"

namespace sila {

struct ModelConfig {
  int embedding_dim = 128;   // d
  int num_modules = 6;       // L stacked linear attention modules
  int num_heads = 8;
  int ff_hidden = 512;
  ProblemKind kind = ProblemKind::Tsp;

  void validate() const {
    if (embedding_dim <= 0 || num_modules <= 0 || num_heads <= 0 || ff_hidden <= 0)
      throw InvalidArgument("ModelConfig: all dimensions must be positive");
    if (embedding_dim % num_heads != 0)
      throw InvalidArgument("ModelConfig: embedding_dim must be divisible by num_heads");
  }

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace sila

#endif
