#ifndef SILA_TENSOR_HPP
#define SILA_TENSOR_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <new>
#include <vector>

#include "sila/error.hpp"

namespace sila {

// Exact accounting of live tensor bytes. Every Array2 allocation and free is
// recorded here, which makes peak activation measurements deterministic and
// allocator-independent. Measurement runs are single-threaded.
struct AllocationLedger {
  long long current_bytes = 0;
  long long peak_bytes = 0;
  bool enabled = false;

  void reset() { current_bytes = peak_bytes = 0; }
  void on_alloc(long long bytes) {
    if (!enabled) return;
    current_bytes += bytes;
    if (current_bytes > peak_bytes) peak_bytes = current_bytes;
  }
  void on_free(long long bytes) {
    if (!enabled) return;
    current_bytes -= bytes;
  }
  static AllocationLedger& instance() {
    static AllocationLedger ledger;
    return ledger;
  }
};

// 64-byte-aligned allocator for tensor buffers. Eigen's vectorized kernels
// peel unaligned heads, so summation order — and therefore the low bits of
// reductions — would otherwise depend on where the allocator happened to
// place the buffer. Fixing the alignment makes every run bit-reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
  template <typename U>
  bool operator!=(const AlignedAllocator<U>&) const {
    return false;
  }
};

// Dense row-major 2-D array backed by a flat buffer. Heavy math goes through
// Eigen maps; ownership stays here so the allocation ledger sees every buffer.
template <typename T>
class Array2 {
public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<Mat>;
  using ConstMap = Eigen::Map<const Mat>;

  Array2() = default;
  Array2(int rows, int cols) { resize(rows, cols); }

  Array2(const Array2& other) : rows_(other.rows_), cols_(other.cols_), data_(other.data_) {
    AllocationLedger::instance().on_alloc(bytes());
  }
  Array2(Array2&& other) noexcept
      : rows_(other.rows_), cols_(other.cols_), data_(std::move(other.data_)) {
    other.rows_ = other.cols_ = 0;
  }
  Array2& operator=(const Array2& other) {
    if (this != &other) {
      release();
      rows_ = other.rows_;
      cols_ = other.cols_;
      data_ = other.data_;
      AllocationLedger::instance().on_alloc(bytes());
    }
    return *this;
  }
  Array2& operator=(Array2&& other) noexcept {
    if (this != &other) {
      release();
      rows_ = other.rows_;
      cols_ = other.cols_;
      data_ = std::move(other.data_);
      other.rows_ = other.cols_ = 0;
    }
    return *this;
  }
  ~Array2() { release(); }

  void resize(int rows, int cols) {
    if (rows < 0 || cols < 0) throw ShapeError("Array2: negative dimension");
    release();
    rows_ = rows;
    cols_ = cols;
    data_.assign(static_cast<std::size_t>(rows) * cols, T(0));
    AllocationLedger::instance().on_alloc(bytes());
  }

  // Frees the buffer; the array becomes 0x0.
  void clear() {
    release();
    rows_ = cols_ = 0;
    data_.clear();
    data_.shrink_to_fit();
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  long long bytes() const {
    return static_cast<long long>(data_.size()) * static_cast<long long>(sizeof(T));
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  T operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  Map map() { return Map(data_.data(), rows_, cols_); }
  ConstMap map() const { return ConstMap(data_.data(), rows_, cols_); }

  static Array2 from(const Mat& m) {
    Array2 a(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    a.map() = m;
    return a;
  }

  bool all_finite() const {
    for (const T v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

private:
  void release() {
    AllocationLedger::instance().on_free(bytes());
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T, AlignedAllocator<T>> data_;
};

}  // namespace sila

#endif
