#include "sila/bench.hpp"

#include <fstream>

namespace sila {

void write_memory_csv(const std::string& path, const MemoryReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "size,variant,peak_bytes,step_ms,out_of_budget\n";
  for (const auto& e : report.entries)
    out << e.size << ',' << report.variant << ',' << e.peak_bytes << ',' << e.step_ms << ','
        << (e.out_of_budget ? 1 : 0) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

void write_profile_csv(const std::string& path, const ProbProfile& profile) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "bucket,mean_probability,step_count\n";
  out.precision(17);
  for (std::size_t b = 0; b < profile.bucket_mean.size(); ++b)
    out << b << ',' << profile.bucket_mean[b] << ',' << profile.bucket_count[b] << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace sila
