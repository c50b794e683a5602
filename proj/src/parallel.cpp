#include "manifold_align/parallel.hpp"

#include <atomic>

namespace manifold_align {

namespace {
std::atomic<std::size_t>& workers_setting() {
  static std::atomic<std::size_t> value{std::max(1u, std::thread::hardware_concurrency())};
  return value;
}
}  // namespace

std::size_t worker_count() { return workers_setting().load(); }

void set_worker_count(std::size_t workers) { workers_setting().store(std::max<std::size_t>(1, workers)); }

}  // namespace manifold_align
