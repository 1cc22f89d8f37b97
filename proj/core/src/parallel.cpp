#include "heatmoment/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace heatmoment {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  engine_.seed(seq);
}

std::size_t block_count(std::size_t total, std::size_t block_size) noexcept {
  return block_size == 0 ? 0 : (total + block_size - 1) / block_size;
}

void for_each_block(std::size_t total, std::size_t block_size, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t blocks = block_count(total, block_size);
  if (blocks == 0) return;
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));

  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    body(b, begin, std::min(total, begin + block_size));
  };

  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
        try {
          run_block(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

double RunningStats::stderr_of_mean() const noexcept {
  return count > 1.0 ? std::sqrt(variance() / count) : 0.0;
}

RunningStats RunningStats::merge(const RunningStats& a, const RunningStats& b) noexcept {
  if (a.count == 0.0) return b;
  if (b.count == 0.0) return a;
  RunningStats out;
  out.count = a.count + b.count;
  const double delta = b.mean - a.mean;
  out.mean = a.mean + delta * (b.count / out.count);
  out.m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / out.count);
  return out;
}

RunningStats pairwise_merge(std::span<const RunningStats> parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts[0];
  const std::size_t half = parts.size() / 2;
  return RunningStats::merge(pairwise_merge(parts.first(half)), pairwise_merge(parts.subspan(half)));
}

double pairwise_sum(std::span<const double> parts) {
  if (parts.empty()) return 0.0;
  if (parts.size() == 1) return parts[0];
  const std::size_t half = parts.size() / 2;
  return pairwise_sum(parts.first(half)) + pairwise_sum(parts.subspan(half));
}

}  // namespace heatmoment
