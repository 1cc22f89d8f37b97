#pragma once

// Block-parallel Monte Carlo plumbing. Work is cut into fixed-size blocks;
// block b always draws from RNG stream (seed, b) and writes its partial
// result into slot b, and slots are combined by a fixed pairwise tree. The
// output therefore depends on (seed, block size) only, never on the number
// of worker threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace heatmoment {

inline constexpr std::size_t kDefaultBlockSize = 4096;

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Runs body(block, begin, end) for every block of [0, total). threads == 0
// means hardware concurrency.
void for_each_block(std::size_t total, std::size_t block_size, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

std::size_t block_count(std::size_t total, std::size_t block_size) noexcept;

// Count, mean and centered sum of squares; merged with Chan's update.
struct RunningStats {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) noexcept {
    count += 1.0;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  double variance() const noexcept { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
  double stderr_of_mean() const noexcept;

  static RunningStats merge(const RunningStats& a, const RunningStats& b) noexcept;
};

// Deterministic pairwise reduction over the block results in index order.
RunningStats pairwise_merge(std::span<const RunningStats> parts);
double pairwise_sum(std::span<const double> parts);

}  // namespace heatmoment
