#include "fsm/mc.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace fsm::mc {

McEstimate reduce(const std::vector<std::complex<double>>& samples) {
  McEstimate e;
  e.n = samples.size();
  if (e.n == 0) return e;
  Kahan re, im;
  for (const auto& z : samples) {
    re.add(z.real());
    im.add(z.imag());
  }
  e.mean = {re.value() / static_cast<double>(e.n), im.value() / static_cast<double>(e.n)};
  if (e.n >= 2) {
    Kahan dev;
    for (const auto& z : samples) {
      const double dr = z.real() - e.mean.real();
      const double di = z.imag() - e.mean.imag();
      dev.add(dr * dr + di * di);
    }
    e.stderr_ = std::sqrt(dev.value() / (static_cast<double>(e.n) * static_cast<double>(e.n - 1)));
  }
  return e;
}

void parallel_for(std::uint64_t n, int workers, const std::function<void(std::uint64_t)>& fn) {
  if (workers < 1) workers = 1;
  if (workers == 1 || n < 2) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
}

}  // namespace fsm::mc
