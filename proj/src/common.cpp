#include "ringmps/common.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace ringmps {

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  std::size_t nworkers = threads < 1 ? 1 : static_cast<std::size_t>(threads);
  nworkers = std::min(nworkers, count);
  if (nworkers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nworkers);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < nworkers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t hash_bytes(const std::string& s, std::uint64_t seed) {
  return fnv1a(s.data(), s.size(), seed);
}

std::uint64_t hash_matrix(const Matrix& m, std::uint64_t seed) {
  std::string repr;
  repr.reserve(static_cast<std::size_t>(m.size()) * 16);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      repr += format_g17(m(i, j).real());
      repr += ',';
      repr += format_g17(m(i, j).imag());
      repr += ';';
    }
  return hash_bytes(repr, seed);
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace ringmps
