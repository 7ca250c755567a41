#ifndef LUNGLINE_UTIL_HPP
#define LUNGLINE_UTIL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lungline {

// FNV-1a, 64-bit. Used to fingerprint tensor payloads (frozen-backbone
// checks) and to derive per-tensor init streams from parameter names.
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);

// Worker cap for per-image parallel sections: hardware concurrency, bounded
// by the LUNGLINE_THREADS environment variable when set. Always >= 1.
int worker_count();

// Runs fn(i) for i in [0,n) across worker_count() threads. Work items must be
// independent; any item ordering yields identical results by construction.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

std::vector<uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const void* data, size_t len);

}  // namespace lungline

#endif  // LUNGLINE_UTIL_HPP
