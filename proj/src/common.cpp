#include "corridor/common.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "corridor/parallel.hpp"

namespace corridor {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GradientUndefined: return "GradientUndefined";
    case ErrorKind::EmptyChord: return "EmptyChord";
    case ErrorKind::SeedOutside: return "SeedOutside";
    case ErrorKind::SeedOutsideDomain: return "SeedOutsideDomain";
    case ErrorKind::SegmentInCollision: return "SegmentInCollision";
    case ErrorKind::SamplingExhausted: return "SamplingExhausted";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::IkFailed: return "IkFailed";
    case ErrorKind::NoPath: return "NoPath";
    case ErrorKind::AlreadyAtGoal: return "AlreadyAtGoal";
    case ErrorKind::InfeasibleEndpoint: return "InfeasibleEndpoint";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {
std::atomic<std::size_t> g_thread_override{0};

std::size_t default_threads() {
  if (const char* env = std::getenv("CORRIDOR_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}
}  // namespace

std::size_t worker_threads() {
  const std::size_t o = g_thread_override.load();
  if (o > 0) return o;
  static const std::size_t cached = default_threads();
  return cached;
}

void set_worker_threads(std::size_t n) { g_thread_override.store(n); }

}  // namespace corridor
