#include "liftbv/core.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace liftbv {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::SingularPoint: return "singular-point";
    case ErrorKind::NearSingular: return "near-singular";
    case ErrorKind::ProjectionFailure: return "projection-failure";
    case ErrorKind::ConstructionFailure: return "construction-failure";
    case ErrorKind::StepTooLarge: return "step-too-large";
    case ErrorKind::NotSameFiber: return "not-same-fiber";
    case ErrorKind::NormalizationFailure: return "normalization-failure";
    case ErrorKind::SelectionFailure: return "selection-failure";
    case ErrorKind::NearJump: return "near-jump";
    case ErrorKind::LiftFailure: return "lift-failure";
    case ErrorKind::RefinementNeeded: return "refinement-needed";
    case ErrorKind::IllPosedLoop: return "ill-posed-loop";
    case ErrorKind::FacetSplit: return "facet-split";
    case ErrorKind::BoundViolation: return "bound-violation";
    case ErrorKind::IngestError: return "ingest-error";
  }
  return "unknown";
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("LIFTBV_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace liftbv
