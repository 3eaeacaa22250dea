#pragma once

#include <functional>
#include <stdexcept>

namespace respotopt {

inline constexpr const char* kVersion = "0.1.0";

// Raised when a linear solve cannot be completed (indefinite stiffness,
// usually missing Dirichlet constraints).
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a load profile does no work on its own solution and a
// compliance ratio / blocking amplitude is undefined.
struct DegenerateLoad : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Worker-thread cap for element-parallel loops; reads RESPOTOPT_THREADS once.
int thread_cap();

// Runs fn(begin, end) over [0, n) split into contiguous chunks. Chunking is a
// pure function of n and thread_cap(), so results that write disjoint slots
// are identical for any thread count.
void parallel_for(int n, const std::function<void(int, int)>& fn);

}  // namespace respotopt
