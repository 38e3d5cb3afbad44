#pragma once

#include <stdexcept>
#include <string>

namespace kdvbs {

// Thrown when an iterative procedure fails to reach its tolerance within the
// allowed number of iterations (kernel series, succession, nonlinear inner loop,
// eigenvalue search).
class NoConvergenceError : public std::runtime_error {
public:
    explicit NoConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by the simulator when the discrete energy exceeds the blowup guard.
class BlowupError : public std::runtime_error {
public:
    explicit BlowupError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace kdvbs
