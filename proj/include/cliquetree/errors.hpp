#ifndef CLIQUETREE_ERRORS_HPP
#define CLIQUETREE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cliquetree {

// Bad input data or configuration supplied by the caller. CLI exit code 2.
class UserError : public std::runtime_error {
  public:
    explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

// No threshold gives every train/test row positive probability. CLI exit code 3.
class InfeasibleError : public std::runtime_error {
  public:
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

// An internal invariant failed; indicates a bug, not a usage error. CLI exit code 4.
class InternalError : public std::logic_error {
  public:
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace cliquetree

#endif  // CLIQUETREE_ERRORS_HPP
