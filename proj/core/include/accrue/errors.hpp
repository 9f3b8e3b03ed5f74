#ifndef ACCRUE_ERRORS_HPP_
#define ACCRUE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace accrue {

// malformed input file; carries the 1-based line number when known
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) +
                                           ")"
                                     : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// well-formed input that violates a data invariant
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// not enough data to carry out the requested computation
class InsufficientDataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// optimiser or sampler failure
class FitError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace accrue

#endif  // ACCRUE_ERRORS_HPP_
