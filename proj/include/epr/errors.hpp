#pragma once

#include <stdexcept>
#include <string>

namespace epr {

// Error taxonomy shared by the library and the CLI. The CLI maps parse/usage
// problems to exit code 2, data errors (everything deriving from error except
// usage_error) to 3, and anything else to 4.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
struct io_error : error {
  using error::error;
};

// File content does not follow the expected structure (bad magic, version,
// unparsable line, unknown label token).
struct format_error : error {
  using error::error;
};

// Header-declared payload size disagrees with the actual file content.
struct truncation_error : format_error {
  using format_error::format_error;
};

// Data violates a type invariant (non-finite entry, zero-norm row, empty set).
struct validation_error : error {
  using error::error;
};

// An index refers outside its descriptor set.
struct range_error : error {
  using error::error;
};

// Argument outside an operation's domain (probability not in (0,1), dimension
// mismatch, empty sample).
struct domain_error : error {
  using error::error;
};

// Bad command-line flags or route syntax.
struct usage_error : error {
  using error::error;
};

}  // namespace epr
