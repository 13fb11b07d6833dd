#pragma once

#include <stdexcept>
#include <string>

namespace hyperhier {

// Malformed content in a file we tried to parse (tree, checkpoint, samples).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A named input path that does not exist.
struct FileMissingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Read/write failures other than missing inputs.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A cross-check the pipeline performs on its own results failed; indicates a
// bug, not bad user input.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace hyperhier
