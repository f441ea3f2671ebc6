#pragma once

#include <stdexcept>
#include <string>

namespace exchmine {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad file contents: unparsable line, unknown label. Carries a line number
// where one is known.
struct ParseError : Error {
    using Error::Error;
};

// Well-formed input with an illegal value (non-0/1 cell, duplicate item,
// p-value outside (0,1]).
struct ValueError : Error {
    using Error::Error;
};

// Dimension mismatch between two datasets.
struct ShapeError : Error {
    using Error::Error;
};

// API misuse: violated precondition, missing required argument.
struct UsageError : Error {
    using Error::Error;
};

}  // namespace exchmine
