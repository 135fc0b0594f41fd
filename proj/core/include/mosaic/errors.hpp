#pragma once

#include <stdexcept>
#include <string>

namespace mosaic {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data (bad CSV row, unparseable number, ...).
struct ParseError : Error {
    using Error::Error;
};

// Structurally valid input that violates an integrity constraint
// (duplicate dates, window/series mismatch, ...).
struct IntegrityError : Error {
    using Error::Error;
};

// Value outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Bad or inconsistent configuration.
struct ConfigError : Error {
    using Error::Error;
};

// An expert failed to produce an opinion (wraps the cause).
struct ExpertError : Error {
    using Error::Error;
};

// Failure talking to an LLM backend (transport, exhausted retries).
struct TransportError : Error {
    using Error::Error;
};

// The backend answered but the answer could not be decoded.
struct AnswerParseError : Error {
    using Error::Error;
};

}  // namespace mosaic
