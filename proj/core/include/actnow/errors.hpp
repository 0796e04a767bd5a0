#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace actnow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class NonFiniteEntry : public Error {
public:
    NonFiniteEntry(std::size_t row, std::size_t col)
        : Error("non-finite entry at row " + std::to_string(row) + ", col " +
                std::to_string(col)),
          row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class RangeTooShort : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class NonSequential : public Error {
public:
    using Error::Error;
};

/// A read touched a time index newer than the latest ingested one.
class LeakageAttempt : public Error {
public:
    LeakageAttempt(std::int64_t requested, std::int64_t now)
        : Error("leakage attempt: read of t=" + std::to_string(requested) +
                " while now=" + std::to_string(now)),
          requested_(requested), now_(now) {}

    std::int64_t requested() const noexcept { return requested_; }
    std::int64_t now() const noexcept { return now_; }

private:
    std::int64_t requested_;
    std::int64_t now_;
};

class Evicted : public Error {
public:
    using Error::Error;
};

/// Non-finite loss, activation, gradient or parameter.
class Divergence : public Error {
public:
    using Error::Error;
};

} // namespace actnow
