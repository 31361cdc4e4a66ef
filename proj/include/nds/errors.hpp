#pragma once

#include <stdexcept>
#include <string>

namespace nds {

// Error taxonomy mirrors the CLI exit codes: config 1, io 2, numeric 3.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters, empty inputs, contradictory option combinations.
class config_error : public error {
public:
    using error::error;
};

class io_error : public error {
public:
    using error::error;
};

// Bad magic, malformed document, header fields out of range.
class format_error : public io_error {
public:
    using io_error::io_error;
};

// File length disagrees with what the header promises.
class corruption_error : public io_error {
public:
    using io_error::io_error;
};

class version_error : public io_error {
public:
    using io_error::io_error;
};

// Manifest digest no longer matches the feature file.
class digest_error : public io_error {
public:
    using io_error::io_error;
};

// Non-finite results, failed factorizations, undefined metrics.
class numeric_error : public error {
public:
    using error::error;
};

}  // namespace nds
