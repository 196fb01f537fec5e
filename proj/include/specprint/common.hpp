#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace specprint {

inline constexpr int kVersionMajor = 0;
inline constexpr int kVersionMinor = 1;

inline std::string version_string() { return "0.1.0"; }

// Malformed or truncated byte stream. Carries the offset of the first
// byte that could not be consumed.
class format_error : public std::runtime_error {
public:
    format_error(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_ = 0;
};

// Dimension/size mismatches: crops larger than the image, periods that do
// not divide the image size, zero-sized grids.
class geometry_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside its declared contract (even crop size, bad quality
// factor, nonpositive bin mean, ...).
class contract_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input that makes the requested statistic meaningless, e.g. a
// zero-variance image fed to a std-normalized profile.
class degenerate_input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem / subprocess failures.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace specprint
