#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jfp {

// Malformed input data. `offset` is the position of the failure in the
// source stream (bytes for headers, bits for entropy-coded data; the
// message says which).
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Input uses a feature outside the supported baseline subset. The message
// names the offending marker or mode.
class unsupported_error : public std::runtime_error {
public:
    explicit unsupported_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jfp
