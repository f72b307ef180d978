#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sslac/ndarray.hpp"

namespace sslac {

// Malformed IDX input; carries the byte offset where parsing failed.
class IdxError : public std::runtime_error {
public:
    IdxError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Decodes an IDX byte stream (magic 00 00 08 <ndim>, big-endian u32 dims,
// row-major unsigned-byte payload) into an NdArray of values in [0, 255].
// Supports 1 to 4 dimensions.
NdArray parse_idx(const std::vector<std::uint8_t>& bytes);

// Inverse of parse_idx; every value must be an integer in [0, 255].
std::vector<std::uint8_t> serialize_idx(const NdArray& array);

NdArray load_idx_file(const std::string& path);

}  // namespace sslac
