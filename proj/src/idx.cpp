#include "sslac/idx.hpp"

#include <cmath>
#include <fstream>

namespace sslac {

namespace {

std::uint32_t read_be_u32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

}  // namespace

NdArray parse_idx(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) {
        throw IdxError("IDX header truncated", bytes.size());
    }
    if (bytes[0] != 0 || bytes[1] != 0) {
        throw IdxError("bad IDX magic: first two bytes must be zero", bytes[0] != 0 ? 0 : 1);
    }
    if (bytes[2] != 0x08) {
        throw IdxError("unsupported IDX type code 0x" + std::to_string(bytes[2]) +
                           " (only unsigned byte 0x08 is supported)",
                       2);
    }
    const std::size_t ndim = bytes[3];
    if (ndim == 0 || ndim > 4) {
        throw IdxError("IDX dimension count must be 1..4, got " + std::to_string(ndim), 3);
    }
    const std::size_t header_size = 4 + 4 * ndim;
    if (bytes.size() < header_size) {
        throw IdxError("IDX dimension table truncated", bytes.size());
    }

    std::vector<std::size_t> shape(ndim);
    std::size_t expected = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
        shape[i] = read_be_u32(bytes, 4 + 4 * i);
        expected *= shape[i];
    }

    const std::size_t payload = bytes.size() - header_size;
    if (payload != expected) {
        throw IdxError("IDX payload length " + std::to_string(payload) +
                           " does not match declared shape " + NdArray::shape_string(shape) +
                           " (" + std::to_string(expected) + " elements)",
                       header_size + std::min(payload, expected));
    }

    NdArray out(shape);
    for (std::size_t i = 0; i < expected; ++i) {
        out[i] = static_cast<double>(bytes[header_size + i]);
    }
    return out;
}

std::vector<std::uint8_t> serialize_idx(const NdArray& array) {
    const std::size_t ndim = array.ndim();
    if (ndim == 0 || ndim > 4) {
        throw std::invalid_argument("serialize_idx: dimension count must be 1..4");
    }
    std::vector<std::uint8_t> out;
    out.reserve(4 + 4 * ndim + array.size());
    out.push_back(0);
    out.push_back(0);
    out.push_back(0x08);
    out.push_back(static_cast<std::uint8_t>(ndim));
    for (std::size_t i = 0; i < ndim; ++i) {
        std::uint32_t d = static_cast<std::uint32_t>(array.dim(i));
        out.push_back(static_cast<std::uint8_t>(d >> 24));
        out.push_back(static_cast<std::uint8_t>(d >> 16));
        out.push_back(static_cast<std::uint8_t>(d >> 8));
        out.push_back(static_cast<std::uint8_t>(d));
    }
    for (std::size_t i = 0; i < array.size(); ++i) {
        double v = array[i];
        if (v < 0.0 || v > 255.0 || v != std::floor(v)) {
            throw std::invalid_argument("serialize_idx: value at index " + std::to_string(i) +
                                        " is not an integer in [0, 255]");
        }
        out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

NdArray load_idx_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open IDX file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return parse_idx(bytes);
    } catch (const IdxError& e) {
        throw IdxError(path + ": " + e.what(), e.offset());
    }
}

}  // namespace sslac
