#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrtc/nn/tensor.hpp"

namespace lrtc::nn {

struct NamedTensor {
    std::string name;
    Tensor value;

    bool operator==(const NamedTensor &) const = default;
};

// Tensor bundle file:
//   8 bytes  magic "LRTCTNS"
//   u32 LE   format version
//   u64 LE   manifest length in bytes
//   manifest UTF-8 JSON {"meta": ..., "tensors": [{"name", "shape", "offset"}]}
//   payload  float64 little-endian values, offsets counted in values
inline constexpr char kBundleMagic[8] = {'M', 'I', 'L', 'M', 'O', 'T', 'N', 'S'};
inline constexpr std::uint32_t kBundleVersion = 1;

namespace detail {

template <typename U>
void put_le(std::ostream &out, U v) {
    unsigned char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char *>(buf), sizeof(U));
}

template <typename U>
U get_le(std::istream &in) {
    unsigned char buf[sizeof(U)];
    if (!in.read(reinterpret_cast<char *>(buf), sizeof(U))) throw InvalidDataset("truncated tensor bundle");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
}

}  // namespace detail

inline void save_bundle(const std::string &path, const nlohmann::json &meta, const std::vector<NamedTensor> &tensors) {
    nlohmann::json manifest;
    manifest["meta"] = meta;
    manifest["tensors"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto &t : tensors) {
        manifest["tensors"].push_back({{"name", t.name}, {"shape", t.value.shape()}, {"offset", offset}});
        offset += t.value.size();
    }
    const std::string text = manifest.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidDataset("cannot write " + path);
    out.write(kBundleMagic, sizeof(kBundleMagic));
    detail::put_le<std::uint32_t>(out, kBundleVersion);
    detail::put_le<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto &t : tensors) {
        for (double v : t.value.values()) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    if (!out) throw InvalidDataset("write failed for " + path);
}

struct Bundle {
    nlohmann::json meta;
    std::vector<NamedTensor> tensors;

    const Tensor &get(const std::string &name) const {
        for (const auto &t : tensors) {
            if (t.name == name) return t.value;
        }
        throw InvalidDataset("bundle has no tensor '" + name + "'");
    }
};

inline Bundle load_bundle(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidDataset("cannot open " + path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kBundleMagic, 8) != 0) {
        throw InvalidDataset(path + ": not a tensor bundle");
    }
    const auto version = detail::get_le<std::uint32_t>(in);
    if (version != kBundleVersion) throw InvalidDataset(path + ": unsupported version " + std::to_string(version));
    const auto len = detail::get_le<std::uint64_t>(in);
    std::string text(len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw InvalidDataset("truncated tensor bundle");
    const auto manifest = nlohmann::json::parse(text);

    Bundle b;
    b.meta = manifest.at("meta");
    for (const auto &entry : manifest.at("tensors")) {
        Shape shape = entry.at("shape").get<Shape>();
        std::vector<double> data(shape_size(shape));
        for (double &v : data) v = std::bit_cast<double>(detail::get_le<std::uint64_t>(in));
        b.tensors.push_back({entry.at("name").get<std::string>(), Tensor(std::move(shape), std::move(data))});
    }
    return b;
}

}  // namespace lrtc::nn
