#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "mixrank/errors.hpp"
#include "mixrank/tensor_train.hpp"

namespace mixrank {

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw StructureError("container: truncated stream");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw StructureError("container: truncated stream");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline double get_f64(std::istream& is) {
    const std::uint64_t bits = get_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace detail

/// One named dense tensor inside the record container.
struct NamedTensor {
    std::string name;
    std::vector<std::int64_t> dims;
    std::vector<double> data;
};

// Record container: "MXTC", version, record count, then per record the name,
// the dimensions and the row-major float64 payload. All integers and floats
// little-endian.
inline void save_tensor_records(const std::string& path, const std::vector<NamedTensor>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw StructureError("save_tensor_records: cannot open " + path);
    os.write("MXTC", 4);
    detail::put_u32(os, 1);
    detail::put_u32(os, static_cast<std::uint32_t>(records.size()));
    for (const auto& rec : records) {
        detail::put_u32(os, static_cast<std::uint32_t>(rec.name.size()));
        os.write(rec.name.data(), static_cast<std::streamsize>(rec.name.size()));
        detail::put_u32(os, static_cast<std::uint32_t>(rec.dims.size()));
        std::uint64_t total = 1;
        for (auto d : rec.dims) {
            detail::put_u64(os, static_cast<std::uint64_t>(d));
            total *= static_cast<std::uint64_t>(d);
        }
        if (total != rec.data.size()) throw StructureError("save_tensor_records: dims/data mismatch");
        for (double v : rec.data) detail::put_f64(os, v);
    }
    if (!os) throw StructureError("save_tensor_records: write failed");
}

inline std::vector<NamedTensor> load_tensor_records(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw StructureError("load_tensor_records: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MXTC", 4) != 0)
        throw StructureError("load_tensor_records: bad magic");
    if (detail::get_u32(is) != 1) throw StructureError("load_tensor_records: unsupported version");
    const std::uint32_t count = detail::get_u32(is);
    std::vector<NamedTensor> records(count);
    for (auto& rec : records) {
        const std::uint32_t name_len = detail::get_u32(is);
        rec.name.resize(name_len);
        is.read(rec.name.data(), name_len);
        const std::uint32_t ndims = detail::get_u32(is);
        rec.dims.resize(ndims);
        std::uint64_t total = 1;
        for (auto& d : rec.dims) {
            d = static_cast<std::int64_t>(detail::get_u64(is));
            total *= static_cast<std::uint64_t>(d);
        }
        rec.data.resize(total);
        for (auto& v : rec.data) v = detail::get_f64(is);
    }
    return records;
}

// Train container: "MXTT", version, m, element type (1 = little-endian
// float64), the full rank vector, the mode dimensions, then the cores in
// order, each row-major over (left, mode, right). Round-trips bit-exactly.
inline void save_tt(const std::string& path, const TTTrain& train) {
    train.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw StructureError("save_tt: cannot open " + path);
    os.write("MXTT", 4);
    detail::put_u32(os, 1);
    detail::put_u32(os, static_cast<std::uint32_t>(train.order()));
    detail::put_u32(os, 1); // element type: f64 little-endian
    for (int r : train.ranks()) detail::put_u64(os, static_cast<std::uint64_t>(r));
    for (auto n : train.mode_dims()) detail::put_u64(os, static_cast<std::uint64_t>(n));
    for (const auto& core : train.cores)
        for (double v : core.data) detail::put_f64(os, v);
    if (!os) throw StructureError("save_tt: write failed");
}

inline TTTrain load_tt(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw StructureError("load_tt: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MXTT", 4) != 0) throw StructureError("load_tt: bad magic");
    if (detail::get_u32(is) != 1) throw StructureError("load_tt: unsupported version");
    const std::uint32_t m = detail::get_u32(is);
    if (detail::get_u32(is) != 1) throw StructureError("load_tt: unsupported element type");
    std::vector<int> ranks(m + 1);
    for (auto& r : ranks) r = static_cast<int>(detail::get_u64(is));
    std::vector<int> dims(m);
    for (auto& n : dims) n = static_cast<int>(detail::get_u64(is));
    TTTrain train;
    for (std::uint32_t j = 0; j < m; ++j) {
        TTCore core(ranks[j], dims[j], ranks[j + 1]);
        for (auto& v : core.data) v = detail::get_f64(is);
        train.cores.push_back(std::move(core));
    }
    train.validate();
    return train;
}

} // namespace mixrank
