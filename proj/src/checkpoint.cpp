#include "r2m/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "r2m/errors.hpp"

namespace r2m {

namespace {

constexpr char kMagic[4] = {'R', '2', 'M', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is, const std::string& what) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw DataError("checkpoint: truncated while reading " + what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(os, bits);
}

double read_f64(std::istream& is, const std::string& what) {
    std::uint64_t bits = read_u64(is, what);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

} // namespace

void Checkpoint::put(const std::string& name, const Tensor& t) {
    Tensor copy = t;
    copy.grad.clear();
    tensors.emplace_back(name, std::move(copy));
}

void Checkpoint::put_scalar(const std::string& name, double v) {
    tensors.emplace_back(name, Tensor({1}, {v}));
}

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
        if (n == name) return &t;
    }
    return nullptr;
}

const Tensor& Checkpoint::get(const std::string& name) const {
    const Tensor* t = find(name);
    if (!t) throw DataError("checkpoint: missing tensor '" + name + "'");
    return *t;
}

double Checkpoint::get_scalar(const std::string& name) const {
    const Tensor& t = get(name);
    if (t.numel() != 1) {
        throw DataError("checkpoint: tensor '" + name + "' is not a scalar");
    }
    return t.data[0];
}

bool Checkpoint::has(const std::string& name) const { return find(name) != nullptr; }

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_u64(os, ckpt.tensors.size());
    for (const auto& [name, t] : ckpt.tensors) {
        write_u64(os, name.size());
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u64(os, t.shape.size());
        for (int e : t.shape) write_u64(os, static_cast<std::uint64_t>(e));
        for (double v : t.data) write_f64(os, v);
    }
    if (!os) throw DataError("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("checkpoint: bad magic in '" + path + "'");
    }
    Checkpoint ckpt;
    const std::uint64_t count = read_u64(is, "tensor count");
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t name_len = read_u64(is, "name length");
        std::string name(name_len, '\0');
        is.read(name.data(), static_cast<std::streamsize>(name_len));
        if (!is) throw DataError("checkpoint: truncated name in '" + path + "'");
        const std::uint64_t rank = read_u64(is, "rank");
        std::vector<int> shape;
        for (std::uint64_t r = 0; r < rank; ++r) {
            shape.push_back(static_cast<int>(read_u64(is, "extent")));
        }
        const std::size_t n = shape_numel(shape);
        std::vector<double> data(n);
        for (std::size_t j = 0; j < n; ++j) data[j] = read_f64(is, "payload");
        ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    return ckpt;
}

} // namespace r2m
