#pragma once

#include <map>
#include <string>
#include <vector>

#include "r2m/tensor.hpp"

namespace r2m {

// Checkpoint container: an ordered list of named tensors.
//
// File layout: magic "R2M1", u64 tensor count, then per tensor:
//   u64 name length, UTF-8 name bytes, u64 rank, u64 extents[rank],
//   little-endian IEEE-754 f64 payload (row-major).
// Round trips are bit-exact.
struct Checkpoint {
    std::vector<std::pair<std::string, Tensor>> tensors;

    void put(const std::string& name, const Tensor& t);
    void put_scalar(const std::string& name, double v);
    const Tensor* find(const std::string& name) const;
    const Tensor& get(const std::string& name) const;
    double get_scalar(const std::string& name) const;
    bool has(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace r2m
