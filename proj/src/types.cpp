#include "closure/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace closure {

double sparse_dot(const SparseVec& v, const std::vector<double>& dense) {
    double s = 0.0;
    for (const auto& e : v) s += e.value * dense[static_cast<std::size_t>(e.index)];
    return s;
}

SparseVec sparsify(const std::vector<double>& dense, double drop_tol) {
    SparseVec out;
    for (int j = 0; j < static_cast<int>(dense.size()); ++j) {
        double v = dense[static_cast<std::size_t>(j)];
        if (std::abs(v) > drop_tol) out.push_back({j, v});
    }
    return out;
}

std::vector<double> densify(const SparseVec& v, int n) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (const auto& e : v) {
        if (e.index < 0 || e.index >= n)
            throw ContractViolation("sparse index " + std::to_string(e.index) +
                                    " outside dimension " + std::to_string(n));
        out[static_cast<std::size_t>(e.index)] = e.value;
    }
    return out;
}

void sort_sparse(SparseVec& v) {
    std::sort(v.begin(), v.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
}

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<SparseVec> row_data)
    : rows_(rows), cols_(cols), row_data_(std::move(row_data)) {
    if (static_cast<int>(row_data_.size()) != rows)
        throw ContractViolation("row data does not match the stated row count");
    col_data_.resize(static_cast<std::size_t>(cols));
    for (int i = 0; i < rows_; ++i) {
        sort_sparse(row_data_[static_cast<std::size_t>(i)]);
        for (const auto& e : row_data_[static_cast<std::size_t>(i)]) {
            if (e.index < 0 || e.index >= cols)
                throw ContractViolation("matrix entry outside the column range");
            col_data_[static_cast<std::size_t>(e.index)].push_back({i, e.value});
        }
    }
}

double SparseMatrix::coeff(int i, int j) const {
    for (const auto& e : row_data_[static_cast<std::size_t>(i)])
        if (e.index == j) return e.value;
    return 0.0;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

HashStream& HashStream::add_bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h_ ^= p[i];
        h_ *= 0x100000001b3ull;
    }
    return *this;
}

HashStream& HashStream::add(uint64_t v) { return add_bytes(&v, sizeof v); }

HashStream& HashStream::add(double v) {
    if (v == 0.0) v = 0.0;  // collapse -0.0
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return add(bits);
}

HashStream& HashStream::add(const std::string& s) {
    add(static_cast<uint64_t>(s.size()));
    return add_bytes(s.data(), s.size());
}

uint64_t derive_seed(uint64_t base, const std::string& tag, uint64_t index) {
    HashStream h;
    h.add(base).add(tag).add(index);
    return splitmix64(h.value());
}

}  // namespace closure
