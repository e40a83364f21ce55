#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace closure {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- errors

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, int line)
        : Error("parse error (line " + std::to_string(line) + "): " + msg), line(line) {}
    int line;
};

struct ConversionError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct CollectError : Error {
    using Error::Error;
};

struct LearnError : Error {
    using Error::Error;
};

struct FamilyError : Error {
    using Error::Error;
};

struct MapError : Error {
    using Error::Error;
};

struct OracleRefusal : Error {
    using Error::Error;
};

struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// ---------------------------------------------------------------- sparse

struct SparseEntry {
    int index;
    double value;
    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sorted by index, unique indices, no stored zeros.
using SparseVec = std::vector<SparseEntry>;

double sparse_dot(const SparseVec& v, const std::vector<double>& dense);
SparseVec sparsify(const std::vector<double>& dense, double drop_tol);
std::vector<double> densify(const SparseVec& v, int n);
void sort_sparse(SparseVec& v);

/// Immutable sparse matrix with both row and column access.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int rows, int cols, std::vector<SparseVec> row_data);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const SparseVec& row(int i) const { return row_data_[i]; }
    const SparseVec& col(int j) const { return col_data_[j]; }
    double coeff(int i, int j) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<SparseVec> row_data_;
    std::vector<SparseVec> col_data_;
};

// ---------------------------------------------------------------- hashing

uint64_t splitmix64(uint64_t x);

/// Incremental FNV-1a over raw bytes; doubles hashed by bit pattern.
class HashStream {
public:
    HashStream& add_bytes(const void* data, std::size_t len);
    HashStream& add(uint64_t v);
    HashStream& add(int v) { return add(static_cast<uint64_t>(static_cast<int64_t>(v))); }
    HashStream& add(double v);
    HashStream& add(bool v) { return add(static_cast<uint64_t>(v)); }
    HashStream& add(const std::string& s);
    uint64_t value() const { return h_; }

private:
    uint64_t h_ = 0xcbf29ce484222325ull;
};

/// Derives an independent stream seed from (base, tag, index).
uint64_t derive_seed(uint64_t base, const std::string& tag, uint64_t index);

// ---------------------------------------------------------------- rng

/// mt19937_64 with hand-rolled output mappings; the standard distributions
/// are implementation-defined, these are not.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    /// 53-bit uniform in [0, 1).
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Uniform in {0, ..., n-1}.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(unit() * static_cast<double>(n));
    }

    /// Fisher-Yates, back to front.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 gen_;
};

// ---------------------------------------------------------------- parallel

/// Runs fn(0..count-1) across up to `jobs` threads. Tasks must be
/// independent; the first exception is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex mtx;
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mtx);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace closure
