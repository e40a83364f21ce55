#pragma once

#include <optional>
#include <string>

#include "closure/types.hpp"

namespace closure {

enum class CutSpace { standard, original };

struct CutOrigin {
    std::string instance_id;
    std::optional<uint64_t> basis_hash;
    std::optional<int> row_index;
};

/// A >= inequality. In standard-form space all coefficients are >= 0 and
/// rhs is 1 (GMIC shape); in original space it is a general inequality.
struct Cut {
    SparseVec coeffs;
    double rhs = 1.0;
    CutSpace space = CutSpace::standard;
    std::optional<CutOrigin> origin;
};

/// Deduplication key: indices plus coefficients and rhs rounded to
/// 12 significant digits. Different lambdas yielding the same cut collide.
uint64_t cut_dedup_hash(const Cut& cut);

/// {coeffs: [[index, value]...], rhs, space, origin}
std::string cut_to_json_string(const Cut& cut);
Cut cut_from_json_string(const std::string& text);

}  // namespace closure
