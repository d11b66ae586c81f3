#include "xmodal/types.hpp"

#include <cmath>
#include <string>

namespace xmodal {

double SparseVector::norm() const {
    double sumsq = 0.0;
    for (const SparseEntry& e : entries) {
        sumsq += static_cast<double>(e.weight) * static_cast<double>(e.weight);
    }
    return std::sqrt(sumsq);
}

void SparseVector::check_invariants() const {
    uint32_t prev = 0;
    bool first = true;
    for (const SparseEntry& e : entries) {
        if (e.index >= dim) {
            throw DimensionError("sparse entry index " + std::to_string(e.index) +
                                 " out of range for dim " + std::to_string(dim));
        }
        if (!first && e.index <= prev) {
            throw DomainError("sparse entry indices not strictly increasing at index " +
                              std::to_string(e.index));
        }
        if (!(e.weight > 0.0f)) {
            throw DomainError("sparse entry weight must be positive at index " +
                              std::to_string(e.index));
        }
        prev = e.index;
        first = false;
    }
}

}  // namespace xmodal
