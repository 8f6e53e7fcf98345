#include "qmt/domain.hpp"

#include <stdexcept>

namespace qmt {

void DomainDescription::validate() const {
    if (dim == 0) throw std::invalid_argument("domain dimension must be positive");
    if (compact && !box) throw std::invalid_argument("compact domain requires a bounding box");
    if (box && box->size() != dim) throw std::invalid_argument("box size does not match dimension");
    if (box)
        for (const auto& [lo, hi] : *box)
            if (lo > hi) throw std::invalid_argument("empty box interval");
    for (const auto& g : constraints)
        if (g.nvars() != dim)
            throw std::invalid_argument("domain constraint has wrong variable count");
}

}  // namespace qmt
