#pragma once

#include <optional>
#include <vector>

#include "qmt/polynomial.hpp"

namespace qmt {

// Basic closed domain X = box /\ {g >= 0 for g in constraints}. A box with
// compact=false is a sampling window only (X may extend beyond it); the
// compact flag is allowed only when a box is present.
struct DomainDescription {
    std::size_t dim = 1;
    std::vector<Polynomial> constraints;  // over the dim base variables
    std::optional<std::vector<std::pair<Rational, Rational>>> box;
    bool compact = false;

    void validate() const;
};

}  // namespace qmt
