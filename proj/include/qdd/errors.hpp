// SPDX-License-Identifier: MIT
//
// Error types shared by the solver core. Validation problems raise
// std::invalid_argument with the offending field named; numerical
// breakdowns (quadrature stall, lost bracket, divergence at the flow
// fixed point) raise numeric_error with the achieved estimate in the
// message.
#pragma once

#include <stdexcept>
#include <string>

namespace qdd {

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qdd
