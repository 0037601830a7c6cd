#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twkb {

/// Base class for every failure raised by the solver library.
class solver_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or violated precondition.
class invalid_argument : public solver_error {
public:
    using solver_error::solver_error;
};

/// Q^(0) vanishes identically (within tolerance) on a subinterval.
class degenerate_interval : public solver_error {
public:
    using solver_error::solver_error;
};

class degenerate_leading_coefficient : public solver_error {
public:
    using solver_error::solver_error;
};

class unsupported_order : public solver_error {
public:
    using solver_error::solver_error;
};

/// Simultaneous root iteration did not reach the residual bound.
class no_convergence : public solver_error {
public:
    using solver_error::solver_error;
};

class ambiguous_matching : public solver_error {
public:
    ambiguous_matching(const std::string& what, std::size_t grid_index)
        : solver_error(what), index_(grid_index) {}
    std::size_t grid_index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class no_regular_branch : public solver_error {
public:
    using solver_error::solver_error;
};

/// Airy argument outside the documented accuracy envelope |t| <= 30.
class out_of_envelope : public solver_error {
public:
    using solver_error::solver_error;
};

class not_linear : public solver_error {
public:
    using solver_error::solver_error;
};

class grid_too_coarse : public solver_error {
public:
    using solver_error::solver_error;
};

class anchor_off_grid : public solver_error {
public:
    using solver_error::solver_error;
};

class grid_mismatch : public solver_error {
public:
    using solver_error::solver_error;
};

}  // namespace twkb
