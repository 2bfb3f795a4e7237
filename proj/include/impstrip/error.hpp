#pragma once

#include <stdexcept>
#include <string>

namespace impstrip {

enum class ErrorKind {
    config,
    domain,
    unconverged,
    singular_system,
    tail_not_decaying,
    singular_jump,
    branch_collision,
    deformation_failed,
    contour_singularity,
    ill_conditioned_fit,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace impstrip
