#pragma once

namespace confspec {

/// Angular mode of a rotationally symmetric problem.
///
/// `index` is l >= 0 for scalar operators and a half-integer k for the
/// surface Dirac operator. `angular_eigenvalue` is l(l+n-2) or k.
struct ModeSpec {
    double index = 0.0;
    double angular_eigenvalue = 0.0;
    int multiplicity = 1;

    bool operator==(const ModeSpec&) const = default;
};

}  // namespace confspec
