#pragma once

#include <complex>
#include <string>

namespace treeconv {

using Complex = std::complex<double>;

inline constexpr Complex I{0.0, 1.0};

// Throws DomainError unless Im z > 0.
void require_upper_half_plane(Complex z, const char* where);

}  // namespace treeconv
