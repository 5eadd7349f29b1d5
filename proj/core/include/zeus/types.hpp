#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace zeus {

using Vec = std::vector<double>;
using ConstVecView = std::span<const double>;

// Throws shape_error if the two extents differ.
void require_same_size(std::size_t a, std::size_t b, const char* where);

}  // namespace zeus
