#pragma once

#include <string>
#include <vector>

#include "schottky/sl2ht.hpp"

namespace schottky::cli {

// Static picture of the boundary circle: attracting arcs red, repelling
// arcs blue, the gaps of O grey, limit samples as dots.
std::string limit_svg(const sl2ht::PreciseTable& table, const std::vector<quadratic::CirclePoint>& samples);
std::string limit_csv(const std::vector<quadratic::CirclePoint>& samples);

}  // namespace schottky::cli
