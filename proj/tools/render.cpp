#include "render.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace schottky::cli {

namespace {

constexpr double kCenter = 200;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  std::string s = buf;
  return s == "-0.0000" ? "0.0000" : s;
}

// Screen coordinates of the angle th on a circle of radius rad.
std::string pos(double th, double rad) {
  return num(kCenter + rad * std::cos(th)) + " " + num(kCenter - rad * std::sin(th));
}

// Increasing t runs clockwise on screen, which is SVG's positive sweep.
std::string arc_path(const quadratic::Arc& a, double rad, const char* color, double width) {
  double len = quadratic::angular_length(a);
  std::ostringstream s;
  s << "  <path d=\"M " << pos(a.start.angle(), rad) << " A " << num(rad) << " " << num(rad) << " 0 "
    << (len > M_PI ? 1 : 0) << " 1 " << pos(a.end.angle(), rad) << "\" fill=\"none\" stroke=\"" << color
    << "\" stroke-width=\"" << num(width) << "\"/>\n";
  return s.str();
}

}  // namespace

std::string limit_svg(const sl2ht::PreciseTable& table, const std::vector<quadratic::CirclePoint>& samples) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  s << "  <rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
  s << "  <circle cx=\"200\" cy=\"200\" r=\"160\" fill=\"none\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
  for (const auto& g : table.gaps) s << arc_path(g, 150, "#999999", 3);
  for (const auto& a : table.arcs) {
    s << arc_path(a.plus, 170, "#c0392b", 4);
    s << arc_path(a.minus, 170, "#2e6fb7", 4);
  }
  for (const auto& x : samples) {
    double th = x.angle();
    s << "  <circle cx=\"" << num(kCenter + 160 * std::cos(th)) << "\" cy=\"" << num(kCenter - 160 * std::sin(th))
      << "\" r=\"1.5\" fill=\"black\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string limit_csv(const std::vector<quadratic::CirclePoint>& samples) {
  std::ostringstream s;
  s << "index,angle,t\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12f", samples[i].angle());
    s << i << "," << buf << ",\"" << samples[i].to_string() << "\"\n";
  }
  return s.str();
}

}  // namespace schottky::cli
