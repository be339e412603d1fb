#pragma once

// Side-by-side correspondence drawing: image A on the left, image B on the
// right, one line per matched pair.

#include "gmatch/discretize.hpp"
#include "gmatch/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace gmatch {

struct SvgLayout {
    double gap = 20.0;
    double margin = 10.0;
    double point_radius = 2.0;
    std::string line_color = "#22aa22";
    std::string point_color = "#cc2222";
};

namespace detail {

inline double extent(const FeatureSet& fs, bool horizontal)
{
    const auto dim = horizontal ? fs.image_width : fs.image_height;
    if (dim) return static_cast<double>(*dim);
    double mx = 0.0;
    for (const auto& kp : fs.keypoints) mx = std::max(mx, horizontal ? kp.x : kp.y);
    return std::ceil(mx) + 1.0;
}

inline void append(std::string& out, const char* fmt, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
}

inline std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace detail

inline std::string render_svg(const FeatureSet& a, const FeatureSet& b, const Assignment& m,
                              const SvgLayout& layout = {})
{
    detail::require(m.n1 == a.size() && m.n2 == b.size(),
                    "render_svg: assignment does not fit the feature sets");
    m.validate();
    const double wa = detail::extent(a, true);
    const double ha = detail::extent(a, false);
    const double wb = detail::extent(b, true);
    const double hb = detail::extent(b, false);
    const double ox_a = layout.margin;
    const double ox_b = layout.margin + wa + layout.gap;
    const double oy = layout.margin;
    const double width = ox_b + wb + layout.margin;
    const double height = std::max(ha, hb) + 2.0 * layout.margin;

    std::string s;
    detail::append(s,
                   "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.2f\" height=\"%.2f\" "
                   "viewBox=\"0 0 %.2f %.2f\">\n",
                   width, height, width, height);
    detail::append(s, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"#888888\"/>\n",
                   ox_a, oy, wa, ha);
    detail::append(s, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"#888888\"/>\n",
                   ox_b, oy, wb, hb);
    s += "<title>" + detail::xml_escape(a.image_id) + " vs " + detail::xml_escape(b.image_id)
         + "</title>\n";

    s += "<g id=\"points\" fill=\"" + layout.point_color + "\">\n";
    for (const auto& kp : a.keypoints)
        detail::append(s, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\"/>\n", ox_a + kp.x, oy + kp.y,
                       layout.point_radius);
    for (const auto& kp : b.keypoints)
        detail::append(s, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\"/>\n", ox_b + kp.x, oy + kp.y,
                       layout.point_radius);
    s += "</g>\n";

    s += "<g id=\"matches\" stroke=\"" + layout.line_color + "\" stroke-width=\"1\">\n";
    for (const auto& [i, j] : m.pairs) {
        const auto& p = a.keypoints[static_cast<std::size_t>(i)];
        const auto& q = b.keypoints[static_cast<std::size_t>(j)];
        detail::append(s, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", ox_a + p.x,
                       oy + p.y, ox_b + q.x, oy + q.y);
    }
    s += "</g>\n</svg>\n";
    return s;
}

}  // namespace gmatch
