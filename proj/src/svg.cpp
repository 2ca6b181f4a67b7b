#include "hmog/svg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace hmog {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string header(double w, double h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n"
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string hsl_to_hex(double h, double s, double l) {
    auto f = [&](double n) {
        const double k = std::fmod(n + h / 30.0, 12.0);
        const double a = s * std::min(l, 1.0 - l);
        return l - a * std::max(-1.0, std::min({k - 3.0, 9.0 - k, 1.0}));
    };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(f(0) * 255)),
                  static_cast<int>(std::lround(f(8) * 255)), static_cast<int>(std::lround(f(4) * 255)));
    return buf;
}

std::string fmt_point(const std::vector<double>& p) {
    std::string out = "(";
    for (std::size_t i = 0; i < p.size(); ++i) out += (i ? ", " : "") + num(p[i]);
    return out + ")";
}

}  // namespace

std::string palette_color(std::size_t i, std::size_t count) {
    const double hue = 360.0 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(count, 1));
    return hsl_to_hex(hue, 0.75, i % 2 ? 0.38 : 0.5);
}

std::string scatter_svg(const Tensor& real, const Tensor& fake, const std::vector<std::size_t>& component,
                        std::size_t component_count) {
    if (fake.rows() != component.size()) throw std::invalid_argument("scatter_svg: one component per sample required");
    if ((real.rows() && real.cols() < 2) || (fake.rows() && fake.cols() < 2)) {
        throw std::invalid_argument("scatter_svg: samples must be at least two-dimensional");
    }
    double lo_x = -1, hi_x = 1, lo_y = -1, hi_y = 1;
    auto extend = [&](const Tensor& t) {
        for (std::size_t r = 0; r < t.rows(); ++r) {
            if (!std::isfinite(t(r, 0)) || !std::isfinite(t(r, 1))) continue;
            lo_x = std::min(lo_x, t(r, 0));
            hi_x = std::max(hi_x, t(r, 0));
            lo_y = std::min(lo_y, t(r, 1));
            hi_y = std::max(hi_y, t(r, 1));
        }
    };
    extend(real);
    extend(fake);
    const double plot = 480, margin = 20, legend = 120;
    const double span = std::max(hi_x - lo_x, hi_y - lo_y) * 1.05;
    const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
    auto px = [&](double x) { return margin + plot * (0.5 + (x - cx) / span); };
    auto py = [&](double y) { return margin + plot * (0.5 - (y - cy) / span); };

    std::string s = header(plot + 2 * margin + legend, plot + 2 * margin);
    s += "<g class=\"fake\">\n";
    for (std::size_t r = 0; r < fake.rows(); ++r) {
        if (!std::isfinite(fake(r, 0)) || !std::isfinite(fake(r, 1))) continue;
        s += "<circle cx=\"" + num(px(fake(r, 0))) + "\" cy=\"" + num(py(fake(r, 1))) + "\" r=\"1.6\" fill=\"" +
             palette_color(component[r], component_count) + "\" fill-opacity=\"0.7\"/>\n";
    }
    s += "</g>\n<g class=\"real\" stroke=\"black\" stroke-width=\"0.6\">\n";
    for (std::size_t r = 0; r < real.rows(); ++r) {
        const double x = px(real(r, 0)), y = py(real(r, 1));
        s += "<path d=\"M" + num(x - 2) + " " + num(y - 2) + "L" + num(x + 2) + " " + num(y + 2) + "M" + num(x - 2) +
             " " + num(y + 2) + "L" + num(x + 2) + " " + num(y - 2) + "\"/>\n";
    }
    s += "</g>\n<g class=\"legend\">\n";
    const double lx = plot + 2 * margin;
    s += "<text x=\"" + num(lx) + "\" y=\"" + num(margin) + "\">x real</text>\n";
    for (std::size_t k = 0; k < component_count; ++k) {
        const double y = margin + 16.0 * static_cast<double>(k + 1);
        s += "<g class=\"legend-entry\"><circle cx=\"" + num(lx + 4) + "\" cy=\"" + num(y - 4) + "\" r=\"4\" fill=\"" +
             palette_color(k, component_count) + "\"/><text x=\"" + num(lx + 12) + "\" y=\"" + num(y) + "\">G" +
             std::to_string(k + 1) + "</text></g>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

std::string corr_svg(const Tensor& corr) {
    const std::size_t l = corr.rows();
    if (corr.rank() != 2 || corr.cols() != l) throw std::invalid_argument("corr_svg: expected a square matrix");
    const double cell = std::max(12.0, 320.0 / static_cast<double>(std::max<std::size_t>(l, 1)));
    const double margin = 30;
    std::string s = header(2 * margin + cell * static_cast<double>(l), 2 * margin + cell * static_cast<double>(l));
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) {
            const double v = std::clamp(corr(i, j), -1.0, 1.0);
            // blue for -1, white for 0, red for +1
            const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(v))));
            char color[8];
            if (v >= 0)
                std::snprintf(color, sizeof color, "#ff%02x%02x", fade, fade);
            else
                std::snprintf(color, sizeof color, "#%02x%02xff", fade, fade);
            s += "<rect class=\"cell\" x=\"" + num(margin + cell * static_cast<double>(j)) + "\" y=\"" +
                 num(margin + cell * static_cast<double>(i)) + "\" width=\"" + num(cell) + "\" height=\"" + num(cell) +
                 "\" fill=\"" + color + "\"><title>" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ": " +
                 num(corr(i, j)) + "</title></rect>\n";
        }
    }
    for (std::size_t i = 0; i < l; ++i) {
        const double c = margin + cell * (static_cast<double>(i) + 0.5);
        s += "<text x=\"" + num(c) + "\" y=\"" + num(margin - 6) + "\" text-anchor=\"middle\">" + std::to_string(i + 1) +
             "</text>\n";
        s += "<text x=\"" + num(margin - 6) + "\" y=\"" + num(c + 4) + "\" text-anchor=\"end\">" + std::to_string(i + 1) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string tree_svg(const std::vector<std::optional<std::vector<double>>>& node_means,
                     const std::vector<std::vector<Exemplar>>& exemplars) {
    const std::size_t nodes = node_means.size();
    const std::size_t leaves = (nodes + 1) / 2;
    if (nodes == 0 || !std::has_single_bit(leaves) || 2 * leaves - 1 != nodes) {
        throw std::invalid_argument("tree_svg: node count must be 2L-1 for a power-of-two L");
    }
    if (exemplars.size() != leaves) throw std::invalid_argument("tree_svg: one exemplar list per leaf required");
    std::size_t depth = 0;
    while ((std::size_t{1} << depth) < leaves) ++depth;
    std::size_t max_ex = 0;
    for (const auto& e : exemplars) max_ex = std::max(max_ex, e.size());

    const double col = 130, row = 80, margin = 20;
    const double width = 2 * margin + col * static_cast<double>(leaves);
    const double height = 2 * margin + row * static_cast<double>(depth + 1) + 14.0 * static_cast<double>(max_ex);
    auto pos = [&](std::size_t m) {
        std::size_t level = 0;
        while (m + 1 >= (std::size_t{2} << level)) ++level;
        const std::size_t first = (std::size_t{1} << level) - 1;
        const double slots = static_cast<double>(std::size_t{1} << level);
        const double x = margin + (static_cast<double>(m - first) + 0.5) * (width - 2 * margin) / slots;
        return std::pair<double, double>{x, margin + 20 + row * static_cast<double>(level)};
    };

    std::string s = header(width, height);
    s += "<g class=\"edges\" stroke=\"#888\">\n";
    for (std::size_t m = 0; 2 * m + 2 < nodes; ++m) {
        const auto [x, y] = pos(m);
        for (std::size_t c : {2 * m + 1, 2 * m + 2}) {
            const auto [x2, y2] = pos(c);
            s += "<line x1=\"" + num(x) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\"/>\n";
        }
    }
    s += "</g>\n";
    for (std::size_t m = 0; m < nodes; ++m) {
        const auto [x, y] = pos(m);
        const bool leaf = m + 1 >= leaves;
        s += "<g class=\"node\"><circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"6\" fill=\"" +
             (leaf ? palette_color(m + 1 - leaves, leaves) : std::string("#444")) + "\"/>";
        const std::string label = node_means[m] ? fmt_point(*node_means[m]) : std::string("(no mass)");
        s += "<text x=\"" + num(x) + "\" y=\"" + num(y - 10) + "\" text-anchor=\"middle\">" + label + "</text>";
        if (leaf) {
            const auto& ex = exemplars[m + 1 - leaves];
            for (std::size_t q = 0; q < ex.size(); ++q) {
                s += "<text class=\"exemplar\" x=\"" + num(x) + "\" y=\"" + num(y + 22 + 14.0 * static_cast<double>(q)) +
                     "\" text-anchor=\"middle\" font-size=\"9\">" + fmt_point(ex[q].sample) + "</text>";
            }
        }
        s += "</g>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace hmog
