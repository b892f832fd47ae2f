#include "spectral_econ/figures.hpp"

#include "spectral_econ/error.hpp"
#include "spectral_econ/matrix_io.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace spectral_econ::figures {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string num(double v) { return fmt::format("{:.2f}", v); }

std::string node_label(const SquareMatrix& m, std::size_t i) {
    return m.labels().empty() ? std::to_string(i + 1) : m.labels()[i];
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void check_layout(const std::vector<Point>& layout, std::size_t n) {
    if (layout.size() != n) {
        throw InvalidInput(fmt::format("layout has {} points for {} nodes", layout.size(), n));
    }
}

Point to_canvas(const Point& p, double size, double pad) {
    return {pad + p[0] * (size - 2 * pad), pad + (1.0 - p[1]) * (size - 2 * pad)};
}

double parse_number(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InvalidInput(fmt::format("cannot parse '{}' as a number", s));
    }
    return v;
}

}  // namespace

std::vector<Point> spectral_layout(const SquareMatrix& m) {
    const auto n = idx(m.size());
    if (n == 0) return {};
    if (n == 1) return {{0.5, 0.5}};
    Matrix a = (m.entries().cwiseAbs() + m.entries().transpose().cwiseAbs()) / 2.0;
    a.diagonal().setZero();
    Matrix lap = -a;
    lap.diagonal() = a.rowwise().sum();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(lap);
    if (solver.info() != Eigen::Success) throw NumericFailure("layout eigensolver failed");

    std::vector<Point> out(static_cast<std::size_t>(n));
    for (int axis = 0; axis < 2; ++axis) {
        const Eigen::Index col = std::min<Eigen::Index>(axis + 1, n - 1);
        Vector v = solver.eigenvectors().col(col);
        Eigen::Index pivot = 0;
        v.cwiseAbs().maxCoeff(&pivot);
        if (v[pivot] < 0) v = -v;
        if (axis == 1 && n == 2) v.setZero();
        const double lo = v.minCoeff();
        const double span = v.maxCoeff() - lo;
        for (Eigen::Index i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(axis)] =
                span > 1e-12 ? 0.05 + 0.9 * (v[i] - lo) / span : 0.5;
        }
    }
    return out;
}

std::vector<Point> parse_coordinates(std::string_view text, std::size_t n) {
    std::vector<Point> out(n);
    std::vector<bool> seen(n, false);
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.rfind("node", 0) == 0) continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (auto pos = rest.find(','); pos != std::string_view::npos; pos = rest.find(',')) {
            fields.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        fields.push_back(rest);
        if (fields.size() != 3) {
            throw InvalidInput(fmt::format("coordinates line {}: expected node,x,y", lineno));
        }
        const double node = parse_number(fields[0]);
        if (node < 1 || node > static_cast<double>(n) || node != std::floor(node)) {
            throw InvalidInput(fmt::format("coordinates line {}: node out of range 1..{}", lineno, n));
        }
        const auto i = static_cast<std::size_t>(node) - 1;
        out[i] = {parse_number(fields[1]), parse_number(fields[2])};
        seen[i] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) throw InvalidInput(fmt::format("coordinates missing node {}", i + 1));
    }
    double lo_x = out[0][0], hi_x = out[0][0], lo_y = out[0][1], hi_y = out[0][1];
    for (const auto& p : out) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
    }
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
    const double mid_x = (lo_x + hi_x) / 2, mid_y = (lo_y + hi_y) / 2;
    for (auto& p : out) {
        p = {0.5 + 0.9 * (p[0] - mid_x) / span, 0.5 + 0.9 * (p[1] - mid_y) / span};
    }
    return out;
}

std::vector<Point> read_coordinates(const std::filesystem::path& path, std::size_t n) {
    return parse_coordinates(io::read_text(path), n);
}

std::vector<double> node_radii(const Vector& scores, double r_max) {
    if (scores.size() == 0) return {};
    if (!scores.allFinite() || scores.minCoeff() < 0.0 || !(scores.maxCoeff() > 0.0)) {
        throw InvalidInput("node sizes need finite nonnegative scores with a positive maximum");
    }
    const double top = scores.maxCoeff();
    std::vector<double> r(static_cast<std::size_t>(scores.size()));
    for (Eigen::Index i = 0; i < scores.size(); ++i) r[static_cast<std::size_t>(i)] = r_max * scores[i] / top;
    return r;
}

Matrix average_pool(const Matrix& m, std::size_t max_cells) {
    if (max_cells == 0) throw InvalidInput("average_pool: max_cells must be positive");
    const auto rows = static_cast<std::size_t>(m.rows());
    const auto cols = static_cast<std::size_t>(m.cols());
    const std::size_t br = (rows + max_cells - 1) / max_cells;
    const std::size_t bc = (cols + max_cells - 1) / max_cells;
    if (br <= 1 && bc <= 1) return m;
    const std::size_t out_r = (rows + br - 1) / br;
    const std::size_t out_c = (cols + bc - 1) / bc;
    Matrix out(idx(out_r), idx(out_c));
    for (std::size_t i = 0; i < out_r; ++i) {
        for (std::size_t j = 0; j < out_c; ++j) {
            const std::size_t h = std::min(br, rows - i * br);
            const std::size_t w = std::min(bc, cols - j * bc);
            out(idx(i), idx(j)) = m.block(idx(i * br), idx(j * bc), idx(h), idx(w)).mean();
        }
    }
    return out;
}

std::string diverging_color(double value, double scale) {
    double t = scale > 0.0 ? value / scale : 0.0;
    if (!std::isfinite(t)) t = 0.0;
    t = std::clamp(t, -1.0, 1.0);
    const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
    if (t >= 0.0) return fmt::format("#ff{:02x}{:02x}", fade, fade);
    return fmt::format("#{:02x}{:02x}ff", fade, fade);
}

double rank_one_distance(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw InvalidInput("rank_one_distance: length mismatch");
    const double c = u.dot(v);
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * c * c));
}

std::string render_fig1(const SquareMatrix& m, const Vector& scores,
                        const std::vector<Point>& layout, const std::string& title) {
    const std::size_t n = m.size();
    check_layout(layout, n);
    if (static_cast<std::size_t>(scores.size()) != n) {
        throw InvalidInput("fig1: score vector length does not match the graph");
    }
    constexpr double size = 480.0;
    constexpr double r_max = 30.0;
    const auto radii = node_radii(scores, r_max);

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        static_cast<int>(size));
    if (!title.empty()) {
        svg += fmt::format("<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                           "font-size=\"14\">{}</text>\n",
                           num(size / 2), escape(title));
    }
    svg += "<g id=\"edges\" stroke=\"#555555\" stroke-width=\"1.5\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!m.has_edge(i, j) && !m.has_edge(j, i)) continue;
            const auto a = to_canvas(layout[i], size, 50);
            const auto b = to_canvas(layout[j], size, 50);
            svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n", num(a[0]), num(a[1]),
                               num(b[0]), num(b[1]));
        }
    }
    svg += "</g>\n<g id=\"nodes\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = to_canvas(layout[i], size, 50);
        svg += fmt::format(
            "<circle id=\"node-{}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#f4a261\" stroke=\"#333333\"/>\n",
            i + 1, num(p[0]), num(p[1]), num(radii[i]));
        svg += fmt::format("<text x=\"{}\" y=\"{}\">{} ({})</text>\n", num(p[0]),
                           num(p[1] + radii[i] + 14), escape(node_label(m, i)),
                           fmt::format("{:.3g}", scores[idx(i)]));
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

std::string render_fig2(const SquareMatrix& b, const std::vector<Point>& layout) {
    const std::size_t n = b.size();
    check_layout(layout, n);
    constexpr double size = 480.0;
    constexpr double radius = 16.0;

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n"
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" "
        "markerHeight=\"8\" orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" "
        "fill=\"#333333\"/></marker></defs>\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<g id=\"edges\" stroke=\"#333333\" stroke-width=\"1.5\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n",
        static_cast<int>(size));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !b.has_edge(i, j)) continue;
            auto p = to_canvas(layout[i], size, 50);
            auto q = to_canvas(layout[j], size, 50);
            const double dx = q[0] - p[0];
            const double dy = q[1] - p[1];
            const double len = std::hypot(dx, dy);
            if (len < 1e-9) continue;
            const double ux = dx / len, uy = dy / len;
            // two-way pairs are drawn as parallel offset arrows
            const double off = b.has_edge(j, i) ? 5.0 : 0.0;
            const double ox = -uy * off, oy = ux * off;
            p = {p[0] + ux * radius + ox, p[1] + uy * radius + oy};
            q = {q[0] - ux * radius + ox, q[1] - uy * radius + oy};
            const double lx = (p[0] + q[0]) / 2 - uy * (off + 9.0);
            const double ly = (p[1] + q[1]) / 2 + ux * (off + 9.0);
            svg += fmt::format(
                "<line id=\"edge-{}-{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" marker-end=\"url(#arrow)\"/>\n",
                i + 1, j + 1, num(p[0]), num(p[1]), num(q[0]), num(q[1]));
            svg += fmt::format("<text x=\"{}\" y=\"{}\" stroke=\"none\" fill=\"#b00000\" "
                               "text-anchor=\"middle\">{}</text>\n",
                               num(lx), num(ly + 4), fmt::format("{:g}", b(i, j)));
        }
    }
    svg += "</g>\n<g id=\"nodes\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = to_canvas(layout[i], size, 50);
        svg += fmt::format(
            "<circle id=\"node-{}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#a8dadc\" stroke=\"#333333\"/>\n",
            i + 1, num(p[0]), num(p[1]), num(radius));
        svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(p[0]), num(p[1] + 4),
                           escape(node_label(b, i)));
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

namespace {

std::string heatmap_body(const Matrix& pooled, double scale, double side) {
    const double cell = side / static_cast<double>(std::max(pooled.rows(), pooled.cols()));
    std::string out;
    for (Eigen::Index i = 0; i < pooled.rows(); ++i) {
        Eigen::Index j = 0;
        while (j < pooled.cols()) {
            const std::string color = diverging_color(pooled(i, j), scale);
            Eigen::Index end = j + 1;
            while (end < pooled.cols() && diverging_color(pooled(i, end), scale) == color) ++end;
            out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                               num(static_cast<double>(j) * cell), num(static_cast<double>(i) * cell),
                               num(static_cast<double>(end - j) * cell), num(cell), color);
            j = end;
        }
    }
    return out;
}

double max_abs_or_one(const Matrix& m) {
    const double s = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
    return s > 0.0 ? s : 1.0;
}

}  // namespace

std::string render_fig4(const HeatmapPanels& panels, std::size_t max_cells) {
    const auto n = panels.m.rows();
    if (n == 0 || panels.m.cols() != n || panels.m_hat.rows() != n || panels.m_hat.cols() != n ||
        panels.w1.size() != n || panels.w1_hat.size() != n) {
        throw InvalidInput("fig4: panels need matching n x n matrices and length-n vectors");
    }
    const Matrix outer = panels.w1 * panels.w1.transpose();
    const Matrix outer_hat = panels.w1_hat * panels.w1_hat.transpose();
    const double matrix_scale = max_abs_or_one(panels.m);
    const double outer_scale = max_abs_or_one(outer);

    struct Panel {
        const char* id;
        const char* caption;
        Matrix pooled;
        double scale;
    };
    const Panel list[] = {
        {"panel-a", "(a) M", average_pool(panels.m, max_cells), matrix_scale},
        {"panel-b", "(b) w1 w1^T", average_pool(outer, max_cells), outer_scale},
        {"panel-c", "(c) M hat", average_pool(panels.m_hat, max_cells), matrix_scale},
        {"panel-d", "(d) w1hat w1hat^T", average_pool(outer_hat, max_cells), outer_scale},
    };

    constexpr double side = 300.0;
    constexpr double gap = 40.0;
    const double total = 2 * side + 3 * gap;
    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\" "
        "shape-rendering=\"crispEdges\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        num(total));
    for (int k = 0; k < 4; ++k) {
        const double x = gap + (k % 2) * (side + gap);
        const double y = gap + (k / 2) * (side + gap);
        svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
                           num(x), num(y - 8), list[k].caption);
        svg += fmt::format("<g id=\"{}\" transform=\"translate({},{})\">\n", list[k].id, num(x), num(y));
        svg += heatmap_body(list[k].pooled, list[k].scale, side);
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace spectral_econ::figures
