#pragma once

#include "spectral_econ/square_matrix.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spectral_econ::figures {

using Point = std::array<double, 2>;

/// Coordinates in [0, 1]^2 from the 2nd and 3rd Laplacian eigenvectors of the
/// symmetrized pattern. Deterministic: eigenvector signs are fixed.
std::vector<Point> spectral_layout(const SquareMatrix& m);

/// CSV with header "node,x,y"; nodes are 1-based and must cover 1..n.
std::vector<Point> parse_coordinates(std::string_view text, std::size_t n);
std::vector<Point> read_coordinates(const std::filesystem::path& path, std::size_t n);

/// r_i = r_max * score_i / max(score). Scores must be nonnegative with a positive max.
std::vector<double> node_radii(const Vector& scores, double r_max);

/// Block-average down to at most max_cells x max_cells.
Matrix average_pool(const Matrix& m, std::size_t max_cells);

/// Diverging scale: negative blue, positive red, zero white. Returns "#rrggbb".
std::string diverging_color(double value, double scale);

/// ||u u^T - v v^T||_F for unit u, v.
double rank_one_distance(const Vector& u, const Vector& v);

std::string render_fig1(const SquareMatrix& m, const Vector& scores,
                        const std::vector<Point>& layout, const std::string& title = "");

std::string render_fig2(const SquareMatrix& b, const std::vector<Point>& layout);

struct HeatmapPanels {
    Matrix m;
    Vector w1;
    Matrix m_hat;
    Vector w1_hat;
};

std::string render_fig4(const HeatmapPanels& panels, std::size_t max_cells = 100);

}  // namespace spectral_econ::figures
