#ifndef REPSIM_RENDER_HPP
#define REPSIM_RENDER_HPP

// Figure and table emission. Rendering is a pure function of (data,
// topology, style constants): identical inputs must produce byte-identical
// SVG, which is what the golden-file tests pin down. Grayscale fill keeps
// the mapping value -> pixel trivially checkable.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "repsim/errors.hpp"
#include "repsim/topology.hpp"

namespace repsim {

/// Pairwise layer-similarity scores between two models: entry (i,j) compares
/// layer i of model_a with layer j of model_b.
struct SimilarityMatrix {
  std::string model_a;
  std::string model_b;
  std::string metric;
  Eigen::MatrixXd values;  // L_a x L_b, entries in [0,1]
};

/// The main diagonal: layer i of model_a against layer i of model_b, which
/// is exactly the per-layer similarity curve.
inline std::vector<double> curve_from_matrix(const SimilarityMatrix& m) {
  if (m.values.rows() != m.values.cols())
    throw NotSquare("matrix is " + std::to_string(m.values.rows()) + "x" +
                    std::to_string(m.values.cols()));
  std::vector<double> curve(static_cast<std::size_t>(m.values.rows()));
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    curve[static_cast<std::size_t>(i)] = m.values(i, i);
  return curve;
}

// All geometry constants live here; goldens depend on them.
struct SvgStyle {
  int cell = 6;          // heatmap cell size, px
  int margin = 40;       // canvas margin, px
  int curve_height = 200;
  int curve_step = 6;    // px per layer along the x axis
};

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string gray_fill(double v) {
  if (v < 0.0) v = 0.0;
  if (v > 1.0) v = 1.0;
  const int g = static_cast<int>(std::lround(255.0 * v));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", g, g, g);
  return buf;
}

// Tick positions worth labelling: detection and route layers.
inline std::vector<int> tick_indices(const NetworkTopology& topo) {
  std::vector<int> ticks;
  for (const auto& l : topo.layers)
    if (l.kind == LayerKind::detection || l.kind == LayerKind::route)
      ticks.push_back(l.index);
  return ticks;
}

inline const char* kCurveColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace detail

/// One rect per matrix cell, gray(round(255*v)), tick marks at detection and
/// route layers of each axis. Rows run down the y axis (model_a), columns
/// along x (model_b).
inline std::string render_heatmap_svg(const SimilarityMatrix& m,
                                      const NetworkTopology& topo_a,
                                      const NetworkTopology& topo_b,
                                      const SvgStyle& style = {}) {
  const auto rows = m.values.rows();
  const auto cols = m.values.cols();
  if (rows != static_cast<Eigen::Index>(topo_a.size()) ||
      cols != static_cast<Eigen::Index>(topo_b.size()))
    throw LengthMismatch("matrix dimensions do not match the topologies");

  const int w = 2 * style.margin + static_cast<int>(cols) * style.cell;
  const int h = 2 * style.margin + static_cast<int>(rows) * style.cell;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(w) + "\" height=\"" + std::to_string(h) + "\">\n";
  svg += "<title>" + m.model_a + " vs " + m.model_b + " (" + m.metric +
         ")</title>\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const int x = style.margin + static_cast<int>(j) * style.cell;
      const int y = style.margin + static_cast<int>(i) * style.cell;
      svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"" + std::to_string(style.cell) + "\" height=\"" +
             std::to_string(style.cell) + "\" fill=\"" +
             detail::gray_fill(m.values(i, j)) + "\"/>\n";
    }
  }
  for (int t : detail::tick_indices(topo_b)) {
    const int x = style.margin + t * style.cell + style.cell / 2;
    svg += "<line x1=\"" + std::to_string(x) + "\" y1=\"" +
           std::to_string(style.margin - 6) + "\" x2=\"" + std::to_string(x) +
           "\" y2=\"" + std::to_string(style.margin) +
           "\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + std::to_string(x) + "\" y=\"" +
           std::to_string(style.margin - 10) +
           "\" font-size=\"9\" text-anchor=\"middle\">" + std::to_string(t) +
           "</text>\n";
  }
  for (int t : detail::tick_indices(topo_a)) {
    const int y = style.margin + t * style.cell + style.cell / 2;
    svg += "<line x1=\"" + std::to_string(style.margin - 6) + "\" y1=\"" +
           std::to_string(y) + "\" x2=\"" + std::to_string(style.margin) +
           "\" y2=\"" + std::to_string(y) + "\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + std::to_string(style.margin - 8) + "\" y=\"" +
           std::to_string(y + 3) +
           "\" font-size=\"9\" text-anchor=\"end\">" + std::to_string(t) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

/// Per-layer similarity curves as polylines, one per labeled curve, with a
/// legend and vertical guides at the topology's detection layers.
inline std::string render_curve_svg(
    const std::vector<std::pair<std::string, std::vector<double>>>& curves,
    const NetworkTopology& topo, const SvgStyle& style = {}) {
  if (curves.empty()) throw InputError("no curves to render");
  for (const auto& [label, c] : curves)
    if (c.size() != topo.size())
      throw LengthMismatch("curve '" + label + "' length " +
                           std::to_string(c.size()) +
                           " does not match topology length " +
                           std::to_string(topo.size()));

  const auto layers = static_cast<int>(topo.size());
  const int w = 2 * style.margin + (layers - 1) * style.curve_step;
  const int h = 2 * style.margin + style.curve_height;
  const auto x_at = [&](int i) { return style.margin + i * style.curve_step; };
  const auto y_at = [&](double v) {
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    return static_cast<double>(style.margin) + (1.0 - v) * style.curve_height;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(w) + "\" height=\"" + std::to_string(h) + "\">\n";
  // Axes box and y gridlines at 0, 0.5, 1.
  svg += "<rect x=\"" + std::to_string(style.margin) + "\" y=\"" +
         std::to_string(style.margin) + "\" width=\"" +
         std::to_string(w - 2 * style.margin) + "\" height=\"" +
         std::to_string(style.curve_height) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (double level : {0.0, 0.5, 1.0}) {
    svg += "<text x=\"" + std::to_string(style.margin - 6) + "\" y=\"" +
           detail::fmt("%.1f", y_at(level) + 3.0) +
           "\" font-size=\"9\" text-anchor=\"end\">" +
           detail::fmt("%.1f", level) + "</text>\n";
  }
  for (const auto& l : topo.layers) {
    if (l.kind != LayerKind::detection) continue;
    const int x = x_at(l.index);
    svg += "<line x1=\"" + std::to_string(x) + "\" y1=\"" +
           std::to_string(style.margin) + "\" x2=\"" + std::to_string(x) +
           "\" y2=\"" + std::to_string(style.margin + style.curve_height) +
           "\" stroke=\"#999999\" stroke-dasharray=\"3,3\"/>\n";
    svg += "<text x=\"" + std::to_string(x) + "\" y=\"" +
           std::to_string(style.margin + style.curve_height + 12) +
           "\" font-size=\"9\" text-anchor=\"middle\">" +
           std::to_string(l.index) + "</text>\n";
  }
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const char* color =
        detail::kCurveColors[k % std::size(detail::kCurveColors)];
    std::string points;
    for (int i = 0; i < layers; ++i) {
      if (i) points += ' ';
      points += std::to_string(x_at(i)) + "," +
                detail::fmt("%.2f", y_at(curves[k].second[static_cast<std::size_t>(i)]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    // Legend entry.
    const int ly = style.margin + 14 + static_cast<int>(k) * 14;
    svg += "<line x1=\"" + std::to_string(style.margin + 8) + "\" y1=\"" +
           std::to_string(ly) + "\" x2=\"" + std::to_string(style.margin + 28) +
           "\" y2=\"" + std::to_string(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + std::to_string(style.margin + 32) + "\" y=\"" +
           std::to_string(ly + 3) + "\" font-size=\"10\">" + curves[k].first +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_text_file(const std::string& content,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << content;
  if (!out) throw IoFailure("write failed for " + path.string());
}

/// Matrix CSV: one row per layer of model_a, %.9g entries.
inline std::string matrix_csv(const SimilarityMatrix& m) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", m.values(i, j));
      if (j) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

/// Curve CSV with a header row.
inline std::string curve_csv(std::span<const double> curve) {
  std::string out = "layer,score\n";
  char buf[32];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", curve[i]);
    out += std::to_string(i);
    out += ',';
    out += buf;
    out += '\n';
  }
  return out;
}

inline std::vector<double> read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open curve " + path.string());
  std::vector<double> curve;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InputError("curve " + path.string() + ": malformed row '" + line + "'");
    curve.push_back(std::stod(line.substr(comma + 1)));
  }
  return curve;
}

inline Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open matrix " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      row.push_back(std::stod(line.substr(pos, next - pos)));
      pos = next + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError("matrix " + path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("matrix " + path.string() + " is empty");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace repsim

#endif  // REPSIM_RENDER_HPP
