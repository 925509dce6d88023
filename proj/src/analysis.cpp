#include "bridgex/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "bridgex/error.hpp"
#include "bridgex/text.hpp"

namespace bridgex::analysis {

// -- MDS ------------------------------------------------------------------------

Mds2D classical_mds(const Eigen::MatrixXd& dist) {
  const auto n = dist.rows();
  if (dist.cols() != n) throw ValidationError("distance matrix must be square");
  if (n < 3) throw ValidationError("MDS needs at least 3 points");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(dist(i, i)) > 1e-9) throw ValidationError("distance matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = dist(i, j);
      if (!std::isfinite(v)) throw ValidationError("distance matrix has a non-finite entry");
      if (v < 0.0) throw ValidationError("distance matrix has a negative entry");
      if (std::abs(v - dist(j, i)) > 1e-9) throw ValidationError("distance matrix is not symmetric");
    }
  }

  const Eigen::MatrixXd d2 = dist.array().square().matrix();
  const Eigen::MatrixXd j =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd b = -0.5 * j * d2 * j;
  b = 0.5 * (b + b.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();

  Mds2D out;
  const double scale = std::max(1.0, std::abs(values(n - 1)));
  out.degenerate = values(0) < -1e-9 * scale;
  Eigen::MatrixXd coords(n, 2);
  for (int k = 0; k < 2; ++k) {
    const auto col = n - 1 - k;
    const double lambda = values(col);
    out.eigenvalues.push_back(lambda);
    Eigen::VectorXd v = vectors.col(col);
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(v(i)) > std::abs(v(pivot)) + 1e-12) pivot = i;
    if (v(pivot) < 0.0) v = -v;
    coords.col(k) = v * std::sqrt(std::max(0.0, lambda));
  }

  out.points.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.points.emplace_back(coords(i, 0), coords(i, 1));

  double err = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double r = (coords.row(i) - coords.row(k)).norm();
      err += (r - dist(i, k)) * (r - dist(i, k));
    }
  const double norm = dist.norm();
  out.stress = norm > 0.0 ? std::sqrt(err) / norm : std::sqrt(err);
  return out;
}

// -- enums ----------------------------------------------------------------------

Role parse_role(std::string_view raw) {
  const auto t = text::trim(raw);
  if (t == "input_path") return Role::input_path;
  if (t == "predicted_token") return Role::predicted_token;
  if (t == "reference_token") return Role::reference_token;
  throw ConfigError("unknown embedding role '" + std::string(t) + "'");
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::input_path: return "input_path";
    case Role::predicted_token: return "predicted_token";
    case Role::reference_token: return "reference_token";
  }
  return "input_path";
}

Metric parse_metric(std::string_view raw) {
  const auto t = text::trim(raw);
  if (t == "euclidean") return Metric::euclidean;
  if (t == "cosine_distance" || t == "cosine") return Metric::cosine_distance;
  throw ConfigError("unknown metric '" + std::string(t) + "'");
}

std::string_view to_string(Metric metric) {
  return metric == Metric::euclidean ? "euclidean" : "cosine_distance";
}

// -- trajectories -----------------------------------------------------------------

double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ShapeError("vectors differ in dimension");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw UndefinedError("cosine distance of a zero vector");
  return std::clamp(1.0 - a.dot(b) / (na * nb), 0.0, 2.0);
}

Eigen::MatrixXd distance_matrix(const std::vector<Eigen::VectorXd>& points, Metric metric) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& a = points[static_cast<std::size_t>(i)];
      const auto& b = points[static_cast<std::size_t>(j)];
      if (a.size() != b.size()) throw ShapeError("points differ in dimension");
      d(i, j) = d(j, i) = metric == Metric::euclidean ? (a - b).norm() : cosine_distance(a, b);
    }
  return d;
}

TrajectoryMds trajectory_mds(const std::vector<EmbeddingTrajectory>& trajs, Metric metric) {
  TrajectoryMds out;
  out.metric = metric;
  std::vector<Eigen::VectorXd> flat;
  std::optional<Eigen::Index> dim;
  for (const auto& t : trajs) {
    if (t.layers.size() != t.per_layer.size())
      throw ShapeError("trajectory '" + t.label + "' has mismatched layer tags");
    for (std::size_t k = 0; k < t.per_layer.size(); ++k) {
      const auto& v = t.per_layer[k];
      if (!dim) dim = v.size();
      if (v.size() != *dim)
        throw ShapeError("trajectory '" + t.label + "' layer " + std::to_string(t.layers[k]) +
                         " has dimension " + std::to_string(v.size()) + ", expected " +
                         std::to_string(*dim));
      flat.push_back(v);
      out.points.push_back({t.label, t.layers[k], t.role, Eigen::Vector2d::Zero()});
    }
  }
  if (flat.size() < 3) throw ValidationError("trajectory MDS needs at least 3 points");
  out.mds = classical_mds(distance_matrix(flat, metric));
  for (std::size_t i = 0; i < flat.size(); ++i) out.points[i].xy = out.mds.points[i];
  return out;
}

// -- embedding dumps ------------------------------------------------------------------

EmbeddingDump parse_embedding_dump(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<text::Header> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!text::trim(line).empty()) {
      header = text::parse_header(line, kEmbeddingMagic);
      break;
    }
  }
  if (!header) throw FormatError("embedding dump is empty");
  EmbeddingDump dump;
  dump.model = header->get("model", "unknown");
  dump.dim = text::parse_size(header->require("dim"), "dim");
  if (dump.dim == 0) throw FormatError("embedding dump declares dim=0");

  std::map<std::pair<std::string, Role>, std::size_t> index;
  std::vector<std::map<std::uint32_t, Eigen::VectorXd>> layers;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') throw FormatError("line " + std::to_string(line_no) + ": unexpected header");
    ++record;
    const auto f = text::split(line, '\t');
    if (f.size() != 4)
      throw FormatError("record " + std::to_string(record) + ": expected 4 tab-separated fields");
    const std::string label(text::trim(f[0]));
    const auto layer = static_cast<std::uint32_t>(text::parse_size(f[1], "layer"));
    const auto role = parse_role(f[2]);
    const auto values = text::split_whitespace(f[3]);
    if (values.size() != dump.dim)
      throw FormatError("record " + std::to_string(record) + ": " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(dump.dim));
    Eigen::VectorXd v(static_cast<Eigen::Index>(dump.dim));
    for (std::size_t k = 0; k < values.size(); ++k) {
      v(static_cast<Eigen::Index>(k)) = text::parse_double(values[k], "embedding value");
      if (!std::isfinite(v(static_cast<Eigen::Index>(k))))
        throw FormatError("record " + std::to_string(record) + ": non-finite value");
    }
    const auto key = std::make_pair(label, role);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, dump.trajectories.size()).first;
      dump.trajectories.push_back({label, role, {}, {}});
      layers.emplace_back();
    }
    if (!layers[it->second].emplace(layer, std::move(v)).second)
      throw FormatError("record " + std::to_string(record) + ": duplicate layer " +
                        std::to_string(layer) + " for '" + label + "'");
  }
  for (std::size_t t = 0; t < layers.size(); ++t)
    for (auto& [layer, v] : layers[t]) {
      dump.trajectories[t].layers.push_back(layer);
      dump.trajectories[t].per_layer.push_back(std::move(v));
    }
  return dump;
}

EmbeddingDump read_embedding_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_embedding_dump(in);
}

std::string serialize_embedding_dump(const EmbeddingDump& dump) {
  text::Header h{std::string(kEmbeddingMagic),
                 {{"dim", std::to_string(dump.dim)}, {"model", dump.model}, {"version", "1"}}};
  std::string out = text::format_header(h) + "\n";
  for (const auto& t : dump.trajectories)
    for (std::size_t k = 0; k < t.per_layer.size(); ++k) {
      if (static_cast<std::size_t>(t.per_layer[k].size()) != dump.dim)
        throw ShapeError("trajectory '" + t.label + "' does not match dim");
      out += t.label + "\t" + std::to_string(t.layers[k]) + "\t" + std::string(to_string(t.role)) + "\t";
      for (Eigen::Index i = 0; i < t.per_layer[k].size(); ++i) {
        if (i) out += ' ';
        out += text::format_double(t.per_layer[k](i));
      }
      out += '\n';
    }
  return out;
}

// -- heatmaps --------------------------------------------------------------------------

std::string format_heatmap_csv(const SpectrumMatrix& matrix) {
  std::string out = "lang";
  for (const auto& code : matrix.languages()) out += "," + text::csv_field(code);
  out += '\n';
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out += text::csv_field(matrix.languages()[i]);
    for (std::size_t j = 0; j < matrix.size(); ++j) {
      out += ',';
      if (const auto v = matrix.at(i, j)) out += text::format_fixed(*v, 3);
    }
    out += '\n';
  }
  return out;
}

void export_heatmap_csv(const SpectrumMatrix& matrix, const std::filesystem::path& path) {
  text::write_file(path, format_heatmap_csv(matrix));
}

SpectrumMatrix parse_heatmap_csv(std::string_view content) {
  std::vector<std::vector<std::string>> rows;
  for (auto line : text::split(content, '\n')) {
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    rows.push_back(text::parse_csv_line(body));
  }
  if (rows.empty()) throw FormatError("heatmap CSV is empty");
  const auto& header = rows.front();
  if (header.empty() || header.front() != "lang") throw FormatError("heatmap CSV must start with 'lang'");
  std::vector<std::string> codes(header.begin() + 1, header.end());
  if (rows.size() != codes.size() + 1) throw FormatError("heatmap CSV row count does not match header");
  SpectrumMatrix m(codes);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != codes.size() + 1 || row.front() != codes[i])
      throw FormatError("heatmap CSV row " + std::to_string(i + 1) + " is malformed");
    for (std::size_t j = i + 1; j < codes.size(); ++j) {
      const auto& upper = row[j + 1];
      const auto& lower = rows[j + 1].size() > i + 1 ? rows[j + 1][i + 1] : std::string();
      if (upper != lower) throw FormatError("heatmap CSV is not symmetric at " + codes[i] + "," + codes[j]);
      if (!upper.empty()) m.set(i, j, text::parse_double(upper, "heatmap value"));
    }
  }
  return m;
}

SpectrumMatrix read_heatmap_csv(const std::filesystem::path& path) {
  return parse_heatmap_csv(text::read_file(path));
}

// -- MDS exports ----------------------------------------------------------------------------

std::string format_mds_csv(const TrajectoryMds& result) {
  std::string out = "label,layer,role,x,y\n";
  for (const auto& p : result.points)
    out += text::csv_field(p.label) + "," + std::to_string(p.layer) + "," + std::string(to_string(p.role)) +
           "," + text::format_double(p.xy.x()) + "," + text::format_double(p.xy.y()) + "\n";
  return out;
}

std::string format_mds_summary(const TrajectoryMds& result) {
  nlohmann::ordered_json j;
  j["metric"] = std::string(to_string(result.metric));
  j["points"] = result.points.size();
  j["eigenvalues"] = result.mds.eigenvalues;
  j["stress"] = result.mds.stress;
  j["degenerate"] = result.mds.degenerate;
  return j.dump(2) + "\n";
}

}  // namespace bridgex::analysis
