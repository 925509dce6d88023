#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bridgex/spectrum_matrix.hpp"

// Classical MDS over latent-embedding trajectories, embedding dumps, and
// matrix exports for plotting.
namespace bridgex::analysis {

struct Mds2D {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> eigenvalues;  // the two largest of the centred matrix, descending
  double stress = 0.0;
  bool degenerate = false;  // a negative eigenvalue was clamped
};

/// Torgerson scaling to two dimensions. Throws ValidationError unless `dist`
/// is square, at least 3x3, finite, non-negative, symmetric within 1e-9 and
/// zero on the diagonal.
Mds2D classical_mds(const Eigen::MatrixXd& dist);

enum class Role { input_path, predicted_token, reference_token };
Role parse_role(std::string_view text);
std::string_view to_string(Role role);

enum class Metric { euclidean, cosine_distance };
Metric parse_metric(std::string_view text);
std::string_view to_string(Metric metric);

struct EmbeddingTrajectory {
  std::string label;
  Role role = Role::input_path;
  std::vector<std::uint32_t> layers;     // one per vector, ascending
  std::vector<Eigen::VectorXd> per_layer;
};

struct TaggedPoint {
  std::string label;
  std::uint32_t layer = 0;
  Role role = Role::input_path;
  Eigen::Vector2d xy;
};

struct TrajectoryMds {
  Mds2D mds;
  Metric metric = Metric::cosine_distance;
  std::vector<TaggedPoint> points;
};

/// 1 - cos(a, b), clamped to [0, 2]. Throws UndefinedError for a zero vector.
double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Pairwise distances over the given points.
Eigen::MatrixXd distance_matrix(const std::vector<Eigen::VectorXd>& points, Metric metric);

/// Every (trajectory, layer) vector becomes one point. Throws ShapeError on
/// a dimension mismatch and ValidationError for fewer than 3 points.
TrajectoryMds trajectory_mds(const std::vector<EmbeddingTrajectory>& trajs,
                             Metric metric = Metric::cosine_distance);

// Embedding dumps: "#bridgex-embeddings\tdim=..\tmodel=..\tversion=1" then
// "label<TAB>layer<TAB>role<TAB>space-separated values" per record.
inline constexpr std::string_view kEmbeddingMagic = "bridgex-embeddings";

struct EmbeddingDump {
  std::string model = "unknown";
  std::size_t dim = 0;
  std::vector<EmbeddingTrajectory> trajectories;  // ordered by first appearance
};

/// Groups records by (label, role); layers are sorted and must be unique.
EmbeddingDump parse_embedding_dump(std::istream& in);
EmbeddingDump read_embedding_dump(const std::filesystem::path& path);
std::string serialize_embedding_dump(const EmbeddingDump& dump);

/// "lang,<codes...>" header then one row per language; 3 decimals, empty
/// cells for missing values.
std::string format_heatmap_csv(const SpectrumMatrix& matrix);
void export_heatmap_csv(const SpectrumMatrix& matrix, const std::filesystem::path& path);
SpectrumMatrix parse_heatmap_csv(std::string_view content);
SpectrumMatrix read_heatmap_csv(const std::filesystem::path& path);

/// "label,layer,role,x,y" rows.
std::string format_mds_csv(const TrajectoryMds& result);
/// Eigenvalues, stress, degeneracy flag, metric and point count as JSON.
std::string format_mds_summary(const TrajectoryMds& result);

}  // namespace bridgex::analysis
