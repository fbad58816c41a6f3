#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ideoscale/model.hpp"
#include "ideoscale/positions.hpp"

namespace ideoscale::ca {

enum class CoordinateKind { principal, standard };

// Latent coordinates for both sides of the bipartite graph, one row per
// entity, plus the singular values of the standardized residual operator
// they came from.
struct LatentEmbedding {
    std::vector<std::string> follower_ids;
    std::vector<std::string> elite_ids;
    std::vector<double> follower_coords; // n x k row-major
    std::vector<double> elite_coords;    // m x k
    std::vector<double> singular_values; // k, nonincreasing, in (0,1]
    std::size_t k = 0;
    CoordinateKind kind = CoordinateKind::principal;

    std::size_t n_followers() const { return follower_ids.size(); }
    std::size_t n_elites() const { return elite_ids.size(); }
    double follower_at(std::size_t i, std::size_t d) const { return follower_coords[i * k + d]; }
    double elite_at(std::size_t j, std::size_t d) const { return elite_coords[j * k + d]; }
};

struct CaConfig {
    int k_dims = 12;
    double solver_tolerance = 1e-10; // relative residual per singular triplet
    int max_iterations = 1000;       // Lanczos steps (one operator pair each)
    std::uint64_t seed = 0;
    int threads = 1;
    CoordinateKind kind = CoordinateKind::principal;
};

// Thrown when the Lanczos iteration runs out of budget; carries the worst
// relative residual reached for the wanted triplets.
struct ConvergenceError : std::runtime_error {
    double achieved_residual;
    explicit ConvergenceError(double r)
        : std::runtime_error("correspondence_analysis: no convergence within iteration budget "
                             "(achieved residual " +
                             std::to_string(r) + ")"),
          achieved_residual(r) {}
};

// Action of S = D_r^{-1/2} (P - r c^T) D_c^{-1/2} without forming it:
// a rescaled sparse matvec minus a rank-1 correction. The rank-1 part
// removes the trivial CA direction (sqrt(r), sqrt(c)) analytically.
class ResidualOp {
public:
    ResidualOp(const model::BipartiteNetwork& net, int threads);

    std::size_t rows() const { return n_; }   // followers
    std::size_t cols() const { return m_; }   // elites

    void apply(const double* x, double* y) const;            // y = S x   (m -> n)
    void apply_transpose(const double* y, double* x) const;  // x = S^T y (n -> m)

    const std::vector<double>& inv_sqrt_row_degree() const { return inv_sqrt_d_; }
    const std::vector<double>& inv_sqrt_col_degree() const { return inv_sqrt_g_; }
    double edge_total() const { return nn_; }

private:
    const model::BipartiteNetwork& net_;
    std::size_t n_, m_;
    double nn_; // total edge count
    std::vector<double> inv_sqrt_d_, inv_sqrt_g_; // 1/sqrt(degree)
    std::vector<double> sqrt_r_, sqrt_c_;         // sqrt of row/col masses
    int threads_;
    mutable std::vector<double> scratch_m_, scratch_n_;
};

// Truncated SVD of the residual operator via Lanczos bidiagonalization
// with full reorthogonalization and thick restarts; returns principal
// (or standard) coordinates for both sides. Deterministic given the seed.
LatentEmbedding correspondence_analysis(const model::BipartiteNetwork& net, const CaConfig& cfg);

// Mean elite coordinates per party. Every elite id in the map must exist
// in the embedding and every embedding elite must be labeled.
std::map<std::string, std::vector<double>> party_centroids(
    const LatentEmbedding& embedding, const std::map<std::string, std::string>& elite_party);

struct StabilityReport {
    std::vector<std::string> dimensions;
    std::vector<double> pearson; // per dimension, over shared entities
    double mean_pearson = 0.0;
};

// Per-dimension Pearson correlation between two position sets over the
// same entities (row order may differ; sets must match exactly).
StabilityReport embedding_stability(const PositionTable& a, const PositionTable& b);

// Little-endian binary cache (magic "IDEB", version 1) so a pipeline
// rerun can skip the decomposition when nothing upstream changed.
std::string embedding_to_bytes(const LatentEmbedding& e, std::uint64_t config_hash);
LatentEmbedding embedding_from_bytes(const std::string& bytes, std::uint64_t* config_hash_out = nullptr);

} // namespace ideoscale::ca
