#include "ideoscale/ca.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ideoscale/kernels.hpp"
#include "ideoscale/linalg.hpp"
#include "ideoscale/parallel.hpp"
#include "ideoscale/rng.hpp"
#include "ideoscale/stats.hpp"

namespace ideoscale::ca {

ResidualOp::ResidualOp(const model::BipartiteNetwork& net, int threads)
    : net_(net), n_(net.n_followers()), m_(net.n_elites()), threads_(threads) {
    nn_ = static_cast<double>(net.edge_count());
    if (nn_ <= 0) throw std::invalid_argument("residual operator: network has no edges");
    inv_sqrt_d_.resize(n_);
    sqrt_r_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        const double d = static_cast<double>(net.out_degree(i));
        if (d <= 0) throw std::invalid_argument("residual operator: follower with zero degree");
        inv_sqrt_d_[i] = 1.0 / std::sqrt(d);
        sqrt_r_[i] = std::sqrt(d / nn_);
    }
    inv_sqrt_g_.resize(m_);
    sqrt_c_.resize(m_);
    for (std::size_t j = 0; j < m_; ++j) {
        const double g = static_cast<double>(net.in_degree(j));
        if (g <= 0) throw std::invalid_argument("residual operator: elite with zero degree");
        inv_sqrt_g_[j] = 1.0 / std::sqrt(g);
        sqrt_c_[j] = std::sqrt(g / nn_);
    }
    scratch_m_.resize(m_);
    scratch_n_.resize(n_);
}

void ResidualOp::apply(const double* x, double* y) const {
    double* xs = const_cast<double*>(scratch_m_.data());
    for (std::size_t j = 0; j < m_; ++j) xs[j] = x[j] * inv_sqrt_g_[j];
    const double trivial = kernels::dot(sqrt_c_.data(), x, m_);
    parallel_for(n_, threads_, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto b = static_cast<std::size_t>(net_.row_ptr[i]);
            const auto e = static_cast<std::size_t>(net_.row_ptr[i + 1]);
            y[i] = inv_sqrt_d_[i] * kernels::gather_sum(net_.col_idx.data() + b, e - b, xs) -
                   sqrt_r_[i] * trivial;
        }
    });
}

void ResidualOp::apply_transpose(const double* y, double* x) const {
    double* ys = const_cast<double*>(scratch_n_.data());
    for (std::size_t i = 0; i < n_; ++i) ys[i] = y[i] * inv_sqrt_d_[i];
    const double trivial = kernels::dot(sqrt_r_.data(), y, n_);
    parallel_for(m_, threads_, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            const auto b = static_cast<std::size_t>(net_.colt_ptr[j]);
            const auto e = static_cast<std::size_t>(net_.colt_ptr[j + 1]);
            x[j] = inv_sqrt_g_[j] * kernels::gather_sum(net_.rowt_idx.data() + b, e - b, ys) -
                   sqrt_c_[j] * trivial;
        }
    });
}

namespace {

// Column-major panel of long vectors.
struct Panel {
    std::size_t len = 0;
    std::vector<double> data; // cols x len
    std::size_t cols = 0;

    Panel(std::size_t length, std::size_t max_cols) : len(length), data(length * max_cols) {}
    double* col(std::size_t j) { return data.data() + j * len; }
    const double* col(std::size_t j) const { return data.data() + j * len; }
};

// Classical Gram-Schmidt against the first `ncols` columns, with the
// usual second pass when the norm collapses. Returns the final norm.
double orthogonalize(double* w, std::size_t len, const Panel& basis, std::size_t ncols) {
    double before = std::sqrt(kernels::sumsq(w, len));
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < ncols; ++i) {
            const double c = kernels::dot(basis.col(i), w, len);
            kernels::axpy(-c, basis.col(i), w, len);
        }
        const double after = std::sqrt(kernels::sumsq(w, len));
        if (after > 0.70710678 * before) return after;
        before = after;
    }
    return before;
}

struct RitzState {
    linalg::SvdResult svd; // of the small projected matrix
    double beta_last = 0.0;
    std::size_t filled = 0;
};

} // namespace

LatentEmbedding correspondence_analysis(const model::BipartiteNetwork& net, const CaConfig& cfg) {
    const std::size_t n = net.n_followers();
    const std::size_t m = net.n_elites();
    if (n == 0 || m == 0) throw std::invalid_argument("correspondence_analysis: empty network");
    const std::size_t min_nm = std::min(n, m);
    const std::size_t k = static_cast<std::size_t>(cfg.k_dims);
    if (cfg.k_dims < 1 || k > min_nm - 1)
        throw std::invalid_argument("correspondence_analysis: k_dims must lie in [1, min(N,M)-1]");
    if (cfg.solver_tolerance <= 0)
        throw std::invalid_argument("correspondence_analysis: tolerance must be positive");

    const ResidualOp op(net, cfg.threads);
    const std::size_t work = std::min(min_nm, std::max(2 * k + 2, k + 7));

    Panel u_basis(n, work);
    Panel v_basis(m, work + 1);
    linalg::Mat small(work, work);

    // seeded start vector on the elite side
    {
        rng::Rng gen(cfg.seed ^ 0x1dc0ffee5eedULL);
        double* v0 = v_basis.col(0);
        for (std::size_t j = 0; j < m; ++j) v0[j] = gen.normal();
        const double nrm = std::sqrt(kernels::sumsq(v0, m));
        kernels::scale(1.0 / nrm, v0, m);
    }

    const double breakdown_tol = 1e-13;
    std::vector<double> w_n(n), w_m(m);

    // On breakdown (a Krylov direction exactly exhausted, e.g. with tied
    // singular values) the iteration continues from a fresh random
    // direction and records a zero coefficient; the projected matrix
    // B = U^T S V stays exact either way. When no orthogonal direction
    // is left the factorization covers the whole space and the Ritz
    // values are the exact ones.
    rng::Rng insert_gen(cfg.seed ^ 0xb7ea6d0717ULL);
    auto random_orthogonal = [&](double* w, std::size_t len, const Panel& basis,
                                 std::size_t ncols) -> bool {
        for (int attempt = 0; attempt < 4; ++attempt) {
            for (std::size_t i = 0; i < len; ++i) w[i] = insert_gen.normal();
            const double nrm = orthogonalize(w, len, basis, ncols);
            if (nrm > 1e-6 * std::sqrt(static_cast<double>(len))) {
                kernels::scale(1.0 / nrm, w, len);
                return true;
            }
        }
        return false;
    };

    std::size_t j_start = 0;
    std::size_t filled = 0; // complete (u, v) column pairs
    double beta_last = 0.0;
    bool space_full = false; // no orthogonal direction left, B exact
    int steps = 0;
    double worst_residual = std::numeric_limits<double>::infinity();

    RitzState ritz;
    for (;;) {
        // -- extend the factorization up to `work` columns
        for (std::size_t j = j_start; j < work && !space_full; ++j) {
            if (steps++ >= cfg.max_iterations) throw ConvergenceError(worst_residual);

            op.apply(v_basis.col(j), w_n.data());
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t i = 0; i < j; ++i) {
                    const double c = kernels::dot(u_basis.col(i), w_n.data(), n);
                    kernels::axpy(-c, u_basis.col(i), w_n.data(), n);
                    small(i, j) += c;
                }
            }
            const double alpha = std::sqrt(kernels::sumsq(w_n.data(), n));
            if (alpha >= breakdown_tol) {
                small(j, j) = alpha;
                kernels::scale(1.0 / alpha, w_n.data(), n);
            } else {
                small(j, j) = 0.0;
                if (!random_orthogonal(w_n.data(), n, u_basis, j)) {
                    // keeps the previous column's beta as the residual link
                    space_full = true;
                    filled = j;
                    break;
                }
            }
            std::memcpy(u_basis.col(j), w_n.data(), n * sizeof(double));

            op.apply_transpose(u_basis.col(j), w_m.data());
            const double beta = orthogonalize(w_m.data(), m, v_basis, j + 1);
            filled = j + 1;
            if (beta >= breakdown_tol) {
                beta_last = beta;
                kernels::scale(1.0 / beta, w_m.data(), m);
                std::memcpy(v_basis.col(j + 1), w_m.data(), m * sizeof(double));
            } else {
                beta_last = 0.0;
                if (!random_orthogonal(w_m.data(), m, v_basis, j + 1)) {
                    space_full = true;
                    break;
                }
                std::memcpy(v_basis.col(j + 1), w_m.data(), m * sizeof(double));
            }
            // the superdiagonal entry B[j][j+1] = beta is recorded by the
            // projection pass of the next column, not written here
        }

        // -- Rayleigh-Ritz on the projected matrix
        linalg::Mat proj(filled, filled);
        for (std::size_t i = 0; i < filled; ++i)
            for (std::size_t j2 = 0; j2 < filled; ++j2) proj(i, j2) = small(i, j2);
        ritz.svd = linalg::jacobi_svd(proj);
        ritz.beta_last = beta_last;
        ritz.filled = filled;

        if (filled < k) {
            if (space_full) throw std::runtime_error("correspondence_analysis: k_dims exceeds rank");
            throw ConvergenceError(worst_residual);
        }

        const double sigma_max = std::max(ritz.svd.sigma[0], 1e-300);
        worst_residual = 0.0;
        bool all_converged = true;
        for (std::size_t i = 0; i < k; ++i) {
            const double res = std::abs(ritz.beta_last * ritz.svd.u(filled - 1, i)) / sigma_max;
            worst_residual = std::max(worst_residual, res);
            if (res > cfg.solver_tolerance) all_converged = false;
        }
        if (all_converged || space_full || filled >= min_nm) break;

        // -- thick restart: keep extra Ritz triplets beyond the wanted k
        const std::size_t keep = std::min(filled - 2, k + 5);
        Panel new_u(n, work), new_v(m, work + 1);
        for (std::size_t t = 0; t < keep; ++t) {
            double* uc = new_u.col(t);
            double* vc = new_v.col(t);
            std::fill(uc, uc + n, 0.0);
            std::fill(vc, vc + m, 0.0);
            for (std::size_t i = 0; i < filled; ++i) {
                kernels::axpy(ritz.svd.u(i, t), u_basis.col(i), uc, n);
                kernels::axpy(ritz.svd.v(i, t), v_basis.col(i), vc, m);
            }
        }
        std::memcpy(new_v.col(keep), v_basis.col(filled), m * sizeof(double));
        u_basis = std::move(new_u);
        v_basis = std::move(new_v);
        // column `keep` of the projected matrix is refilled by the actual
        // projections of S v_keep in the next extension sweep
        small = linalg::Mat(work, work);
        for (std::size_t t = 0; t < keep; ++t) small(t, t) = ritz.svd.sigma[t];
        j_start = keep;
        filled = keep;
    }

    // -- rank check and coordinate assembly
    const double sigma_max = std::max(ritz.svd.sigma[0], 1e-300);
    for (std::size_t i = 0; i < k; ++i) {
        if (ritz.svd.sigma[i] < 1e-10 * sigma_max || ritz.svd.sigma[i] < 1e-14)
            throw std::runtime_error("correspondence_analysis: k_dims exceeds numerical rank");
    }

    LatentEmbedding emb;
    emb.follower_ids = net.follower_ids;
    emb.elite_ids = net.elite_ids;
    emb.k = k;
    emb.kind = cfg.kind;
    emb.singular_values.resize(k);
    emb.follower_coords.assign(n * k, 0.0);
    emb.elite_coords.assign(m * k, 0.0);

    std::vector<double> u_full(n), v_full(m);
    const double sqrt_nn = std::sqrt(op.edge_total());
    for (std::size_t t = 0; t < k; ++t) {
        double sigma = ritz.svd.sigma[t];
        if (sigma > 1.0) {
            if (sigma > 1.0 + 1e-8)
                throw std::runtime_error("correspondence_analysis: singular value above CA bound");
            sigma = 1.0;
        }
        emb.singular_values[t] = sigma;

        std::fill(u_full.begin(), u_full.end(), 0.0);
        std::fill(v_full.begin(), v_full.end(), 0.0);
        for (std::size_t i = 0; i < ritz.filled; ++i) {
            kernels::axpy(ritz.svd.u(i, t), u_basis.col(i), u_full.data(), n);
            kernels::axpy(ritz.svd.v(i, t), v_basis.col(i), v_full.data(), m);
        }

        // orientation: largest-magnitude elite entry made positive
        std::size_t arg = 0;
        for (std::size_t j = 1; j < m; ++j)
            if (std::abs(v_full[j]) > std::abs(v_full[arg])) arg = j;
        const double flip = v_full[arg] < 0 ? -1.0 : 1.0;

        const double fm = cfg.kind == CoordinateKind::principal ? sigma : 1.0;
        for (std::size_t i = 0; i < n; ++i)
            emb.follower_coords[i * k + t] =
                flip * u_full[i] * sqrt_nn * op.inv_sqrt_row_degree()[i] * fm;
        for (std::size_t j = 0; j < m; ++j)
            emb.elite_coords[j * k + t] =
                flip * v_full[j] * sqrt_nn * op.inv_sqrt_col_degree()[j] * fm;
    }
    return emb;
}

std::map<std::string, std::vector<double>> party_centroids(
    const LatentEmbedding& embedding, const std::map<std::string, std::string>& elite_party) {
    std::map<std::string, std::vector<double>> sums;
    std::map<std::string, std::size_t> counts;
    const std::size_t k = embedding.k;

    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t j = 0; j < embedding.n_elites(); ++j) row_of[embedding.elite_ids[j]] = j;

    for (const auto& [id, party] : elite_party) {
        auto it = row_of.find(id);
        if (it == row_of.end())
            throw std::runtime_error("party_centroids: unknown elite id '" + id + "'");
        auto& acc = sums[party];
        if (acc.empty()) acc.assign(k, 0.0);
        for (std::size_t d = 0; d < k; ++d) acc[d] += embedding.elite_at(it->second, d);
        counts[party]++;
    }
    for (std::size_t j = 0; j < embedding.n_elites(); ++j)
        if (!elite_party.count(embedding.elite_ids[j]))
            throw std::runtime_error("party_centroids: elite '" + embedding.elite_ids[j] +
                                     "' has no party label");

    for (auto& [party, acc] : sums) {
        const double c = static_cast<double>(counts[party]);
        for (auto& x : acc) x /= c;
    }
    return sums;
}

StabilityReport embedding_stability(const PositionTable& a, const PositionTable& b) {
    if (a.n_rows() != b.n_rows())
        throw std::runtime_error("embedding_stability: entity sets differ in size");
    if (a.dimensions != b.dimensions)
        throw std::runtime_error("embedding_stability: dimension lists differ");

    const auto& rows_b = b.id_rows();
    std::vector<std::size_t> b_row(a.n_rows());
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        auto it = rows_b.find(a.ids[i]);
        if (it == rows_b.end())
            throw std::runtime_error("embedding_stability: entity '" + a.ids[i] +
                                     "' missing from second set");
        b_row[i] = it->second;
    }

    StabilityReport rep;
    rep.dimensions = a.dimensions;
    std::vector<double> xa(a.n_rows()), xb(a.n_rows());
    for (std::size_t d = 0; d < a.n_dims(); ++d) {
        for (std::size_t i = 0; i < a.n_rows(); ++i) {
            xa[i] = a.at(i, d);
            xb[i] = b.at(b_row[i], d);
        }
        rep.pearson.push_back(stats::pearson(xa, xb));
    }
    double s = 0;
    for (double r : rep.pearson) s += r;
    rep.mean_pearson = rep.pearson.empty() ? 0.0 : s / static_cast<double>(rep.pearson.size());
    return rep;
}

// ------------------------------------------------------------- bin cache --

namespace {

void put_u64(std::string& s, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    s.append(buf, 8);
}

std::uint64_t get_u64(const std::string& s, std::size_t& pos) {
    if (pos + 8 > s.size()) throw std::runtime_error("embedding cache: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
    pos += 8;
    return v;
}

void put_f64(std::string& s, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(s, v);
}

double get_f64(const std::string& s, std::size_t& pos) {
    const std::uint64_t v = get_u64(s, pos);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

void put_str(std::string& s, const std::string& x) {
    put_u64(s, x.size());
    s += x;
}

std::string get_str(const std::string& s, std::size_t& pos) {
    const auto len = get_u64(s, pos);
    if (pos + len > s.size()) throw std::runtime_error("embedding cache: truncated string");
    std::string out = s.substr(pos, len);
    pos += len;
    return out;
}

} // namespace

std::string embedding_to_bytes(const LatentEmbedding& e, std::uint64_t config_hash) {
    std::string s;
    s += "IDEB";
    s.push_back('\x01'); // version
    s.push_back(e.kind == CoordinateKind::principal ? '\x00' : '\x01');
    put_u64(s, config_hash);
    put_u64(s, e.n_followers());
    put_u64(s, e.n_elites());
    put_u64(s, e.k);
    for (double sv : e.singular_values) put_f64(s, sv);
    for (const auto& id : e.follower_ids) put_str(s, id);
    for (const auto& id : e.elite_ids) put_str(s, id);
    for (double x : e.follower_coords) put_f64(s, x);
    for (double x : e.elite_coords) put_f64(s, x);
    return s;
}

LatentEmbedding embedding_from_bytes(const std::string& bytes, std::uint64_t* config_hash_out) {
    if (bytes.size() < 6 || bytes.compare(0, 4, "IDEB") != 0)
        throw std::runtime_error("embedding cache: bad magic");
    if (bytes[4] != '\x01') throw std::runtime_error("embedding cache: unsupported version");
    LatentEmbedding e;
    e.kind = bytes[5] == '\x00' ? CoordinateKind::principal : CoordinateKind::standard;
    std::size_t pos = 6;
    const std::uint64_t hash = get_u64(bytes, pos);
    if (config_hash_out) *config_hash_out = hash;
    const auto n = get_u64(bytes, pos);
    const auto m = get_u64(bytes, pos);
    e.k = get_u64(bytes, pos);
    e.singular_values.resize(e.k);
    for (auto& sv : e.singular_values) sv = get_f64(bytes, pos);
    e.follower_ids.resize(n);
    for (auto& id : e.follower_ids) id = get_str(bytes, pos);
    e.elite_ids.resize(m);
    for (auto& id : e.elite_ids) id = get_str(bytes, pos);
    e.follower_coords.resize(n * e.k);
    for (auto& x : e.follower_coords) x = get_f64(bytes, pos);
    e.elite_coords.resize(m * e.k);
    for (auto& x : e.elite_coords) x = get_f64(bytes, pos);
    if (pos != bytes.size()) throw std::runtime_error("embedding cache: trailing bytes");
    return e;
}

} // namespace ideoscale::ca
