#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace arnet {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValueError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Model identifiers
// ---------------------------------------------------------------------------

enum class KernelId {
    degree_het,
    persistence,
    transitivity,
    transitivity_ext,
    global_ar,
    edgewise_ar,
};

inline std::string to_string(KernelId k) {
    switch (k) {
        case KernelId::degree_het: return "degree_het";
        case KernelId::persistence: return "persistence";
        case KernelId::transitivity: return "transitivity";
        case KernelId::transitivity_ext: return "transitivity_ext";
        case KernelId::global_ar: return "global_ar";
        case KernelId::edgewise_ar: return "edgewise_ar";
    }
    throw ValueError("unknown kernel id");
}

inline KernelId kernel_from_string(const std::string& s) {
    if (s == "degree_het") return KernelId::degree_het;
    if (s == "persistence") return KernelId::persistence;
    if (s == "transitivity") return KernelId::transitivity;
    if (s == "transitivity_ext") return KernelId::transitivity_ext;
    if (s == "global_ar") return KernelId::global_ar;
    if (s == "edgewise_ar") return KernelId::edgewise_ar;
    throw ValueError("unknown kernel id: \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// SnapshotSeries: n symmetric binary p x p adjacency matrices, zero diagonal.
// Node indices are 0-based internally, 1-based in files.
// ---------------------------------------------------------------------------

class SnapshotSeries {
  public:
    SnapshotSeries() = default;

    static SnapshotSeries zeros(int p, int n) {
        check_dims(p, n);
        SnapshotSeries s;
        s.p_ = p;
        s.n_ = n;
        s.cells_.assign(static_cast<std::size_t>(n) * p * p, 0);
        return s;
    }

    int p() const { return p_; }
    int n() const { return n_; }
    int num_pairs() const { return p_ * (p_ - 1) / 2; }

    std::uint8_t at(int t, int i, int j) const {
        return cells_[idx(t, i, j)];
    }

    // Sets both (i,j) and (j,i); the diagonal cannot be set.
    void set_edge(int t, int i, int j, std::uint8_t v) {
        if (i == j) throw IndexError("self-loops are not representable");
        if (v > 1) throw ValueError("edge values must be 0 or 1");
        cells_[idx(t, i, j)] = v;
        cells_[idx(t, j, i)] = v;
    }

    const std::uint8_t* snapshot(int t) const {
        return cells_.data() + static_cast<std::size_t>(t) * p_ * p_;
    }

    long edge_count(int t) const {
        long c = 0;
        const std::uint8_t* m = snapshot(t);
        for (int i = 0; i < p_; ++i)
            for (int j = i + 1; j < p_; ++j) c += m[i * p_ + j];
        return c;
    }

    // Checks symmetry, zero diagonal and 0/1 entries; throws on violation.
    void validate() const {
        check_dims(p_, n_);
        for (int t = 0; t < n_; ++t) {
            const std::uint8_t* m = snapshot(t);
            for (int i = 0; i < p_; ++i) {
                if (m[i * p_ + i] != 0) throw ValueError("nonzero diagonal entry");
                for (int j = 0; j < p_; ++j) {
                    if (m[i * p_ + j] > 1) throw ValueError("entry outside {0,1}");
                    if (m[i * p_ + j] != m[j * p_ + i]) throw ValueError("asymmetric snapshot");
                }
            }
        }
    }

    bool operator==(const SnapshotSeries& o) const {
        return p_ == o.p_ && n_ == o.n_ && cells_ == o.cells_;
    }

    // Sub-series of snapshots [t0, t1).
    SnapshotSeries slice(int t0, int t1) const {
        if (t0 < 0 || t1 > n_ || t1 - t0 < 1) throw IndexError("bad slice range");
        SnapshotSeries s;
        s.p_ = p_;
        s.n_ = t1 - t0;
        s.cells_.assign(cells_.begin() + static_cast<std::size_t>(t0) * p_ * p_,
                        cells_.begin() + static_cast<std::size_t>(t1) * p_ * p_);
        return s;
    }

  private:
    static void check_dims(int p, int n) {
        if (p < 3) throw DimensionError("node count p must be >= 3");
        if (n < 1) throw DimensionError("snapshot count n must be >= 1");
    }
    std::size_t idx(int t, int i, int j) const {
        return (static_cast<std::size_t>(t) * p_ + i) * p_ + j;
    }

    int p_ = 0;
    int n_ = 0;
    std::vector<std::uint8_t> cells_;
};

// Read-only view of one snapshot.
struct SnapshotView {
    const std::uint8_t* a = nullptr;
    int p = 0;
    std::uint8_t operator()(int i, int j) const { return a[i * p + j]; }
};

inline SnapshotView view(const SnapshotSeries& s, int t) {
    return SnapshotView{s.snapshot(t), s.p()};
}

// ---------------------------------------------------------------------------
// Canonical enumeration of unordered pairs (i < j), row-major in i.
// ---------------------------------------------------------------------------

inline int pair_count(int p) { return p * (p - 1) / 2; }

inline int pair_index(int p, int i, int j) {
    // requires i < j
    return i * p - i * (i + 1) / 2 + (j - i - 1);
}

struct PairList {
    explicit PairList(int p) : p(p) {
        i_of.reserve(pair_count(p));
        j_of.reserve(pair_count(p));
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) {
                i_of.push_back(i);
                j_of.push_back(j);
            }
    }
    int p;
    std::vector<int> i_of, j_of;
};

// ---------------------------------------------------------------------------
// ParameterIndex: the global set G, per-parameter edge scopes S_l and
// per-edge parameter scopes I_{i,j} for the built-in kernels.
// ---------------------------------------------------------------------------

struct SlotList {
    int n = 0;
    std::array<int, 8> idx{};
    int operator[](int s) const { return idx[s]; }
};

// How the local block is laid out after the global block.
enum class LocalLayout {
    none,       // globals only
    node_pair,  // xi_1..xi_p then eta_1..eta_p
    per_edge,   // (alpha_e, beta_e) per unordered pair
};

class ParameterIndex {
  public:
    ParameterIndex() = default;

    ParameterIndex(int p, int n_global, LocalLayout layout,
                   std::vector<std::string> global_names = {})
        : p_(p), n_global_(n_global), layout_(layout), global_names_(std::move(global_names)) {
        if (p < 3) throw DimensionError("parameter index requires p >= 3");
        switch (layout) {
            case LocalLayout::none: q_ = n_global; break;
            case LocalLayout::node_pair: q_ = n_global + 2 * p; break;
            case LocalLayout::per_edge: q_ = n_global + p * (p - 1); break;
        }
    }

    ParameterIndex(KernelId kernel, int p) : ParameterIndex(make_builtin(kernel, p)) {
        kernel_ = kernel;
    }

    KernelId kernel() const { return kernel_; }
    int p() const { return p_; }
    int q() const { return q_; }
    int n_global() const { return n_global_; }
    LocalLayout layout() const { return layout_; }
    bool has_locals() const { return q_ > n_global_; }

    bool is_global(int l) const { return l < n_global_; }

    // index of xi_i / eta_i (0-based node i); only for node_pair layouts
    int xi_index(int i) const { return n_global_ + i; }
    int eta_index(int i) const { return n_global_ + p_ + i; }

    // Parameters involved in edge (i,j)'s transition probability.
    SlotList params_of_edge(int i, int j) const {
        SlotList s;
        s.n = n_global_;
        for (int g = 0; g < n_global_; ++g) s.idx[g] = g;
        switch (layout_) {
            case LocalLayout::none: break;
            case LocalLayout::node_pair:
                s.idx[s.n++] = xi_index(i);
                s.idx[s.n++] = xi_index(j);
                s.idx[s.n++] = eta_index(i);
                s.idx[s.n++] = eta_index(j);
                break;
            case LocalLayout::per_edge: {
                const int e = pair_index(p_, i, j);
                s.idx[s.n++] = n_global_ + 2 * e;
                s.idx[s.n++] = n_global_ + 2 * e + 1;
                break;
            }
        }
        return s;
    }

    long s_size(int l) const {
        if (is_global(l)) return pair_count(p_);
        if (layout_ == LocalLayout::per_edge) return 1;
        return p_ - 1;
    }

    // Iterates over S_l as (i, j) pairs with i < j.
    template <class F>
    void for_each_edge(int l, F&& f) const {
        if (is_global(l)) {
            for (int i = 0; i < p_; ++i)
                for (int j = i + 1; j < p_; ++j) f(i, j);
            return;
        }
        if (layout_ == LocalLayout::per_edge) {
            PairList pl(p_);  // small p expected for this layout
            int e = (l - n_global_) / 2;
            f(pl.i_of[e], pl.j_of[e]);
            return;
        }
        int node = local_node(l);
        for (int j = 0; j < p_; ++j) {
            if (j == node) continue;
            f(std::min(node, j), std::max(node, j));
        }
    }

    std::vector<std::pair<int, int>> edges_of(int l) const {
        std::vector<std::pair<int, int>> out;
        for_each_edge(l, [&](int i, int j) { out.emplace_back(i, j); });
        return out;
    }

    bool involves(int l, int i, int j) const {
        SlotList s = params_of_edge(i, j);
        for (int k = 0; k < s.n; ++k)
            if (s.idx[k] == l) return true;
        return false;
    }

    std::string name(int l) const {
        if (l < 0 || l >= q_) throw IndexError("parameter index out of range");
        if (l < n_global_)
            return l < static_cast<int>(global_names_.size()) ? global_names_[l]
                                                              : "g" + std::to_string(l + 1);
        if (layout_ == LocalLayout::per_edge) {
            PairList pl(p_);
            int e = (l - n_global_) / 2;
            std::string base = ((l - n_global_) % 2 == 0) ? "alpha_" : "beta_";
            return base + std::to_string(pl.i_of[e] + 1) + "_" + std::to_string(pl.j_of[e] + 1);
        }
        int k = l - n_global_;
        if (k < p_) return "xi_" + std::to_string(k + 1);
        return "eta_" + std::to_string(k - p_ + 1);
    }

  private:
    static ParameterIndex make_builtin(KernelId kernel, int p) {
        switch (kernel) {
            case KernelId::degree_het:
                return ParameterIndex(p, 4, LocalLayout::node_pair, {"a0", "a1", "b0", "b1"});
            case KernelId::transitivity_ext:
                return ParameterIndex(p, 4, LocalLayout::node_pair, {"a1", "b1", "a2", "b2"});
            case KernelId::transitivity:
            case KernelId::persistence:
                return ParameterIndex(p, 2, LocalLayout::node_pair, {"a", "b"});
            case KernelId::global_ar:
                return ParameterIndex(p, 2, LocalLayout::none, {"alpha", "beta"});
            case KernelId::edgewise_ar:
                return ParameterIndex(p, 0, LocalLayout::per_edge);
        }
        throw ValueError("unknown kernel id");
    }

    int local_node(int l) const {
        int k = l - n_global_;
        return k < p_ ? k : k - p_;
    }

    KernelId kernel_ = KernelId::transitivity;
    int p_ = 0;
    int q_ = 0;
    int n_global_ = 0;
    LocalLayout layout_ = LocalLayout::node_pair;
    std::vector<std::string> global_names_;
};

inline ParameterIndex build_index(KernelId kernel, int p) {
    return ParameterIndex(kernel, p);
}

// ---------------------------------------------------------------------------
// ParameterSet: full parameter vector with the block layout of its kernel.
// ---------------------------------------------------------------------------

struct ParameterSet {
    ParameterSet() = default;
    ParameterSet(ParameterIndex index, std::vector<double> values)
        : index(std::move(index)), values(std::move(values)) {
        if (static_cast<int>(this->values.size()) != this->index.q())
            throw DimensionError("parameter vector length does not match kernel layout");
    }

    static ParameterSet constant(const ParameterIndex& idx, double global_value,
                                 double xi, double eta) {
        std::vector<double> v(idx.q());
        for (int l = 0; l < idx.n_global(); ++l) v[l] = global_value;
        if (idx.layout() == LocalLayout::node_pair) {
            for (int i = 0; i < idx.p(); ++i) {
                v[idx.xi_index(i)] = xi;
                v[idx.eta_index(i)] = eta;
            }
        }
        return ParameterSet(idx, std::move(v));
    }

    double global(int g) const { return values[g]; }
    double xi(int i) const { return values[index.xi_index(i)]; }
    double eta(int i) const { return values[index.eta_index(i)]; }
    void set_xi(int i, double v) { values[index.xi_index(i)] = v; }
    void set_eta(int i, double v) { values[index.eta_index(i)] = v; }

    ParameterIndex index;
    std::vector<double> values;
};

// Per-coordinate box bounds.
struct Box {
    std::vector<double> lo, hi;
    double clamp(int k, double x) const {
        if (x < lo[k]) return lo[k];
        if (x > hi[k]) return hi[k];
        return x;
    }
};

}  // namespace arnet
