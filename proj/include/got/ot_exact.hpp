#pragma once

// Exact discrete 1-Wasserstein distance with Euclidean ground cost.
//
// Primal network simplex on the complete bipartite transportation graph
// (sources -> sinks, uncapacitated arcs). The spanning tree is kept in
// thread-index form (parent / thread / succ_num / last_succ), the initial
// basis is the northwest-corner rule arranged as a strongly feasible tree,
// and entering arcs come from a cyclic block search. Arc costs are cached
// only when the instance is small enough; otherwise they are recomputed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "got/errors.hpp"
#include "got/measures.hpp"

namespace got {

struct CouplingEntry {
    std::size_t i = 0;
    std::size_t j = 0;
    double mass = 0.0;
};

struct TransportSolution {
    double cost = 0.0;
    std::vector<CouplingEntry> coupling;
    std::vector<double> dual_f;
    std::vector<double> dual_g;
    long long iterations = 0;
};

struct SolverOptions {
    long long max_iterations = -1;           // < 0: 1000 (n + m) + 100000
    std::size_t cost_cache_limit = 4'000'000;  // cache the cost matrix up to this many entries
};

namespace detail {

class NetworkSimplex {
public:
    NetworkSimplex(const PointCloud& src, std::span<const double> supply, const PointCloud& dst,
                   std::span<const double> demand, const SolverOptions& opts)
        : src_(src), dst_(dst), n_(src.size()), m_(dst.size()), dim_(src.dim()) {
        const std::size_t nodes = n_ + m_ + 1;
        root_ = static_cast<int>(n_ + m_);
        parent_.assign(nodes, -1);
        pred_.assign(nodes, kArtificial);
        thread_.assign(nodes, 0);
        rev_thread_.assign(nodes, 0);
        succ_num_.assign(nodes, 1);
        last_succ_.assign(nodes, 0);
        dir_.assign(nodes, kUp);
        pi_.assign(nodes, 0.0);
        flow_.assign(nodes, 0.0);

        const std::size_t arcs = n_ * m_;
        if (arcs <= opts.cost_cache_limit) {
            cost_cache_.resize(arcs);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < m_; ++j) cost_cache_[i * m_ + j] = euclidean(src_[i], dst_[j]);
        }
        max_iter_ = opts.max_iterations >= 0 ? opts.max_iterations
                                             : 1000LL * static_cast<long long>(n_ + m_) + 100000LL;
        block_size_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(arcs))));
        eps_ = 1e-12 * (1.0 + cost_scale());
        init_northwest(supply, demand);
    }

    void run() {
        while (find_entering_arc()) {
            if (iterations_ >= max_iter_)
                throw SolverError("network simplex: iteration cap of " + std::to_string(max_iter_) +
                                      " reached on a " + std::to_string(n_) + "x" + std::to_string(m_) + " instance",
                                  iterations_);
            ++iterations_;
            find_join_node();
            find_leaving_arc();
            change_flow();
            update_tree_structure();
            update_potential();
        }
    }

    long long iterations() const noexcept { return iterations_; }

    double arc_cost(std::size_t i, std::size_t j) const {
        return cost_cache_.empty() ? euclidean(src_[i], dst_[j]) : cost_cache_[i * m_ + j];
    }

    /// Basic arcs as (source, sink, flow), flow clamped at 0.
    template <class F>
    void for_each_basic_arc(F&& f) const {
        for (std::size_t u = 0; u < n_ + m_; ++u) {
            const std::int64_t e = pred_[u];
            if (e == kArtificial) continue;
            f(static_cast<std::size_t>(e) / m_, static_cast<std::size_t>(e) % m_, std::max(0.0, flow_[u]));
        }
    }

    double source_potential(std::size_t i) const { return -pi_[i]; }
    double sink_potential(std::size_t j) const { return pi_[n_ + j]; }

private:
    static constexpr std::int64_t kArtificial = -1;
    static constexpr int kUp = 1;     // tree arc points from the node to its parent
    static constexpr int kDown = -1;  // tree arc points from the parent to the node

    double cost_scale() const {
        if (n_ == 0 || m_ == 0) return 0.0;
        double s = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (std::size_t i = 0; i < n_; ++i) lo = std::min(lo, src_[i][k]), hi = std::max(hi, src_[i][k]);
            for (std::size_t j = 0; j < m_; ++j) lo = std::min(lo, dst_[j][k]), hi = std::max(hi, dst_[j][k]);
            s += (hi - lo) * (hi - lo);
        }
        return std::sqrt(s);
    }

    int sink_node(std::size_t j) const { return static_cast<int>(n_ + j); }

    double pred_cost(int u) const {
        const std::int64_t e = pred_[u];
        if (e == kArtificial) return 0.0;
        return arc_cost(static_cast<std::size_t>(e) / m_, static_cast<std::size_t>(e) % m_);
    }

    // Northwest-corner basis. On a simultaneous row/column exhaustion the
    // zero-flow cell advances the row, so that every zero-flow arc points
    // toward the root and the tree is strongly feasible. Requires strictly
    // positive supplies and demands.
    void init_northwest(std::span<const double> supply, std::span<const double> demand) {
        parent_[0] = root_;
        pred_[0] = kArtificial;
        dir_[0] = kUp;
        flow_[0] = 0.0;

        std::size_t i = 0, j = 0;
        double row = supply[0], col = demand[0];
        // (0, 0): sink 0 hangs below source 0.
        auto attach_sink = [&](std::size_t si, std::size_t tj, double f) {
            const int v = sink_node(tj);
            parent_[v] = static_cast<int>(si);
            pred_[v] = static_cast<std::int64_t>(si * m_ + tj);
            dir_[v] = kDown;
            flow_[v] = f;
        };
        auto attach_source = [&](std::size_t si, std::size_t tj, double f) {
            const int v = static_cast<int>(si);
            parent_[v] = sink_node(tj);
            pred_[v] = static_cast<std::int64_t>(si * m_ + tj);
            dir_[v] = kUp;
            flow_[v] = f;
        };
        double f = std::min(row, col);
        attach_sink(0, 0, f);
        row -= f;
        col -= f;
        while (i + 1 < n_ || j + 1 < m_) {
            const bool advance_row = (j + 1 == m_) || (i + 1 < n_ && row <= col);
            if (advance_row) {
                ++i;
                row = supply[i];
                f = std::min(row, std::max(col, 0.0));
                attach_source(i, j, f);
            } else {
                ++j;
                col = demand[j];
                f = std::min(std::max(row, 0.0), col);
                attach_sink(i, j, f);
            }
            row -= f;
            col -= f;
        }
        rebuild_thread();
    }

    void rebuild_thread() {
        const std::size_t nodes = n_ + m_ + 1;
        std::vector<int> child_count(nodes, 0), child_start(nodes + 1, 0), children(nodes);
        for (std::size_t u = 0; u < nodes; ++u)
            if (parent_[u] >= 0) ++child_count[parent_[u]];
        for (std::size_t u = 0; u < nodes; ++u) child_start[u + 1] = child_start[u] + child_count[u];
        std::vector<int> fill(child_start.begin(), child_start.end() - 1);
        for (std::size_t u = 0; u < nodes; ++u)
            if (parent_[u] >= 0) children[fill[parent_[u]]++] = static_cast<int>(u);

        std::vector<int> order;
        order.reserve(nodes);
        std::vector<int> stack{root_};
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            order.push_back(u);
            for (int k = child_start[u + 1] - 1; k >= child_start[u]; --k) stack.push_back(children[k]);
        }
        std::vector<int> pos(nodes);
        for (std::size_t k = 0; k < nodes; ++k) pos[order[k]] = static_cast<int>(k);
        for (std::size_t k = nodes; k-- > 0;) {
            const int u = order[k];
            int cnt = 1;
            for (int c = child_start[u]; c < child_start[u + 1]; ++c) cnt += succ_num_[children[c]];
            succ_num_[u] = cnt;
        }
        for (std::size_t k = 0; k < nodes; ++k) {
            const int u = order[k];
            const int v = order[(k + 1) % nodes];
            thread_[u] = v;
            rev_thread_[v] = u;
            last_succ_[u] = order[pos[u] + succ_num_[u] - 1];
        }
        pi_[root_] = 0.0;
        for (std::size_t k = 1; k < nodes; ++k) {
            const int u = order[k];
            const int p = parent_[u];
            pi_[u] = dir_[u] == kUp ? pi_[p] - pred_cost(u) : pi_[p] + pred_cost(u);
        }
    }

    bool find_entering_arc() {
        const std::size_t arcs = n_ * m_;
        double best = -eps_;
        bool found = false;
        std::size_t cnt = block_size_;
        std::size_t e = next_arc_;
        std::size_t i = e / m_, j = e % m_;
        for (std::size_t scanned = 0; scanned < arcs; ++scanned) {
            const double rc = arc_cost(i, j) + pi_[i] - pi_[n_ + j];
            if (rc < best) {
                best = rc;
                in_arc_ = e;
                found = true;
            }
            ++e;
            if (++j == m_) {
                j = 0;
                if (++i == n_) i = 0, e = 0;
            }
            if (--cnt == 0) {
                if (found) break;
                cnt = block_size_;
            }
        }
        next_arc_ = e;
        return found;
    }

    void find_join_node() {
        int u = static_cast<int>(in_arc_ / m_);
        int v = sink_node(in_arc_ % m_);
        while (u != v) {
            if (succ_num_[u] < succ_num_[v])
                u = parent_[u];
            else
                v = parent_[v];
        }
        join_ = u;
    }

    void find_leaving_arc() {
        first_ = static_cast<int>(in_arc_ / m_);
        second_ = sink_node(in_arc_ % m_);
        delta_ = std::numeric_limits<double>::infinity();
        int result = 0;
        for (int u = first_; u != join_; u = parent_[u]) {
            if (dir_[u] == kUp && flow_[u] < delta_) {
                delta_ = flow_[u];
                u_out_ = u;
                result = 1;
            }
        }
        for (int u = second_; u != join_; u = parent_[u]) {
            if (dir_[u] == kDown && flow_[u] <= delta_) {
                delta_ = flow_[u];
                u_out_ = u;
                result = 2;
            }
        }
        if (result == 0) throw SolverError("network simplex: unbounded pivot cycle", iterations_);
        if (result == 1) {
            u_in_ = first_;
            v_in_ = second_;
        } else {
            u_in_ = second_;
            v_in_ = first_;
        }
        delta_ = std::max(delta_, 0.0);
    }

    void change_flow() {
        if (delta_ > 0.0) {
            for (int u = first_; u != join_; u = parent_[u]) flow_[u] -= dir_[u] * delta_;
            for (int u = second_; u != join_; u = parent_[u]) flow_[u] += dir_[u] * delta_;
        }
    }

    void update_tree_structure() {
        const int old_rev_thread = rev_thread_[u_out_];
        const int old_succ_num = succ_num_[u_out_];
        const int old_last_succ = last_succ_[u_out_];
        const int v_out = parent_[u_out_];
        const int in_dir = u_in_ == first_ ? kUp : kDown;

        if (u_in_ == u_out_) {
            parent_[u_in_] = v_in_;
            pred_[u_in_] = static_cast<std::int64_t>(in_arc_);
            dir_[u_in_] = in_dir;
            flow_[u_in_] = delta_;
            if (thread_[v_in_] != u_out_) {
                int after = thread_[old_last_succ];
                thread_[old_rev_thread] = after;
                rev_thread_[after] = old_rev_thread;
                after = thread_[v_in_];
                thread_[v_in_] = u_out_;
                rev_thread_[u_out_] = v_in_;
                thread_[old_last_succ] = after;
                rev_thread_[after] = old_last_succ;
            }
        } else {
            const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

            // Re-hang the stem u_in ... u_out below v_in.
            int stem = u_in_;
            int par_stem = v_in_;
            int next_stem;
            int last = last_succ_[u_in_];
            int before, after = thread_[last];
            thread_[v_in_] = u_in_;
            dirty_revs_.clear();
            dirty_revs_.push_back(v_in_);
            while (stem != u_out_) {
                next_stem = parent_[stem];
                thread_[last] = next_stem;
                dirty_revs_.push_back(last);

                before = rev_thread_[stem];
                thread_[before] = after;
                rev_thread_[after] = before;

                parent_[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
                after = thread_[last];
            }
            parent_[u_out_] = par_stem;
            thread_[last] = thread_continue;
            rev_thread_[thread_continue] = last;
            last_succ_[u_out_] = last;

            if (old_rev_thread != v_in_) {
                thread_[old_rev_thread] = after;
                rev_thread_[after] = old_rev_thread;
            }
            for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

            // Shift pred arcs (and their flows) one step along the stem.
            int tmp_sc = 0, tmp_ls = last_succ_[u_out_];
            for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
                pred_[u] = pred_[p];
                dir_[u] = -dir_[p];
                flow_[u] = flow_[p];
                tmp_sc += succ_num_[u] - succ_num_[p];
                succ_num_[u] = tmp_sc;
                last_succ_[p] = tmp_ls;
            }
            pred_[u_in_] = static_cast<std::int64_t>(in_arc_);
            dir_[u_in_] = in_dir;
            flow_[u_in_] = delta_;
            succ_num_[u_in_] = old_succ_num;
        }

        const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
        const int last_succ_out = last_succ_[u_out_];
        for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

        if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
            for (int u = v_out; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
                last_succ_[u] = old_rev_thread;
        } else if (last_succ_out != old_last_succ) {
            for (int u = v_out; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
                last_succ_[u] = last_succ_out;
        }

        for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
        for (int u = v_out; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
    }

    void update_potential() {
        const double c = arc_cost(in_arc_ / m_, in_arc_ % m_);
        const double shift = pi_[v_in_] - pi_[u_in_] - dir_[u_in_] * c;
        const int end = thread_[last_succ_[u_in_]];
        for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += shift;
    }

    const PointCloud& src_;
    const PointCloud& dst_;
    std::size_t n_, m_, dim_;
    int root_ = 0;
    std::vector<int> parent_, thread_, rev_thread_, succ_num_, last_succ_;
    std::vector<std::int64_t> pred_;
    std::vector<int> dir_;
    std::vector<double> pi_, flow_;
    std::vector<double> cost_cache_;
    std::vector<int> dirty_revs_;

    std::size_t block_size_ = 10;
    std::size_t next_arc_ = 0;
    long long iterations_ = 0;
    long long max_iter_ = 0;
    double eps_ = 1e-12;

    std::size_t in_arc_ = 0;
    int join_ = 0, first_ = 0, second_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0;
    double delta_ = 0.0;
};

}  // namespace detail

/// Exact transport between weighted clouds with equal total mass.
/// Zero-mass atoms are left out of the simplex; their potentials are filled
/// in by c-transforms so the dual stays feasible for every pair.
inline TransportSolution solve_transport(const PointCloud& a, std::span<const double> wa, const PointCloud& b,
                                         std::span<const double> wb, const SolverOptions& opts = {}) {
    if (a.dim() != b.dim()) throw ArgumentError("solve_transport: dimension mismatch");
    if (a.size() != wa.size() || b.size() != wb.size()) throw ArgumentError("solve_transport: weight length mismatch");
    if (a.empty() || b.empty()) throw ArgumentError("solve_transport: empty measure");
    double ta = 0.0, tb = 0.0;
    for (double w : wa) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("solve_transport: weights must be finite and >= 0");
        ta += w;
    }
    for (double w : wb) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("solve_transport: weights must be finite and >= 0");
        tb += w;
    }
    if (std::abs(ta - tb) > 1e-9 * std::max(1.0, ta)) throw ArgumentError("solve_transport: total masses differ");

    std::vector<std::size_t> ka, kb;
    for (std::size_t i = 0; i < wa.size(); ++i)
        if (wa[i] > 0.0) ka.push_back(i);
    for (std::size_t j = 0; j < wb.size(); ++j)
        if (wb[j] > 0.0) kb.push_back(j);
    if (ka.empty() || kb.empty()) throw ArgumentError("solve_transport: measure has no positive mass");

    PointCloud pa = PointCloud::zeros(a.dim(), ka.size()), pb = PointCloud::zeros(b.dim(), kb.size());
    std::vector<double> sa(ka.size()), sb(kb.size());
    for (std::size_t r = 0; r < ka.size(); ++r) {
        std::copy(a[ka[r]].begin(), a[ka[r]].end(), pa[r].begin());
        sa[r] = wa[ka[r]];
    }
    for (std::size_t r = 0; r < kb.size(); ++r) {
        std::copy(b[kb[r]].begin(), b[kb[r]].end(), pb[r].begin());
        sb[r] = wb[kb[r]];
    }

    detail::NetworkSimplex ns(pa, sa, pb, sb, opts);
    ns.run();

    TransportSolution sol;
    sol.iterations = ns.iterations();
    ns.for_each_basic_arc([&](std::size_t i, std::size_t j, double f) {
        if (f > 0.0) sol.coupling.push_back({ka[i], kb[j], f});
    });
    std::sort(sol.coupling.begin(), sol.coupling.end(),
              [](const CouplingEntry& x, const CouplingEntry& y) { return x.i != y.i ? x.i < y.i : x.j < y.j; });
    for (const auto& e : sol.coupling) sol.cost += e.mass * euclidean(a[e.i], b[e.j]);

    constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
    sol.dual_f.assign(a.size(), kUnset);
    sol.dual_g.assign(b.size(), kUnset);
    for (std::size_t r = 0; r < ka.size(); ++r) sol.dual_f[ka[r]] = ns.source_potential(r);
    for (std::size_t r = 0; r < kb.size(); ++r) sol.dual_g[kb[r]] = ns.sink_potential(r);
    // Centre the potentials: f_0 = 0 for the first supplied atom.
    const double shift = sol.dual_f[ka[0]];
    for (double& v : sol.dual_f) v -= shift;
    for (double& v : sol.dual_g) v += shift;
    if (ka.size() != a.size()) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!std::isnan(sol.dual_f[i])) continue;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j : kb) best = std::min(best, euclidean(a[i], b[j]) - sol.dual_g[j]);
            sol.dual_f[i] = best;
        }
    }
    if (kb.size() != b.size()) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!std::isnan(sol.dual_g[j])) continue;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < a.size(); ++i) best = std::min(best, euclidean(a[i], b[j]) - sol.dual_f[i]);
            sol.dual_g[j] = best;
        }
    }
    return sol;
}

inline TransportSolution solve_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                         const SolverOptions& opts = {}) {
    if (mu.dim() != nu.dim()) throw ArgumentError("solve_transport: dimension mismatch");
    return solve_transport(mu.points(), mu.weights(), nu.points(), nu.weights(), opts);
}

/// W1 on the line: integral of |F_mu - F_nu| over the merged breakpoints.
inline double w1_1d(std::span<const double> xa, std::span<const double> wa, std::span<const double> xb,
                    std::span<const double> wb) {
    struct Ev {
        double x;
        double dw;
    };
    std::vector<Ev> ev;
    ev.reserve(xa.size() + xb.size());
    for (std::size_t i = 0; i < xa.size(); ++i) ev.push_back({xa[i], wa[i]});
    for (std::size_t j = 0; j < xb.size(); ++j) ev.push_back({xb[j], -wb[j]});
    std::sort(ev.begin(), ev.end(), [](const Ev& p, const Ev& q) { return p.x < q.x; });
    double total = 0.0, cdf_diff = 0.0;
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
        cdf_diff += ev[k].dw;
        total += std::abs(cdf_diff) * (ev[k + 1].x - ev[k].x);
    }
    return total;
}

inline double w1_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.dim() != 1 || nu.dim() != 1) throw ArgumentError("w1_1d: measures must be one-dimensional");
    return w1_1d(mu.points().coords(), mu.weights(), nu.points().coords(), nu.weights());
}

/// W1 between weighted clouds of equal mass: the sorted-CDF formula in one
/// dimension, the network simplex otherwise.
inline double w1_distance(const PointCloud& a, std::span<const double> wa, const PointCloud& b,
                          std::span<const double> wb) {
    if (a.dim() == 1 && b.dim() == 1) return w1_1d(a.coords(), wa, b.coords(), wb);
    return solve_transport(a, wa, b, wb).cost;
}

// ---------------------------------------------------------------------------
// Optimality certificate

struct DualityReport {
    bool pass = true;
    bool marginals_ok = true;
    bool cost_ok = true;
    bool dual_feasible = true;
    bool strong_duality = true;
    bool slackness_ok = true;
    double worst_marginal_error = 0.0;
    double worst_dual_violation = 0.0;  // max(f_i + g_j - c_ij), should be <= 1e-9
    double duality_gap = 0.0;           // relative |primal - dual|
    double worst_slack = 0.0;           // max |f_i + g_j - c_ij| over positive-mass cells
    std::vector<std::string> failures;
};

inline DualityReport check_duality(const TransportSolution& sol, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    constexpr double kMarginalTol = 1e-9;
    constexpr double kCostTol = 1e-9;
    constexpr double kDualTol = 1e-9;
    constexpr double kGapTol = 1e-7;
    constexpr double kSlackTol = 1e-7;

    DualityReport r;
    auto fail = [&](bool& flag, std::string msg) {
        flag = false;
        r.pass = false;
        r.failures.push_back(std::move(msg));
    };
    if (sol.dual_f.size() != mu.size() || sol.dual_g.size() != nu.size()) {
        fail(r.dual_feasible, "dual vector length mismatch");
        return r;
    }

    std::vector<double> rows(mu.size(), 0.0), cols(nu.size(), 0.0);
    double primal = 0.0;
    for (const auto& e : sol.coupling) {
        if (e.i >= mu.size() || e.j >= nu.size()) {
            fail(r.marginals_ok, "coupling index out of range");
            return r;
        }
        if (e.mass < 0.0) fail(r.marginals_ok, "negative coupling mass");
        rows[e.i] += e.mass;
        cols[e.j] += e.mass;
        const double c = euclidean(mu.atom(e.i), nu.atom(e.j));
        primal += e.mass * c;
        const double slack = std::abs(sol.dual_f[e.i] + sol.dual_g[e.j] - c);
        if (e.mass > 0.0) r.worst_slack = std::max(r.worst_slack, slack);
    }
    for (std::size_t i = 0; i < mu.size(); ++i)
        r.worst_marginal_error = std::max(r.worst_marginal_error, std::abs(rows[i] - mu.weight(i)));
    for (std::size_t j = 0; j < nu.size(); ++j)
        r.worst_marginal_error = std::max(r.worst_marginal_error, std::abs(cols[j] - nu.weight(j)));
    if (r.worst_marginal_error > kMarginalTol) fail(r.marginals_ok, "marginal error " + std::to_string(r.worst_marginal_error));

    if (std::abs(primal - sol.cost) > kCostTol * std::max(1.0, std::abs(primal)))
        fail(r.cost_ok, "reported cost differs from recomputed coupling cost");

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j)
            worst = std::max(worst, sol.dual_f[i] + sol.dual_g[j] - euclidean(mu.atom(i), nu.atom(j)));
    r.worst_dual_violation = worst;
    if (worst > kDualTol) fail(r.dual_feasible, "dual infeasible by " + std::to_string(worst));

    double dual = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) dual += mu.weight(i) * sol.dual_f[i];
    for (std::size_t j = 0; j < nu.size(); ++j) dual += nu.weight(j) * sol.dual_g[j];
    r.duality_gap = std::abs(primal - dual) / std::max(1.0, std::abs(primal));
    if (r.duality_gap > kGapTol) fail(r.strong_duality, "duality gap " + std::to_string(r.duality_gap));

    if (r.worst_slack > kSlackTol) fail(r.slackness_ok, "complementary slackness violated by " + std::to_string(r.worst_slack));
    return r;
}

}  // namespace got
