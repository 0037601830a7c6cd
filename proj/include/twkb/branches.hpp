#pragma once

// Continuity tracking of polynomial roots along the x grid and selection of
// the regular branch kappa^(1).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "twkb/errors.hpp"
#include "twkb/grid.hpp"
#include "twkb/kappa_system.hpp"
#include "twkb/parallel.hpp"
#include "twkb/physics.hpp"
#include "twkb/roots.hpp"

namespace twkb {

/// A grid column where two assignments tie in cost but give different values.
struct Ambiguity {
    std::size_t column = 0;              // the tie is between column-1 and column
    std::vector<std::size_t> group;      // branches whose continuation is interchangeable
};

struct BranchField {
    std::vector<double> grid;
    std::vector<std::vector<cplx>> branches;          // branches[j][i]
    std::vector<std::vector<std::size_t>> audit;      // audit[i-1][j]: root index of column i taken by branch j
    std::vector<Ambiguity> ambiguities;

    std::size_t branch_count() const noexcept { return branches.size(); }
    std::size_t size() const noexcept { return grid.size(); }

    std::vector<double> ambiguous_x() const {
        std::vector<double> out;
        for (const auto& a : ambiguities) out.push_back(grid[a.column]);
        return out;
    }
};

struct TrackOptions {
    bool strict = false;        // throw ambiguous_matching instead of recording ties
    double tie_tolerance = 1e-14;
};

namespace detail {

inline double assignment_cost(const std::vector<cplx>& prev, const std::vector<cplx>& next,
                              const std::vector<std::size_t>& perm) {
    double c = 0.0;
    for (std::size_t j = 0; j < prev.size(); ++j) c += std::abs(prev[j] - next[perm[j]]);
    return c;
}

/// Hungarian algorithm, square cost matrix; returns assignment row -> column.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assign(n);
    for (std::size_t j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
    return assign;
}

struct match_result {
    std::vector<std::size_t> perm;
    std::vector<std::size_t> tied_group;  // empty when unambiguous
};

inline match_result match_columns(const std::vector<cplx>& prev, const std::vector<cplx>& next,
                                  double tie_tol) {
    const std::size_t n = prev.size();
    std::vector<std::vector<std::size_t>> candidates;
    std::vector<std::size_t> best;
    double best_cost = std::numeric_limits<double>::infinity();

    if (n <= 6) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        do {
            const double c = assignment_cost(prev, next, perm);
            if (c < best_cost) {
                best_cost = c;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        const double limit = best_cost + tie_tol * best_cost;
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        do {
            if (perm != best && assignment_cost(prev, next, perm) <= limit) candidates.push_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) cost[j][k] = std::abs(prev[j] - next[k]);
        best = hungarian(cost);
        best_cost = assignment_cost(prev, next, best);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                auto alt = best;
                std::swap(alt[a], alt[b]);
                const double c = assignment_cost(prev, next, alt);
                if (c <= best_cost + tie_tol * best_cost) candidates.push_back(alt);
            }
    }

    match_result res{best, {}};
    std::vector<bool> in_group(n, false);
    for (const auto& alt : candidates)
        for (std::size_t j = 0; j < n; ++j)
            if (next[alt[j]] != next[best[j]]) in_group[j] = true;
    for (std::size_t j = 0; j < n; ++j)
        if (in_group[j]) res.tied_group.push_back(j);
    return res;
}

}  // namespace detail

/// Continuity-matched branches: column i+1 is assigned to branches by the
/// minimal total distance to column i.
inline BranchField track_branches(const std::vector<RootSet>& rootsets, const TrackOptions& opt = {}) {
    if (rootsets.size() < 2) throw invalid_argument("track_branches: need at least 2 grid points");
    const std::size_t n = rootsets.front().roots.size();
    for (const auto& rs : rootsets)
        if (rs.roots.size() != n) throw invalid_argument("track_branches: inconsistent root counts");

    BranchField f;
    f.grid.reserve(rootsets.size());
    for (const auto& rs : rootsets) f.grid.push_back(rs.x);
    f.branches.assign(n, std::vector<cplx>(rootsets.size()));
    for (std::size_t j = 0; j < n; ++j) f.branches[j][0] = rootsets[0].roots[j];

    std::vector<cplx> prev = rootsets[0].roots;
    for (std::size_t i = 1; i < rootsets.size(); ++i) {
        const auto& next = rootsets[i].roots;
        auto m = detail::match_columns(prev, next, opt.tie_tolerance);
        if (!m.tied_group.empty()) {
            if (opt.strict)
                throw ambiguous_matching("ambiguous branch matching at grid index " + std::to_string(i), i);
            f.ambiguities.push_back({i, m.tied_group});
        }
        for (std::size_t j = 0; j < n; ++j) {
            f.branches[j][i] = next[m.perm[j]];
            prev[j] = next[m.perm[j]];
        }
        f.audit.push_back(std::move(m.perm));
    }
    return f;
}

/// Root sets of the assembled polynomial on a grid; per-point work runs in
/// parallel and is written by index.
inline std::vector<RootSet> solve_grid(const PhysicalConfig& cfg, const PotentialModel& model, int order,
                                       const std::vector<double>& grid, unsigned threads = 1) {
    std::vector<RootSet> sets(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const QVector q{eval_Q_vector(cfg, model, grid[i], order)};
        sets[i] = solve_roots(assemble_polynomial(q, grid[i]));
    });
    return sets;
}

enum class SignConvention { lower, upper };

/// The selected regular branch.
struct Kappa1Branch {
    std::vector<double> grid;
    std::vector<cplx> values;
    std::vector<double> q0;                                   // Q^(0) on the grid
    std::size_t branch = 0;                                   // branch at grid[0]
    std::vector<std::pair<std::size_t, std::size_t>> switches; // (column, branch) at ambiguities
    std::optional<double> x_b;
    std::vector<double> ambiguous_x;
    int order = 0;

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

/// |Im kappa| below this fraction of max |kappa| counts as zero.
inline constexpr double xb_threshold = 1e-9;

/// Grid-level x_b: first forbidden-region grid point with |Im kappa| <= threshold * max |kappa|.
/// A threshold of 0 asks for exact vanishing.
inline std::optional<double> grid_xb(const std::vector<double>& grid, const std::vector<cplx>& values,
                                     const std::vector<double>& q0, double threshold = xb_threshold) {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (q0[i] > 0.0 && std::abs(values[i].imag()) <= threshold * m) return grid[i];
    return std::nullopt;
}

/// Reference for the sign convention: conj(sqrt(Q0)) (lower) or its negative (upper).
inline cplx convention_reference(double q0, SignConvention sc) {
    const cplx r = std::conj(std::sqrt(cplx(q0, 0.0)));
    return sc == SignConvention::lower ? r : -r;
}

/// Selects kappa^(1).
///
/// Candidate paths follow one branch and may switch among interchangeable
/// branches at recorded ambiguities. The regular path maximizes min |kappa|
/// (the discrete form of a small norm of 1/kappa); paths within 1% of the
/// best are separated by their mean distance to the convention reference,
/// which at x = a picks Im kappa <= 0 (lower) in an allowed region.
inline Kappa1Branch select_kappa1(const BranchField& field, const PhysicalConfig& cfg,
                                  const PotentialModel& model, SignConvention sc = SignConvention::lower,
                                  int order = -1) {
    const std::size_t nb = field.branch_count();
    const std::size_t m = field.size();
    if (nb == 0 || m == 0) throw invalid_argument("select_kappa1: empty branch field");

    std::vector<double> q0(m);
    std::vector<cplx> ref(m);
    for (std::size_t i = 0; i < m; ++i) {
        q0[i] = eval_Q(cfg, model, field.grid[i], 0);
        ref[i] = convention_reference(q0[i], sc);
    }

    struct path {
        std::size_t start;
        std::vector<std::pair<std::size_t, std::size_t>> switches;
    };
    std::vector<path> paths;
    constexpr std::size_t max_paths = 4096;
    const auto& amb = field.ambiguities;
    std::function<void(std::size_t, std::size_t, path&)> expand = [&](std::size_t k, std::size_t cur, path& p) {
        if (paths.size() >= max_paths) return;
        while (k < amb.size() &&
               std::find(amb[k].group.begin(), amb[k].group.end(), cur) == amb[k].group.end())
            ++k;
        if (k == amb.size()) {
            paths.push_back(p);
            return;
        }
        for (std::size_t g : amb[k].group) {
            if (g != cur) p.switches.emplace_back(amb[k].column, g);
            expand(k + 1, g, p);
            if (g != cur) p.switches.pop_back();
        }
    };
    for (std::size_t j = 0; j < nb; ++j) {
        path p{j, {}};
        expand(0, j, p);
    }

    auto materialize = [&](const path& p) {
        std::vector<cplx> v(m);
        std::size_t cur = p.start, s = 0;
        for (std::size_t i = 0; i < m; ++i) {
            while (s < p.switches.size() && p.switches[s].first == i) cur = p.switches[s++].second;
            v[i] = field.branches[cur][i];
        }
        return v;
    };

    struct score {
        double min_abs, mean_ref;
        bool collapsed;
    };
    std::vector<score> scores;
    scores.reserve(paths.size());
    for (const auto& p : paths) {
        const auto v = materialize(p);
        double mn = std::numeric_limits<double>::infinity(), mx = 0.0, dist = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = std::abs(v[i]);
            mn = std::min(mn, a);
            mx = std::max(mx, a);
            dist += std::abs(v[i] - ref[i]);
        }
        std::size_t small = 0;
        for (const auto& z : v)
            if (std::abs(z) <= 1e-6 * mx) ++small;
        const bool collapsed = mx == 0.0 || static_cast<double>(small) > 0.01 * static_cast<double>(m);
        scores.push_back({mn, dist / static_cast<double>(m), collapsed});
    }

    double best_min = -1.0;
    for (const auto& s : scores)
        if (!s.collapsed) best_min = std::max(best_min, s.min_abs);
    if (best_min < 0.0) throw no_regular_branch("no root branch stays away from zero on the grid");

    std::size_t chosen = paths.size();
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const auto& s = scores[k];
        if (s.collapsed || s.min_abs < 0.99 * best_min) continue;
        if (chosen == paths.size() || s.mean_ref < scores[chosen].mean_ref) chosen = k;
    }

    Kappa1Branch out;
    out.grid = field.grid;
    out.values = materialize(paths[chosen]);
    out.q0 = std::move(q0);
    out.branch = paths[chosen].start;
    out.switches = paths[chosen].switches;
    out.x_b = grid_xb(out.grid, out.values, out.q0);
    out.ambiguous_x = field.ambiguous_x();
    out.order = order >= 0 ? order : static_cast<int>(nb) - 2;
    return out;
}

/// Root of the kappa polynomial at x closest to `hint`.
inline cplx nearest_root(const PhysicalConfig& cfg, const PotentialModel& model, int order, double x,
                         cplx hint) {
    const auto rs = solve_roots(assemble_polynomial(QVector{eval_Q_vector(cfg, model, x, order)}, x));
    cplx best = rs.roots.front();
    for (const auto& r : rs.roots)
        if (std::abs(r - hint) < std::abs(best - hint)) best = r;
    return best;
}

/// Linear interpolation of the branch values at x (clamped to the grid).
inline cplx interpolate(const Kappa1Branch& br, double x) {
    const auto& g = br.grid;
    if (x <= g.front()) return br.values.front();
    if (x >= g.back()) return br.values.back();
    const auto it = std::upper_bound(g.begin(), g.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - g.begin());
    const double t = (x - g[i - 1]) / (g[i] - g[i - 1]);
    return (1.0 - t) * br.values[i - 1] + t * br.values[i];
}

/// kappa^(1) at an arbitrary x in [a, b].
inline cplx kappa1_at(const Kappa1Branch& br, const PhysicalConfig& cfg, const PotentialModel& model, double x) {
    return nearest_root(cfg, model, br.order, x, interpolate(br, x));
}

struct SolveOptions {
    std::size_t grid_points = 2001;
    unsigned threads = 1;
    SignConvention convention = SignConvention::lower;
    TrackOptions track{};
};

struct Solution {
    BranchField field;
    Kappa1Branch kappa1;
};

/// Grid roots, branch tracking and selection for one order N.
inline Solution solve_kappa1(const PhysicalConfig& cfg, const PotentialModel& model, int order,
                             const SolveOptions& opt = {}) {
    cfg.validate();
    if (order < 0) throw invalid_argument("order N must be non-negative");
    const auto grid = uniform_grid(cfg.a, cfg.b, opt.grid_points);
    auto field = track_branches(solve_grid(cfg, model, order, grid, opt.threads), opt.track);
    auto k1 = select_kappa1(field, cfg, model, opt.convention, order);
    return {std::move(field), std::move(k1)};
}

}  // namespace twkb
