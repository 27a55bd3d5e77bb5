#ifndef SGCN_BALANCE_PATHS_HPP
#define SGCN_BALANCE_PATHS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "error.hpp"
#include "signed_graph.hpp"

namespace sgcn {

enum class PathClass { balanced, unbalanced };

/// Balanced iff s1*s2*s3 = +1, i.e. an even number of negative sides.
constexpr PathClass classify_triangle(Sign s1, Sign s2, Sign s3) noexcept {
    return (s1 * s2 * s3) == Sign::positive ? PathClass::balanced : PathClass::unbalanced;
}

/// Balanced iff the path has an even number of negative links.
inline PathClass path_class(std::span<const Sign> signs) {
    if (signs.empty()) throw ArgumentError("path_class needs at least one sign");
    std::size_t negatives = 0;
    for (Sign s : signs) negatives += s == Sign::negative ? 1 : 0;
    return negatives % 2 == 0 ? PathClass::balanced : PathClass::unbalanced;
}

/// Nodes reachable from `origin` along balanced / unbalanced walks of each
/// length 1..L. Walks may revisit nodes (including the origin). Sets are
/// stored as sorted id vectors; use the 1-based accessors.
struct ReachSets {
    NodeId origin = 0;
    std::vector<std::vector<NodeId>> balanced;   // [l-1] = B_origin(l)
    std::vector<std::vector<NodeId>> unbalanced; // [l-1] = U_origin(l)

    std::size_t max_length() const noexcept { return balanced.size(); }
    const std::vector<NodeId>& balanced_at(std::size_t l) const { return balanced.at(l - 1); }
    const std::vector<NodeId>& unbalanced_at(std::size_t l) const { return unbalanced.at(l - 1); }
};

/// Recursive balanced/unbalanced reachability.
///
///   B(1) = N+(i),  U(1) = N-(i)
///   B(l+1) = N+(B(l)) ∪ N-(U(l))
///   U(l+1) = N+(U(l)) ∪ N-(B(l))
inline ReachSets reach_sets(const SignedGraph& g, NodeId origin, std::size_t max_length) {
    if (origin < 0 || static_cast<std::size_t>(origin) >= g.num_nodes())
        throw ArgumentError("origin " + std::to_string(origin) + " out of range");
    if (max_length < 1) throw ArgumentError("path length must be >= 1");

    const std::size_t n = g.num_nodes();
    ReachSets out;
    out.origin = origin;

    auto collect = [n](const std::vector<std::uint8_t>& mask) {
        std::vector<NodeId> ids;
        for (std::size_t j = 0; j < n; ++j)
            if (mask[j]) ids.push_back(static_cast<NodeId>(j));
        return ids;
    };

    std::vector<std::uint8_t> bal(n, 0), unbal(n, 0);
    for (NodeId j : g.positive_neighbors(origin)) bal[j] = 1;
    for (NodeId j : g.negative_neighbors(origin)) unbal[j] = 1;
    out.balanced.push_back(collect(bal));
    out.unbalanced.push_back(collect(unbal));

    for (std::size_t l = 1; l < max_length; ++l) {
        std::vector<std::uint8_t> next_bal(n, 0), next_unbal(n, 0);
        for (NodeId k : out.balanced.back()) {
            for (NodeId j : g.positive_neighbors(k)) next_bal[j] = 1;
            for (NodeId j : g.negative_neighbors(k)) next_unbal[j] = 1;
        }
        for (NodeId k : out.unbalanced.back()) {
            for (NodeId j : g.negative_neighbors(k)) next_bal[j] = 1;
            for (NodeId j : g.positive_neighbors(k)) next_unbal[j] = 1;
        }
        out.balanced.push_back(collect(next_bal));
        out.unbalanced.push_back(collect(next_unbal));
    }
    return out;
}

/// Triangle counts by number of negative sides:
/// A = 0 (+++), B = 2 (+--), C = 1 (++-), D = 3 (---).
/// A and B are balanced, C and D unbalanced.
struct TriangleCensus {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint64_t c = 0;
    std::uint64_t d = 0;

    std::uint64_t total() const noexcept { return a + b + c + d; }
    friend bool operator==(const TriangleCensus&, const TriangleCensus&) = default;
};

inline TriangleCensus triangle_census(const SignedGraph& g) {
    const std::size_t n = g.num_nodes();
    TriangleCensus census;
    // mark[w] = sign of edge (u, w) for the current u, 0 otherwise
    std::vector<std::int8_t> mark(n, 0);
    auto count = [&census](int negatives) {
        switch (negatives) {
        case 0: ++census.a; break;
        case 1: ++census.c; break;
        case 2: ++census.b; break;
        default: ++census.d; break;
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = static_cast<NodeId>(i);
        for (NodeId w : g.positive_neighbors(u)) mark[w] = 1;
        for (NodeId w : g.negative_neighbors(u)) mark[w] = -1;
        for (const auto [v_list, uv_neg] : {std::pair{g.positive_neighbors(u), 0}, std::pair{g.negative_neighbors(u), 1}}) {
            for (NodeId v : v_list) {
                if (v <= u) continue;
                for (const auto [w_list, vw_neg] :
                     {std::pair{g.positive_neighbors(v), 0}, std::pair{g.negative_neighbors(v), 1}}) {
                    for (NodeId w : w_list) {
                        if (w <= v || mark[w] == 0) continue;
                        count(uv_neg + vw_neg + (mark[w] < 0 ? 1 : 0));
                    }
                }
            }
        }
        for (NodeId w : g.positive_neighbors(u)) mark[w] = 0;
        for (NodeId w : g.negative_neighbors(u)) mark[w] = 0;
    }
    return census;
}

} // namespace sgcn

#endif // SGCN_BALANCE_PATHS_HPP
