#ifndef SGCN_SIGNED_GRAPH_HPP
#define SGCN_SIGNED_GRAPH_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <istream>
#include <iterator>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "random.hpp"

namespace sgcn {

using NodeId = std::int32_t;
using RawId = std::int64_t;

enum class Sign : std::int8_t { negative = -1, positive = 1 };

constexpr int to_int(Sign s) noexcept { return static_cast<int>(s); }

constexpr Sign operator*(Sign a, Sign b) noexcept {
    return to_int(a) * to_int(b) > 0 ? Sign::positive : Sign::negative;
}

/// Undirected signed edge between internal node ids.
struct SignedEdge {
    NodeId u = 0;
    NodeId v = 0;
    Sign sign = Sign::positive;

    friend bool operator==(const SignedEdge&, const SignedEdge&) = default;
};

/// One directed line of a raw dataset, before compaction.
struct EdgeRecord {
    RawId source = 0;
    RawId target = 0;
    Sign sign = Sign::positive;

    friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

enum class EdgeFormat { weighted_csv, signed_tsv };

inline EdgeFormat parse_edge_format(std::string_view name) {
    if (name == "weighted-csv") return EdgeFormat::weighted_csv;
    if (name == "signed-tsv") return EdgeFormat::signed_tsv;
    throw ArgumentError("unknown edge-list format '" + std::string(name) +
                        "' (expected weighted-csv or signed-tsv)");
}

inline std::string_view to_string(EdgeFormat f) noexcept {
    return f == EdgeFormat::weighted_csv ? "weighted-csv" : "signed-tsv";
}

/// Immutable undirected signed graph on nodes 0..n-1.
///
/// Each node keeps sorted positive and negative neighbour lists. Construction
/// rejects self-loops, out-of-range endpoints, repeated pairs and pairs that
/// carry both signs, so the symmetry/disjointness invariants always hold.
class SignedGraph {
public:
    SignedGraph() = default;

    SignedGraph(std::size_t num_nodes, std::span<const SignedEdge> edges)
        : pos_(num_nodes), neg_(num_nodes) {
        for (const auto& e : edges) {
            if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= num_nodes ||
                static_cast<std::size_t>(e.v) >= num_nodes) {
                throw ArgumentError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                    ") out of range for " + std::to_string(num_nodes) + " nodes");
            }
            if (e.u == e.v) throw ArgumentError("self-loop on node " + std::to_string(e.u));
            auto& adj = e.sign == Sign::positive ? pos_ : neg_;
            adj[e.u].push_back(e.v);
            adj[e.v].push_back(e.u);
            if (e.sign == Sign::positive) ++num_pos_; else ++num_neg_;
        }
        for (std::size_t i = 0; i < num_nodes; ++i) {
            std::sort(pos_[i].begin(), pos_[i].end());
            std::sort(neg_[i].begin(), neg_[i].end());
        }
        validate();
    }

    SignedGraph(std::size_t num_nodes, std::initializer_list<SignedEdge> edges)
        : SignedGraph(num_nodes, std::span<const SignedEdge>(edges.begin(), edges.size())) {}

    std::size_t num_nodes() const noexcept { return pos_.size(); }
    std::size_t num_edges() const noexcept { return num_pos_ + num_neg_; }
    std::size_t num_positive_edges() const noexcept { return num_pos_; }
    std::size_t num_negative_edges() const noexcept { return num_neg_; }

    std::span<const NodeId> positive_neighbors(NodeId i) const { return pos_[check(i)]; }
    std::span<const NodeId> negative_neighbors(NodeId i) const { return neg_[check(i)]; }

    std::size_t degree(NodeId i) const { return pos_[check(i)].size() + neg_[i].size(); }

    /// +1 / -1 for the edge {i, j}, 0 when absent.
    int edge_sign(NodeId i, NodeId j) const {
        check(i);
        check(j);
        if (std::binary_search(pos_[i].begin(), pos_[i].end(), j)) return 1;
        if (std::binary_search(neg_[i].begin(), neg_[i].end(), j)) return -1;
        return 0;
    }

    bool has_edge(NodeId i, NodeId j) const { return edge_sign(i, j) != 0; }

    /// Canonical edge list: u < v, sorted lexicographically.
    std::vector<SignedEdge> edges() const {
        std::vector<SignedEdge> out;
        out.reserve(num_edges());
        for (std::size_t i = 0; i < num_nodes(); ++i) {
            const auto u = static_cast<NodeId>(i);
            auto p = pos_[i].begin();
            auto n = neg_[i].begin();
            // merge so the output is sorted by v within u
            while (p != pos_[i].end() || n != neg_[i].end()) {
                const bool take_pos = n == neg_[i].end() || (p != pos_[i].end() && *p < *n);
                const NodeId v = take_pos ? *p++ : *n++;
                if (v > u) out.push_back({u, v, take_pos ? Sign::positive : Sign::negative});
            }
        }
        return out;
    }

    /// Throws ArgumentError if any structural invariant is violated.
    void validate() const {
        const std::size_t n = num_nodes();
        for (std::size_t i = 0; i < n; ++i) {
            const auto u = static_cast<NodeId>(i);
            for (const auto* adj : {&pos_, &neg_}) {
                const auto& list = (*adj)[i];
                for (std::size_t k = 0; k < list.size(); ++k) {
                    const NodeId v = list[k];
                    if (v < 0 || static_cast<std::size_t>(v) >= n)
                        throw ArgumentError("neighbour id out of range at node " + std::to_string(u));
                    if (v == u) throw ArgumentError("self-loop on node " + std::to_string(u));
                    if (k > 0 && list[k - 1] >= v)
                        throw ArgumentError("repeated or unsorted neighbour at node " + std::to_string(u));
                    const auto& back = (*adj)[v];
                    if (!std::binary_search(back.begin(), back.end(), u))
                        throw ArgumentError("asymmetric edge between " + std::to_string(u) + " and " +
                                            std::to_string(v));
                }
            }
            std::vector<NodeId> common;
            std::set_intersection(pos_[i].begin(), pos_[i].end(), neg_[i].begin(), neg_[i].end(),
                                  std::back_inserter(common));
            if (!common.empty())
                throw ArgumentError("nodes " + std::to_string(u) + " and " + std::to_string(common.front()) +
                                    " are joined by both a positive and a negative edge");
        }
    }

private:
    std::size_t check(NodeId i) const {
        if (i < 0 || static_cast<std::size_t>(i) >= pos_.size())
            throw ArgumentError("node id " + std::to_string(i) + " out of range [0, " +
                                std::to_string(pos_.size()) + ")");
        return static_cast<std::size_t>(i);
    }

    std::vector<std::vector<NodeId>> pos_;
    std::vector<std::vector<NodeId>> neg_;
    std::size_t num_pos_ = 0;
    std::size_t num_neg_ = 0;
};

/// (N+_i, N-_i) for node i.
inline std::pair<std::span<const NodeId>, std::span<const NodeId>> neighbor_sets(const SignedGraph& g,
                                                                                 NodeId i) {
    return {g.positive_neighbors(i), g.negative_neighbors(i)};
}

/// Connected component labels ignoring sign, numbered in order of their
/// smallest node id.
inline std::vector<int> component_labels(const SignedGraph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<int> label(n, -1);
    std::vector<NodeId> stack;
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        label[s] = next;
        stack.push_back(static_cast<NodeId>(s));
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            for (auto nbrs : {g.positive_neighbors(u), g.negative_neighbors(u)})
                for (NodeId v : nbrs)
                    if (label[v] < 0) {
                        label[v] = next;
                        stack.push_back(v);
                    }
        }
        ++next;
    }
    return label;
}

/// Sorted node ids of the largest connected component (ties go to the
/// component with the smallest node id).
inline std::vector<NodeId> largest_component(const SignedGraph& g) {
    const auto label = component_labels(g);
    if (label.empty()) return {};
    const int count = *std::max_element(label.begin(), label.end()) + 1;
    std::vector<std::size_t> size(static_cast<std::size_t>(count), 0);
    for (int l : label) ++size[static_cast<std::size_t>(l)];
    const auto best = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
    std::vector<NodeId> nodes;
    for (std::size_t i = 0; i < label.size(); ++i)
        if (label[i] == best) nodes.push_back(static_cast<NodeId>(i));
    return nodes;
}

/// Subgraph induced by `nodes` (sorted, distinct); node k of the result is nodes[k].
inline SignedGraph induced_subgraph(const SignedGraph& g, std::span<const NodeId> nodes) {
    std::vector<NodeId> local(g.num_nodes(), -1);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k > 0 && nodes[k - 1] >= nodes[k]) throw ArgumentError("subgraph node list must be sorted and distinct");
        local[static_cast<std::size_t>(nodes[k])] = static_cast<NodeId>(k);
    }
    std::vector<SignedEdge> edges;
    for (const auto& e : g.edges())
        if (local[e.u] >= 0 && local[e.v] >= 0) edges.push_back({local[e.u], local[e.v], e.sign});
    return SignedGraph(nodes.size(), edges);
}

// ---------------------------------------------------------------------------
// Ingestion

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n\v\f";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line, std::string_view delims) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find_first_of(delims, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

inline RawId parse_id(std::string_view field, std::size_t line_no, const char* what) {
    RawId id = 0;
    if (!parse_number(field, id))
        throw ParseError(line_no, std::string("invalid ") + what + " id '" + std::string(field) + "'");
    return id;
}

} // namespace detail

/// Parses a raw edge list into directed records, one per data line.
///
/// weighted-csv lines are `SOURCE,TARGET,RATING[,TIME...]`; the sign is
/// sign(RATING) and a zero rating raises InvalidRatingError. signed-tsv lines
/// are `u<TAB>v<TAB>sign` with sign in {1, -1}; lines starting with '#' are
/// comments. Blank lines are skipped in both formats.
inline std::vector<EdgeRecord> load_edge_list(std::istream& in, EdgeFormat format) {
    std::vector<EdgeRecord> records;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (format == EdgeFormat::weighted_csv) {
            const auto fields = detail::split_fields(line, ",");
            if (fields.size() < 3)
                throw ParseError(line_no, "expected SOURCE,TARGET,RATING[,TIME], got '" + std::string(line) + "'");
            const RawId u = detail::parse_id(fields[0], line_no, "source");
            const RawId v = detail::parse_id(fields[1], line_no, "target");
            double rating = 0.0;
            if (!detail::parse_number(fields[2], rating) || !std::isfinite(rating))
                throw ParseError(line_no, "invalid rating '" + std::string(fields[2]) + "'");
            if (rating == 0.0) throw InvalidRatingError(line_no, "rating 0 has no sign");
            records.push_back({u, v, rating > 0 ? Sign::positive : Sign::negative});
        } else {
            if (line.front() == '#') continue;
            const auto fields = detail::split_fields(line, "\t ");
            std::vector<std::string_view> nonempty;
            for (auto f : fields)
                if (!f.empty()) nonempty.push_back(f);
            if (nonempty.size() != 3)
                throw ParseError(line_no, "expected u<TAB>v<TAB>sign, got '" + std::string(line) + "'");
            const RawId u = detail::parse_id(nonempty[0], line_no, "source");
            const RawId v = detail::parse_id(nonempty[1], line_no, "target");
            int s = 0;
            if (!detail::parse_number(nonempty[2], s) || (s != 1 && s != -1))
                throw ParseError(line_no, "sign must be 1 or -1, got '" + std::string(nonempty[2]) + "'");
            records.push_back({u, v, s > 0 ? Sign::positive : Sign::negative});
        }
    }
    return records;
}

/// Internal-id -> raw-id table produced by compaction (sorted by raw id).
class IdMap {
public:
    IdMap() = default;
    explicit IdMap(std::vector<RawId> raw_ids) : raw_(std::move(raw_ids)) {
        if (!std::is_sorted(raw_.begin(), raw_.end()) ||
            std::adjacent_find(raw_.begin(), raw_.end()) != raw_.end())
            throw ArgumentError("id map must be strictly increasing");
    }

    static IdMap identity(std::size_t n) {
        std::vector<RawId> ids(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<RawId>(i);
        return IdMap(std::move(ids));
    }

    std::size_t size() const noexcept { return raw_.size(); }
    RawId raw(NodeId internal) const { return raw_.at(static_cast<std::size_t>(internal)); }
    const std::vector<RawId>& raw_ids() const noexcept { return raw_; }

    /// Internal id of `raw`, or -1 when unknown.
    NodeId internal(RawId raw) const {
        const auto it = std::lower_bound(raw_.begin(), raw_.end(), raw);
        if (it == raw_.end() || *it != raw) return -1;
        return static_cast<NodeId>(it - raw_.begin());
    }

private:
    std::vector<RawId> raw_;
};

enum class ConflictPolicy { sum_sign };

struct CompactedGraph {
    SignedGraph graph;
    IdMap ids;
};

/// Builds the undirected graph from directed records.
///
/// Raw ids are compacted to 0..n-1 in ascending raw order. Every raw id that
/// appears in a record becomes a node, even if all its pairs are dropped.
/// Under sum_sign the sign of an unordered pair is the sign of the sum of its
/// record signs; zero sums are dropped. Self-loop records contribute the node
/// but no edge.
inline CompactedGraph to_undirected(std::span<const EdgeRecord> records,
                                    ConflictPolicy policy = ConflictPolicy::sum_sign) {
    if (records.empty()) throw ArgumentError("no edge records to convert");
    (void)policy; // sum_sign is the only policy

    std::vector<RawId> ids;
    ids.reserve(records.size() * 2);
    for (const auto& r : records) {
        ids.push_back(r.source);
        ids.push_back(r.target);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    IdMap map(std::move(ids));

    struct Keyed {
        NodeId a, b;
        int s;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(records.size());
    for (const auto& r : records) {
        NodeId a = map.internal(r.source);
        NodeId b = map.internal(r.target);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        keyed.push_back({a, b, to_int(r.sign)});
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const Keyed& x, const Keyed& y) { return std::pair(x.a, x.b) < std::pair(y.a, y.b); });

    std::vector<SignedEdge> edges;
    for (std::size_t i = 0; i < keyed.size();) {
        int sum = 0;
        std::size_t j = i;
        for (; j < keyed.size() && keyed[j].a == keyed[i].a && keyed[j].b == keyed[i].b; ++j) sum += keyed[j].s;
        if (sum != 0) edges.push_back({keyed[i].a, keyed[i].b, sum > 0 ? Sign::positive : Sign::negative});
        i = j;
    }
    const std::size_t n = map.size();
    return {SignedGraph(n, edges), std::move(map)};
}

// ---------------------------------------------------------------------------
// Train/test split

struct EdgeSplit {
    SignedGraph train;
    std::vector<SignedEdge> test;
    std::uint64_t seed = 0;
};

/// Uniform random edge split; the train graph keeps all n nodes.
/// |test| = round(test_fraction * |E|).
inline EdgeSplit split_train_test(const SignedGraph& g, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ArgumentError("test fraction must lie in (0, 1), got " + std::to_string(test_fraction));
    if (g.num_edges() < 5)
        throw ArgumentError("need at least 5 edges to split, graph has " + std::to_string(g.num_edges()));

    auto edges = g.edges();
    auto rng = make_rng(seed, streams::split);
    shuffle_in_place(edges, rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(edges.size())));

    std::vector<SignedEdge> test(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<SignedEdge> train(edges.begin() + static_cast<std::ptrdiff_t>(n_test), edges.end());
    auto by_pair = [](const SignedEdge& a, const SignedEdge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); };
    std::sort(test.begin(), test.end(), by_pair);
    return {SignedGraph(g.num_nodes(), train), std::move(test), seed};
}

// ---------------------------------------------------------------------------
// Output

/// `internal_id,raw_id` CSV with header.
inline void write_id_map(std::ostream& out, const IdMap& ids) {
    out << "internal_id,raw_id\n";
    for (std::size_t i = 0; i < ids.size(); ++i) out << i << ',' << ids.raw_ids()[i] << '\n';
}

/// Compacted graph as signed-tsv over internal ids, node count in a comment.
inline void write_graph_tsv(std::ostream& out, const SignedGraph& g) {
    out << "# nodes " << g.num_nodes() << " edges " << g.num_edges() << '\n';
    for (const auto& e : g.edges()) out << e.u << '\t' << e.v << '\t' << to_int(e.sign) << '\n';
}

} // namespace sgcn

#endif // SGCN_SIGNED_GRAPH_HPP
