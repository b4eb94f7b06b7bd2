#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "doco/types.hpp"

namespace doco {

/// Undirected simple graph on nodes 0..n-1 (written 1-based on disk).
class Graph {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    explicit Graph(std::size_t n = 0);
    Graph(std::size_t n, const std::vector<Edge>& edges);

    /// Adds {u, v}. Self-loops and duplicates are rejected.
    void add_edge(std::size_t u, std::size_t v);

    std::size_t size() const { return adjacency_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }
    std::size_t max_degree() const;

    bool has_edge(std::size_t u, std::size_t v) const;
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }

    /// Edges sorted as (min, max) pairs in lexicographic order.
    const std::vector<Edge>& edges() const { return edges_; }

    bool is_connected() const;

    friend bool operator==(const Graph& a, const Graph& b) { return a.edges_ == b.edges_ && a.size() == b.size(); }

private:
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<Edge> edges_;
};

inline constexpr std::size_t kGraphRetryBudget = 10000;

/// Independent-edge sampling with probability edge_prob, resampled until the
/// graph is connected. Throws std::runtime_error when the retry budget runs out.
Graph generate_random_connected_graph(std::size_t n, double edge_prob, std::uint64_t seed,
                                      std::size_t max_retries = kGraphRetryBudget);

Graph path_graph(std::size_t n);
Graph complete_graph(std::size_t n);

/// Maximum-degree weights: 1/(1+d_max) on edges, 1 - d_i/(1+d_max) on the diagonal.
Matrix max_degree_weights(const Graph& g);

/// True iff all entries are >= -tol and every row and column sum lies in [1-tol, 1+tol].
bool validate_doubly_stochastic(const Matrix& w, double tol);

// Edge-list text: one "i j" pair per line, 1-based. Lines starting with '#'
// are ignored; an optional "# nodes <n>" line fixes the node count.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

void write_matrix_csv(std::ostream& out, const Matrix& w);

}  // namespace doco
