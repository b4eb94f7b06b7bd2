#include "doco/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "doco/format.hpp"
#include "doco/rng.hpp"

namespace doco {

Graph::Graph(std::size_t n) : adjacency_(n) {}

Graph::Graph(std::size_t n, const std::vector<Edge>& edges) : adjacency_(n) {
    for (const auto& [u, v] : edges) add_edge(u, v);
}

void Graph::add_edge(std::size_t u, std::size_t v) {
    if (u >= size() || v >= size()) throw std::out_of_range("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loops are not allowed");
    if (has_edge(u, v)) throw std::invalid_argument("duplicate edge");
    adjacency_[u].insert(std::upper_bound(adjacency_[u].begin(), adjacency_[u].end(), v), v);
    adjacency_[v].insert(std::upper_bound(adjacency_[v].begin(), adjacency_[v].end(), u), u);
    const Edge e{std::min(u, v), std::max(u, v)};
    edges_.insert(std::upper_bound(edges_.begin(), edges_.end(), e), e);
}

std::size_t Graph::max_degree() const {
    std::size_t d = 0;
    for (const auto& nb : adjacency_) d = std::max(d, nb.size());
    return d;
}

bool Graph::has_edge(std::size_t u, std::size_t v) const {
    const auto& nb = adjacency_.at(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

bool Graph::is_connected() const {
    if (size() <= 1) return true;
    std::vector<bool> seen(size(), false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop();
        for (auto v : adjacency_[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == size();
}

Graph generate_random_connected_graph(std::size_t n, double edge_prob, std::uint64_t seed,
                                      std::size_t max_retries) {
    if (n < 1) throw std::invalid_argument("graph needs at least one node");
    if (!(edge_prob > 0.0 && edge_prob <= 1.0)) throw std::invalid_argument("edge_prob must lie in (0, 1]");
    Engine rng(seed);
    for (std::size_t attempt = 0; attempt < max_retries; ++attempt) {
        Graph g(n);
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = u + 1; v < n; ++v) {
                if (uniform01(rng) < edge_prob) g.add_edge(u, v);
            }
        }
        if (g.is_connected()) return g;
    }
    std::ostringstream msg;
    msg << "no connected graph found for n=" << n << ", edge_prob=" << edge_prob << " within " << max_retries
        << " resamples; increase edge_prob";
    throw std::runtime_error(msg.str());
}

Graph path_graph(std::size_t n) {
    Graph g(n);
    for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    return g;
}

Graph complete_graph(std::size_t n) {
    Graph g(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) g.add_edge(u, v);
    return g;
}

Matrix max_degree_weights(const Graph& g) {
    const auto n = g.size();
    const double denom = 1.0 + static_cast<double>(g.max_degree());
    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& [u, v] : g.edges()) {
        w(u, v) = 1.0 / denom;
        w(v, u) = 1.0 / denom;
    }
    // (1 + d_max - d_i)/(1 + d_max) is 1 - d_i/(1 + d_max) without the cancellation.
    for (std::size_t i = 0; i < n; ++i) {
        w(i, i) = (denom - static_cast<double>(g.degree(i))) / denom;
    }
    return w;
}

bool validate_doubly_stochastic(const Matrix& w, double tol) {
    if (w.rows() != w.cols()) return false;
    if ((w.array() < -tol).any()) return false;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const double r = w.row(i).sum();
        const double c = w.col(i).sum();
        if (r < 1.0 - tol || r > 1.0 + tol || c < 1.0 - tol || c > 1.0 + tol) return false;
    }
    return true;
}

void write_edge_list(std::ostream& out, const Graph& g) {
    out << "# nodes " << g.size() << '\n';
    for (const auto& [u, v] : g.edges()) out << (u + 1) << ' ' << (v + 1) << '\n';
}

Graph read_edge_list(std::istream& in) {
    std::vector<Graph::Edge> edges;
    std::size_t n = 0;
    bool explicit_n = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first[0] == '#') {
            std::string key;
            if (first == "#" && ls >> key && key == "nodes" && ls >> n) explicit_n = true;
            continue;
        }
        std::istringstream fs(first);
        long long u = 0, v = 0;
        if (!(fs >> u) || !(ls >> v) || u < 1 || v < 1) {
            throw std::runtime_error("malformed edge on line " + std::to_string(lineno));
        }
        edges.emplace_back(static_cast<std::size_t>(u - 1), static_cast<std::size_t>(v - 1));
        if (!explicit_n) n = std::max<std::size_t>({n, static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
    }
    return Graph(n, edges);
}

void write_matrix_csv(std::ostream& out, const Matrix& w) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            if (j) out << ',';
            out << format_double(w(i, j));
        }
        out << '\n';
    }
}

}  // namespace doco
