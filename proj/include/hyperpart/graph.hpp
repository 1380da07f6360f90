// graph.hpp - undirected weighted graph for community detection, bipartite expansion
#ifndef HYPERPART_GRAPH_HPP
#define HYPERPART_GRAPH_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "hypergraph.hpp"
#include "types.hpp"

namespace hyperpart {

enum class EdgeWeightModel { kUniform, kDegreeScaled };

// CSR graph with real-valued edge weights. Every edge {u,v} is stored in both
// adjacency lists; self-loop weight is kept separately per vertex (contracted
// community graphs need it). Volume vol(v) counts incident edge weight plus
// twice the self-loop weight, so Σ_v vol(v) = 2W.
class Graph {
public:
    struct Edge {
        NodeId to;
        double weight;
    };

    Graph() = default;

    static Graph build(NodeId n, const std::vector<std::tuple<NodeId, NodeId, double>>& edges,
                       std::vector<double> self_loops = {}) {
        Graph g;
        g.n_ = n;
        g.self_loop_ = self_loops.empty() ? std::vector<double>(n, 0.0) : std::move(self_loops);
        if (g.self_loop_.size() != n)
            throw std::invalid_argument("self loop count does not match vertex count");

        std::vector<std::size_t> deg(n + 1, 0);
        for (const auto& [u, v, w] : edges) {
            if (u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
            if (u == v) throw std::invalid_argument("self loops go through the self_loops array");
            ++deg[u + 1];
            ++deg[v + 1];
        }
        for (NodeId v = 0; v < n; ++v) deg[v + 1] += deg[v];
        g.offsets_ = deg;
        g.adjacency_.resize(edges.size() * 2);
        std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto& [u, v, w] : edges) {
            g.adjacency_[cursor[u]++] = {v, w};
            g.adjacency_[cursor[v]++] = {u, w};
        }

        g.volume_.assign(n, 0.0);
        g.total_weight_ = 0.0;
        for (const auto& [u, v, w] : edges) {
            g.volume_[u] += w;
            g.volume_[v] += w;
            g.total_weight_ += w;
        }
        for (NodeId v = 0; v < n; ++v) {
            g.volume_[v] += 2.0 * g.self_loop_[v];
            g.total_weight_ += g.self_loop_[v];
        }
        return g;
    }

    NodeId num_vertices() const { return n_; }
    std::span<const Edge> neighbors(NodeId v) const {
        return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
    double self_loop(NodeId v) const { return self_loop_[v]; }
    double volume(NodeId v) const { return volume_[v]; }
    double total_weight() const { return total_weight_; }

private:
    NodeId n_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<Edge> adjacency_;
    std::vector<double> self_loop_;
    std::vector<double> volume_;
    double total_weight_ = 0.0;
};

// Bipartite expansion: vertices 0..n-1 are the hypergraph nodes, n..n+m-1 the
// nets, one edge per pin. The degree_scaled model weighs pin {u,e} with
// d(u)/|e|, emphasizing connections through small nets.
inline Graph bipartite_representation(const Hypergraph& h, EdgeWeightModel model) {
    std::vector<std::tuple<NodeId, NodeId, double>> edges;
    edges.reserve(h.num_pins());
    for (NetId e = 0; e < h.num_nets(); ++e) {
        const double size = static_cast<double>(h.net_size(e));
        for (NodeId v : h.pins(e)) {
            double w = 1.0;
            if (model == EdgeWeightModel::kDegreeScaled)
                w = static_cast<double>(h.degree(v)) / size;
            edges.emplace_back(v, h.num_nodes() + e, w);
        }
    }
    return Graph::build(h.num_nodes() + h.num_nets(), edges);
}

}  // namespace hyperpart

#endif
