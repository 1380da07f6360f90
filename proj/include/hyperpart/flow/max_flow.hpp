// max_flow.hpp - FIFO push-relabel max preflow with residual side-cut derivation
#ifndef HYPERPART_FLOW_MAX_FLOW_HPP
#define HYPERPART_FLOW_MAX_FLOW_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "../types.hpp"

namespace hyperpart {

// Directed flow network with paired arcs (arc i and i^1 are reverses).
// Arcs marked soft carry a finite capacity during the solve but count as
// infinite when deriving cut sides; only hard arcs may appear in a cut.
struct FlowNetwork {
    struct Arc {
        std::int32_t to;
        Weight residual;
        Weight cap;
        bool soft;
    };

    explicit FlowNetwork(std::int32_t vertices) : adj(vertices) {}

    std::int32_t add_arc(std::int32_t u, std::int32_t v, Weight cap, bool soft = false) {
        if (cap < 0) throw std::invalid_argument("negative arc capacity");
        const auto idx = static_cast<std::int32_t>(arcs.size());
        arcs.push_back({v, cap, cap, soft});
        arcs.push_back({u, 0, 0, false});
        adj[u].push_back(idx);
        adj[v].push_back(idx + 1);
        return idx;
    }

    std::int32_t num_vertices() const { return static_cast<std::int32_t>(adj.size()); }
    Weight flow_on(std::int32_t arc) const { return arcs[arc].cap - arcs[arc].residual; }

    std::vector<Arc> arcs;
    std::vector<std::vector<std::int32_t>> adj;
};

// Multi-source multi-sink maximum preflow via FIFO push-relabel with periodic
// exact relabeling. Solves warm: terminals may be added between solve calls
// and the previous preflow is kept; the resulting flow value always equals
// the cold-start value for the same terminal sets. Excess that cannot reach
// a sink stays trapped (this computes a max preflow, not a max flow).
class PushRelabel {
public:
    struct Config {
        std::int64_t stall_rounds = 500;
        std::int64_t stall_active = 1500;
    };

    explicit PushRelabel(FlowNetwork& net) : PushRelabel(net, Config{}) {}

    PushRelabel(FlowNetwork& net, Config cfg)
        : net_(&net),
          cfg_(cfg),
          n_(net.num_vertices()),
          exc_(net.num_vertices(), 0),
          dist_(net.num_vertices(), 0),
          source_(net.num_vertices(), false),
          sink_(net.num_vertices(), false) {}

    void set_source(std::int32_t v) {
        if (sink_[v]) throw std::invalid_argument("vertex is already a sink");
        source_[v] = true;
    }

    void set_sink(std::int32_t v) {
        if (source_[v]) throw std::invalid_argument("vertex is already a source");
        sink_[v] = true;
    }

    bool is_source(std::int32_t v) const { return source_[v]; }
    bool is_sink(std::int32_t v) const { return sink_[v]; }
    Weight excess(std::int32_t v) const { return exc_[v]; }

    Weight flow_value() const {
        Weight f = 0;
        for (std::int32_t v = 0; v < n_; ++v)
            if (sink_[v]) f += exc_[v];
        return f;
    }

    Weight solve() {
        // Sources emit along every residual out-arc, including reverse arcs:
        // that cancels flow previously routed into a freshly added source,
        // exactly as a super-source with infinite supply would.
        for (std::int32_t s = 0; s < n_; ++s) {
            if (!source_[s]) continue;
            for (const std::int32_t a : net_->adj[s]) {
                FlowNetwork::Arc& arc = net_->arcs[a];
                if (arc.residual == 0 || source_[arc.to]) continue;
                push(s, a, arc.residual);
            }
        }
        global_relabel();

        std::deque<std::int32_t> queue;
        std::vector<char> queued(n_, 0);
        auto activate = [&](std::int32_t v) {
            if (queued[v] || source_[v] || sink_[v] || exc_[v] <= 0 || dist_[v] >= n_) return;
            queue.push_back(v);
            queued[v] = 1;
        };
        for (std::int32_t v = 0; v < n_; ++v) activate(v);

        std::int64_t work_since_relabel = 0;
        std::int64_t stall = 0;
        Weight last_value = flow_value();
        while (!queue.empty()) {
            const std::int32_t u = queue.front();
            queue.pop_front();
            queued[u] = 0;
            if (source_[u] || sink_[u]) continue;
            while (exc_[u] > 0 && dist_[u] < n_) {
                bool pushed = false;
                for (const std::int32_t a : net_->adj[u]) {
                    FlowNetwork::Arc& arc = net_->arcs[a];
                    if (arc.residual <= 0 || dist_[u] != dist_[arc.to] + 1) continue;
                    push(u, a, std::min(exc_[u], arc.residual));
                    activate(arc.to);
                    pushed = true;
                    if (exc_[u] == 0) break;
                }
                if (!pushed) {
                    relabel(u);
                    ++work_since_relabel;
                }
            }
            activate(u);
            const Weight value = flow_value();
            stall = value == last_value ? stall + 1 : 0;
            last_value = value;
            const bool stalled =
                stall >= cfg_.stall_rounds &&
                static_cast<std::int64_t>(queue.size()) < cfg_.stall_active;
            if (work_since_relabel >= n_ || stalled) {
                global_relabel();
                work_since_relabel = 0;
                stall = 0;
                for (std::int32_t v = 0; v < n_; ++v) activate(v);
            }
        }
        return flow_value();
    }

    // Forward residual reachability from the sources plus every non-sink
    // vertex holding excess. Soft arcs count as infinite in this view.
    std::vector<char> source_side() const {
        std::vector<char> in(n_, 0);
        std::deque<std::int32_t> queue;
        for (std::int32_t v = 0; v < n_; ++v)
            if (source_[v] || (exc_[v] > 0 && !sink_[v])) {
                in[v] = 1;
                queue.push_back(v);
            }
        while (!queue.empty()) {
            const std::int32_t u = queue.front();
            queue.pop_front();
            for (const std::int32_t a : net_->adj[u]) {
                const FlowNetwork::Arc& arc = net_->arcs[a];
                if (!arc.soft && arc.residual <= 0) continue;
                if (!in[arc.to]) {
                    in[arc.to] = 1;
                    queue.push_back(arc.to);
                }
            }
        }
        return in;
    }

    // Reverse residual reachability from the sinks, same infinite treatment.
    std::vector<char> sink_side() const {
        std::vector<char> in(n_, 0);
        std::deque<std::int32_t> queue;
        for (std::int32_t v = 0; v < n_; ++v)
            if (sink_[v]) {
                in[v] = 1;
                queue.push_back(v);
            }
        while (!queue.empty()) {
            const std::int32_t v = queue.front();
            queue.pop_front();
            for (const std::int32_t a : net_->adj[v]) {
                const FlowNetwork::Arc& back = net_->arcs[a ^ 1];
                if (!back.soft && back.residual <= 0) continue;
                const std::int32_t u = net_->arcs[a].to;
                if (!in[u]) {
                    in[u] = 1;
                    queue.push_back(u);
                }
            }
        }
        return in;
    }

private:
    void push(std::int32_t from, std::int32_t a, Weight amount) {
        FlowNetwork::Arc& arc = net_->arcs[a];
        arc.residual -= amount;
        net_->arcs[a ^ 1].residual += amount;
        if (!source_[from]) exc_[from] -= amount;
        exc_[arc.to] += amount;
    }

    void relabel(std::int32_t u) {
        std::int32_t best = 2 * n_;
        for (const std::int32_t a : net_->adj[u]) {
            const FlowNetwork::Arc& arc = net_->arcs[a];
            if (arc.residual > 0) best = std::min(best, dist_[arc.to] + 1);
        }
        dist_[u] = best;
    }

    // Exact labels: BFS distance to the nearest sink in the residual graph;
    // vertices that cannot reach any sink get label n (sources always n).
    void global_relabel() {
        std::fill(dist_.begin(), dist_.end(), n_);
        std::deque<std::int32_t> queue;
        for (std::int32_t v = 0; v < n_; ++v)
            if (sink_[v]) {
                dist_[v] = 0;
                queue.push_back(v);
            }
        while (!queue.empty()) {
            const std::int32_t v = queue.front();
            queue.pop_front();
            for (const std::int32_t a : net_->adj[v]) {
                const std::int32_t u = net_->arcs[a].to;
                if (net_->arcs[a ^ 1].residual <= 0) continue;
                if (source_[u] || dist_[u] != n_) continue;
                dist_[u] = dist_[v] + 1;
                queue.push_back(u);
            }
        }
    }

    FlowNetwork* net_;
    Config cfg_;
    std::int32_t n_;
    std::vector<Weight> exc_;
    std::vector<std::int32_t> dist_;
    std::vector<bool> source_;
    std::vector<bool> sink_;
};

}  // namespace hyperpart

#endif
