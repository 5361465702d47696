#include "zrp/ordering.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "zrp/common.hpp"

namespace zrp {

namespace {

// Dinic max-flow with double capacities; adequate at transport-polytope scale.
struct FlowGraph {
    struct Edge {
        int to;
        double cap;
        int rev;
    };
    std::vector<std::vector<Edge>> adj;
    explicit FlowGraph(int n) : adj(static_cast<std::size_t>(n)) {}

    void add_edge(int from, int to, double cap) {
        adj[static_cast<std::size_t>(from)].push_back({to, cap, static_cast<int>(adj[static_cast<std::size_t>(to)].size())});
        adj[static_cast<std::size_t>(to)].push_back({from, 0.0, static_cast<int>(adj[static_cast<std::size_t>(from)].size()) - 1});
    }

    std::vector<int> level;
    std::vector<std::size_t> iter;

    bool bfs(int s, int t) {
        level.assign(adj.size(), -1);
        std::queue<int> q;
        level[static_cast<std::size_t>(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (const auto& e : adj[static_cast<std::size_t>(v)]) {
                if (e.cap > 1e-15 && level[static_cast<std::size_t>(e.to)] < 0) {
                    level[static_cast<std::size_t>(e.to)] = level[static_cast<std::size_t>(v)] + 1;
                    q.push(e.to);
                }
            }
        }
        return level[static_cast<std::size_t>(t)] >= 0;
    }

    double dfs(int v, int t, double f) {
        if (v == t) return f;
        for (std::size_t& i = iter[static_cast<std::size_t>(v)]; i < adj[static_cast<std::size_t>(v)].size(); ++i) {
            Edge& e = adj[static_cast<std::size_t>(v)][i];
            if (e.cap > 1e-15 && level[static_cast<std::size_t>(v)] < level[static_cast<std::size_t>(e.to)]) {
                double d = dfs(e.to, t, std::min(f, e.cap));
                if (d > 0) {
                    e.cap -= d;
                    adj[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap += d;
                    return d;
                }
            }
        }
        return 0.0;
    }

    double max_flow(int s, int t) {
        double flow = 0.0;
        while (bfs(s, t)) {
            iter.assign(adj.size(), 0);
            double f;
            while ((f = dfs(s, t, std::numeric_limits<double>::infinity())) > 0) flow += f;
        }
        return flow;
    }
};

bool leq(const Configuration& a, const Configuration& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

}  // namespace

DominationResult check_stochastic_domination(const CanonicalEnsemble& lo, const CanonicalEnsemble& hi,
                                             std::size_t pair_cap) {
    if (lo.sites() != hi.sites())
        throw ConfigError("check_stochastic_domination: ensembles live on different lattices");
    if (lo.size() * hi.size() > pair_cap)
        throw NumericError("check_stochastic_domination: PairSpaceTooLarge");

    DominationResult out;
    if (hi.r < lo.r) {
        // total counts preclude eta <= xi anywhere: every lo state generates a
        // violating increasing event
        out.dominated = false;
        out.violating_generators = {0};
        out.nu_lo_event = 1.0;
        out.nu_hi_event = 0.0;
        return out;
    }

    const int n_lo = static_cast<int>(lo.size());
    const int n_hi = static_cast<int>(hi.size());
    const int source = n_lo + n_hi;
    const int sink = source + 1;
    FlowGraph g(n_lo + n_hi + 2);
    for (int i = 0; i < n_lo; ++i) g.add_edge(source, i, lo.nu[static_cast<std::size_t>(i)]);
    for (int j = 0; j < n_hi; ++j) g.add_edge(n_lo + j, sink, hi.nu[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n_lo; ++i)
        for (int j = 0; j < n_hi; ++j)
            if (leq(lo.states[static_cast<std::size_t>(i)], hi.states[static_cast<std::size_t>(j)]))
                g.add_edge(i, n_lo + j, std::numeric_limits<double>::infinity());

    double flow = g.max_flow(source, sink);
    if (flow >= 1.0 - 1e-11) {
        out.dominated = true;
        for (int i = 0; i < n_lo; ++i)
            for (const auto& e : g.adj[static_cast<std::size_t>(i)]) {
                if (e.to < n_lo || e.to >= n_lo + n_hi) continue;
                // residual bookkeeping: flow sent = reverse capacity
                double sent = g.adj[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap;
                if (sent > 1e-15)
                    out.coupling.push_back({static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(e.to - n_lo), sent});
            }
        return out;
    }

    // infeasible: source-side lo states of the min cut generate an increasing
    // event E with nu_lo(E) > nu_hi(E)
    out.dominated = false;
    g.bfs(source, sink);  // residual reachability
    for (int i = 0; i < n_lo; ++i)
        if (g.level[static_cast<std::size_t>(i)] >= 0)
            out.violating_generators.push_back(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < hi.size(); ++j) {
        for (std::size_t gidx : out.violating_generators)
            if (leq(lo.states[gidx], hi.states[j])) {
                out.nu_hi_event += hi.nu[j];
                break;
            }
    }
    for (std::size_t i = 0; i < lo.size(); ++i) {
        for (std::size_t gidx : out.violating_generators)
            if (leq(lo.states[gidx], lo.states[i])) {
                out.nu_lo_event += lo.nu[i];
                break;
            }
    }
    return out;
}

}  // namespace zrp
