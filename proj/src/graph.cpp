#include "dynsp/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dynsp/rng.hpp"

namespace dynsp {

RoadNetwork RoadNetwork::from_edges(std::size_t n, std::span<const Edge> edges) {
    RoadNetwork g(n);
    for (const Edge& e : edges) g.add_edge(e.u, e.v, e.weight);
    return g;
}

std::optional<Weight> RoadNetwork::weight(Vertex u, Vertex v) const {
    if (u >= adjacency_.size() || v >= adjacency_.size()) return std::nullopt;
    const auto& list = adjacency_[u].size() <= adjacency_[v].size() ? adjacency_[u] : adjacency_[v];
    const Vertex other = adjacency_[u].size() <= adjacency_[v].size() ? v : u;
    for (const Arc& a : list)
        if (a.to == other) return a.weight;
    return std::nullopt;
}

void RoadNetwork::add_edge(Vertex u, Vertex v, Weight w) {
    if (u >= adjacency_.size() || v >= adjacency_.size())
        throw std::out_of_range("add_edge: vertex out of range");
    if (u == v) throw std::invalid_argument("add_edge: self-loop");
    if (w == 0) throw std::invalid_argument("add_edge: weight must be positive");
    for (Arc& a : adjacency_[u]) {
        if (a.to == v) {
            if (w < a.weight) {
                a.weight = w;
                for (Arc& b : adjacency_[v])
                    if (b.to == u) b.weight = w;
            }
            return;
        }
    }
    adjacency_[u].push_back({v, w});
    adjacency_[v].push_back({u, w});
    ++edge_count_;
}

Weight RoadNetwork::set_weight(Vertex u, Vertex v, Weight w) {
    if (w == 0) throw std::invalid_argument("set_weight: weight must be positive");
    if (u >= adjacency_.size() || v >= adjacency_.size())
        throw std::out_of_range("set_weight: vertex out of range");
    Weight old = 0;
    for (Arc& a : adjacency_[u])
        if (a.to == v) {
            old = a.weight;
            a.weight = w;
        }
    if (old == 0) throw std::invalid_argument("set_weight: no such edge");
    for (Arc& a : adjacency_[v])
        if (a.to == u) a.weight = w;
    return old;
}

std::vector<Edge> RoadNetwork::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (Vertex u = 0; u < adjacency_.size(); ++u)
        for (const Arc& a : adjacency_[u])
            if (u < a.to) out.push_back({u, a.to, a.weight});
    std::sort(out.begin(), out.end(),
              [](const Edge& a, const Edge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
    return out;
}

bool operator==(const RoadNetwork& a, const RoadNetwork& b) {
    return a.vertex_count() == b.vertex_count() && a.edges() == b.edges();
}

void validate(const RoadNetwork& g) {
    std::size_t arcs = 0;
    for (Vertex u = 0; u < g.vertex_count(); ++u) {
        std::set<Vertex> seen;
        for (const Arc& a : g.neighbors(u)) {
            ++arcs;
            if (a.weight == 0) throw std::logic_error("non-positive weight");
            if (a.to == u) throw std::logic_error("self-loop");
            if (!seen.insert(a.to).second) throw std::logic_error("parallel edge");
            if (g.weight(a.to, u) != a.weight) throw std::logic_error("asymmetric adjacency");
        }
    }
    if (arcs != 2 * g.edge_count()) throw std::logic_error("edge count mismatch");
}

DistGraph DistGraph::from(const RoadNetwork& g) {
    DistGraph d(g.vertex_count());
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        d.adjacency_[v].reserve(g.degree(v));
        for (const Arc& a : g.neighbors(v)) d.adjacency_[v].push_back({a.to, a.weight});
    }
    return d;
}

Dist DistGraph::weight(Vertex u, Vertex v) const {
    const auto& list = adjacency_[u].size() <= adjacency_[v].size() ? adjacency_[u] : adjacency_[v];
    const Vertex other = adjacency_[u].size() <= adjacency_[v].size() ? v : u;
    for (const auto& [x, w] : list)
        if (x == other) return w;
    return kInfDist;
}

void DistGraph::set_edge(Vertex u, Vertex v, Dist w) {
    if (u == v) throw std::invalid_argument("set_edge: self-loop");
    auto put = [](Adjacency& list, Vertex to, Dist w) {
        for (auto& e : list)
            if (e.first == to) {
                e.second = w;
                return;
            }
        list.push_back({to, w});
    };
    put(adjacency_[u], v, w);
    put(adjacency_[v], u, w);
}

std::vector<WeightChange> apply_updates(RoadNetwork& g, const UpdateBatch& batch) {
    std::vector<WeightChange> changes;
    changes.reserve(batch.updates.size());
    std::set<std::pair<Vertex, Vertex>> touched;
    for (const EdgeUpdate& up : batch.updates) {
        if (up.new_weight == 0)
            throw std::invalid_argument("update batch: non-positive weight on (" + std::to_string(up.u) +
                                        "," + std::to_string(up.v) + ")");
        const auto old = g.weight(up.u, up.v);
        if (!old)
            throw std::invalid_argument("update batch: no edge (" + std::to_string(up.u) + "," +
                                        std::to_string(up.v) + ")");
        if (!touched.insert(std::minmax(up.u, up.v)).second)
            throw std::invalid_argument("update batch: edge updated twice");
        changes.push_back({up.u, up.v, *old, up.new_weight});
    }
    for (const WeightChange& c : changes) g.set_weight(c.u, c.v, c.new_weight);
    return changes;
}

UpdateBatch generate_update_batch(const RoadNetwork& g, std::size_t volume, std::uint64_t seed,
                                  std::uint64_t batch_id) {
    std::vector<Edge> edges = g.edges();
    if (volume > edges.size())
        throw std::invalid_argument("update volume " + std::to_string(volume) + " exceeds edge count " +
                                    std::to_string(edges.size()));
    Rng rng(seed);
    UpdateBatch batch;
    batch.batch_id = batch_id;
    batch.updates.reserve(volume);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < volume; ++i) {
        const std::size_t j = i + rng.below(edges.size() - i);
        std::swap(edges[i], edges[j]);
        const Edge& e = edges[i];
        Weight w;
        if (rng.coin())
            w = std::max<Weight>(1, (e.weight + 1) / 2);
        else
            w = std::min<Weight>(kMaxWeight, e.weight * 2);
        batch.updates.push_back({e.u, e.v, w});
    }
    return batch;
}

std::vector<std::pair<Vertex, Vertex>> generate_query_workload(const RoadNetwork& g, std::size_t count,
                                                               std::uint64_t seed) {
    std::vector<std::pair<Vertex, Vertex>> out;
    if (g.vertex_count() == 0) return out;
    out.reserve(count);
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const auto s = static_cast<Vertex>(rng.below(g.vertex_count()));
        const auto t = static_cast<Vertex>(rng.below(g.vertex_count()));
        out.emplace_back(s, t);
    }
    return out;
}

namespace {

bool is_blank_or_comment(const std::string& line, char comment) {
    for (char c : line) {
        if (c == ' ' || c == '\t' || c == '\r') continue;
        return c == comment;
    }
    return true;
}

}  // namespace

RoadNetwork read_dimacs(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::size_t> n;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank_or_comment(line, 'c')) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "p") {
            std::string kind;
            long long nv = -1, ne = -1;
            if (n) throw ParseError(lineno, "duplicate header");
            if (!(ls >> kind >> nv >> ne) || kind != "sp" || nv < 0 || ne < 0)
                throw ParseError(lineno, "malformed header, expected 'p sp <n> <m>'");
            n = static_cast<std::size_t>(nv);
            edges.reserve(static_cast<std::size_t>(ne));
        } else if (tag == "a") {
            if (!n) throw ParseError(lineno, "arc before header");
            long long u = 0, v = 0, w = 0;
            if (!(ls >> u >> v >> w)) throw ParseError(lineno, "malformed arc");
            if (u < 1 || v < 1 || static_cast<std::size_t>(u) > *n || static_cast<std::size_t>(v) > *n)
                throw ParseError(lineno, "arc references vertex outside 1.." + std::to_string(*n));
            if (w <= 0) throw ParseError(lineno, "non-positive weight");
            if (w > kMaxWeight) throw ParseError(lineno, "weight too large");
            if (u == v) continue;  // self-loops carry no distance information
            edges.push_back({static_cast<Vertex>(u - 1), static_cast<Vertex>(v - 1), static_cast<Weight>(w)});
        } else {
            throw ParseError(lineno, "unknown line type '" + tag + "'");
        }
    }
    if (!n) throw ParseError(lineno, "missing header");
    RoadNetwork g = RoadNetwork::from_edges(*n, edges);
    std::vector<std::uint64_t> ids(*n);
    for (std::size_t i = 0; i < *n; ++i) ids[i] = i + 1;
    g.set_original_ids(std::move(ids));
    return g;
}

RoadNetwork load_dimacs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_dimacs(in);
}

void write_dimacs(std::ostream& out, const RoadNetwork& g) {
    const auto edges = g.edges();
    out << "p sp " << g.vertex_count() << ' ' << 2 * edges.size() << '\n';
    for (const Edge& e : edges) {
        out << "a " << e.u + 1 << ' ' << e.v + 1 << ' ' << e.weight << '\n';
        out << "a " << e.v + 1 << ' ' << e.u + 1 << ' ' << e.weight << '\n';
    }
}

UpdateBatch read_update_batch(std::istream& in, std::uint64_t batch_id) {
    UpdateBatch batch;
    batch.batch_id = batch_id;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank_or_comment(line, '#')) continue;
        std::istringstream ls(line);
        long long u = -1, v = -1, w = 0;
        if (!(ls >> u >> v >> w) || u < 0 || v < 0) throw ParseError(lineno, "expected '<u> <v> <new_weight>'");
        if (w <= 0) throw ParseError(lineno, "non-positive weight");
        batch.updates.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), static_cast<Weight>(w)});
    }
    return batch;
}

void write_update_batch(std::ostream& out, const UpdateBatch& batch) {
    out << "# batch " << batch.batch_id << '\n';
    for (const EdgeUpdate& u : batch.updates) out << u.u << ' ' << u.v << ' ' << u.new_weight << '\n';
}

std::vector<std::pair<Vertex, Vertex>> read_queries(std::istream& in) {
    std::vector<std::pair<Vertex, Vertex>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank_or_comment(line, '#')) continue;
        std::istringstream ls(line);
        long long s = -1, t = -1;
        if (!(ls >> s >> t) || s < 0 || t < 0) throw ParseError(lineno, "expected '<s> <t>'");
        out.emplace_back(static_cast<Vertex>(s), static_cast<Vertex>(t));
    }
    return out;
}

void write_queries(std::ostream& out, std::span<const std::pair<Vertex, Vertex>> queries) {
    for (const auto& [s, t] : queries) out << s << ' ' << t << '\n';
}

}  // namespace dynsp
