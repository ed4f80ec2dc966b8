#include "dynsp/engines.hpp"

#include <chrono>
#include <stdexcept>

#include "dynsp/mhl.hpp"
#include "dynsp/pmhl.hpp"
#include "dynsp/postmhl.hpp"
#include "dynsp/search.hpp"

namespace dynsp {

EdgeOnlyIndex::EdgeOnlyIndex(RoadNetwork g) : graph_(std::move(g)) { marker_.store(1); }

StageTimeline EdgeOnlyIndex::apply_batch(const UpdateBatch& batch, const StageObserver& observer) {
    StageTimeline tl;
    tl.batch_id = batch.batch_id;
    tl.index = std::string(kind());
    const int before = published_stage();
    PassClock clock(tl, marker_, observer);
    const double start = clock.now();
    std::vector<WeightChange> changes;
    try {
        changes = apply_updates(graph_, batch);
    } catch (...) {
        marker_.store(before);
        throw;
    }
    clock.record("U1 edges", start, changes.size());
    clock.publish(1);
    return tl;
}

Distance EdgeOnlyIndex::answer(int, Vertex s, Vertex t) const { return bidijkstra(graph_, s, t); }

int Engine::serving_stage(int published) const {
    int best = 0;
    for (int s : stages)
        if (s <= published) best = s;
    return best;
}

const std::vector<std::string>& engine_names() {
    static const std::vector<std::string> names{"bidijkstra", "dch", "dh2h", "mhl", "pmhl", "postmhl"};
    return names;
}

std::string canonical_engine_name(std::string_view name) {
    if (name == "ch") return "dch";
    if (name == "h2h") return "dh2h";
    for (const std::string& n : engine_names())
        if (n == name) return n;
    throw std::invalid_argument("unknown engine '" + std::string(name) + "'");
}

Engine make_engine(std::string_view requested, const RoadNetwork& g, const EngineParams& params) {
    const std::string name = canonical_engine_name(requested);
    Engine e;
    e.name = name;
    const auto begin = std::chrono::steady_clock::now();
    if (name == "bidijkstra") {
        e.index = std::make_unique<EdgeOnlyIndex>(g);
        e.stages = {1};
    } else if (name == "dch") {
        e.index = std::make_unique<MhlIndex>(g, nullptr, false);
        e.stages = {1, 2};
    } else if (name == "dh2h") {
        e.index = std::make_unique<MhlIndex>(g);
        e.stages = {1, 3};
    } else if (name == "mhl") {
        e.index = std::make_unique<MhlIndex>(g);
        e.stages = {1, 2, 3};
    } else if (name == "pmhl") {
        e.index = std::make_unique<PmhlIndex>(g, PmhlParams{params.partitions, params.seed});
        e.stages = {1, 2, 3, 4, 5};
    } else {
        e.index = std::make_unique<PostMhlIndex>(g, params.td);
        e.stages = {1, 2, 3, 4};
    }
    e.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    e.index->set_workers(params.workers);
    return e;
}

}  // namespace dynsp
