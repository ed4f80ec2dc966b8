#include "dynsp/staging.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace dynsp {

double StageTimeline::total() const {
    double t = 0;
    for (const auto& s : stages) t = std::max(t, s.end);
    for (const auto& [stage, at] : publications) t = std::max(t, at);
    return t;
}

double StageTimeline::published_at(int stage) const {
    for (const auto& [s, at] : publications)
        if (s == stage) return at;
    return -1;
}

bool StageTimeline::monotone() const {
    for (std::size_t i = 1; i < publications.size(); ++i)
        if (publications[i].first < publications[i - 1].first || publications[i].second < publications[i - 1].second)
            return false;
    return true;
}

std::string StageTimeline::to_json() const {
    nlohmann::json j;
    j["schema"] = "stage-timeline/1";
    j["batch_id"] = batch_id;
    j["index"] = index;
    j["stages"] = nlohmann::json::array();
    for (const auto& s : stages)
        j["stages"].push_back({{"name", s.name}, {"start", s.start}, {"end", s.end}, {"touched", s.touched}});
    j["publications"] = nlohmann::json::array();
    for (const auto& [stage, at] : publications) j["publications"].push_back({{"stage", stage}, {"at", at}});
    j["counters"] = counters;
    return j.dump();
}

Distance StagedIndex::query_stage(int stage, Vertex s, Vertex t) const {
    if (stage < 1 || stage > stage_count()) throw StageError("no query stage " + std::to_string(stage));
    if (stage > published_stage())
        throw StageError("query stage " + std::to_string(stage) + " is not published (current " +
                         std::to_string(published_stage()) + ")");
    check_vertices(s, t);
    return answer(stage, s, t);
}

void StagedIndex::check_vertices(Vertex s, Vertex t) const {
    const std::size_t n = graph().vertex_count();
    if (s >= n || t >= n) throw std::out_of_range("query vertex out of range");
}

PassClock::PassClock(StageTimeline& timeline, StageMarker& marker, const StageObserver& observer)
    : timeline_(timeline), marker_(marker), observer_(observer), begin_(std::chrono::steady_clock::now()) {
    marker_.store(0);
}

double PassClock::now() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count();
}

StageRecord& PassClock::record(std::string name, double start, std::uint64_t touched) {
    timeline_.stages.push_back({std::move(name), start, now(), touched});
    return timeline_.stages.back();
}

void PassClock::publish(int stage) {
    if (stage < marker_.load()) throw std::logic_error("stage marker moved backwards");
    marker_.store(stage);
    timeline_.publications.push_back({stage, now()});
    if (observer_) observer_(stage);
}

}  // namespace dynsp
