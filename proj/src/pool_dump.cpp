#include <sstream>

#include <json.hpp>

#include "liftgraph/errors.hpp"
#include "liftgraph/pooling.hpp"

namespace liftgraph {

namespace {

std::vector<std::int64_t> ids_of(const Graph& g) {
    if (g.node_ids()) return *g.node_ids();
    std::vector<std::int64_t> ids(g.num_nodes());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i);
    return ids;
}

std::vector<std::pair<std::int64_t, std::int64_t>> edges_of(const Graph& g) {
    const auto ids = ids_of(g);
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    out.reserve(g.num_edges());
    for (const Edge& e : g.edges()) out.emplace_back(ids[e.u], ids[e.v]);
    return out;
}

}  // namespace

PoolingHierarchy build_hierarchy(const Graph& input, std::span<const Graph> level_inputs,
                                 std::span<const PoolingOutcome> outcomes) {
    if (level_inputs.size() != outcomes.size()) throw std::invalid_argument("build_hierarchy: level count mismatch");
    PoolingHierarchy h;
    h.input_ids = ids_of(input);
    h.input_edges = edges_of(input);
    for (std::size_t l = 0; l < outcomes.size(); ++l) {
        HierarchyLevel level;
        level.level = l + 1;
        level.node_ids = ids_of(level_inputs[l]);
        level.scores = outcomes[l].scores;
        for (std::size_t p : outcomes[l].preserved) level.preserved_ids.push_back(level.node_ids[p]);
        level.coarse_edges = edges_of(outcomes[l].coarse_graph);
        h.levels.push_back(std::move(level));
    }
    return h;
}

std::string hierarchy_to_json(const PoolingHierarchy& hierarchy) {
    nlohmann::ordered_json j;
    j["input"]["nodes"] = hierarchy.input_ids;
    j["input"]["edges"] = nlohmann::ordered_json::array();
    for (const auto& [a, b] : hierarchy.input_edges) j["input"]["edges"].push_back({a, b});
    j["levels"] = nlohmann::ordered_json::array();
    for (const HierarchyLevel& level : hierarchy.levels) {
        nlohmann::ordered_json lj;
        lj["level"] = level.level;
        lj["num_nodes_in"] = level.node_ids.size();
        lj["num_nodes_out"] = level.preserved_ids.size();
        lj["nodes"] = level.node_ids;
        lj["scores"] = level.scores;
        lj["preserved"] = level.preserved_ids;
        lj["coarse_edges"] = nlohmann::ordered_json::array();
        for (const auto& [a, b] : level.coarse_edges) lj["coarse_edges"].push_back({a, b});
        j["levels"].push_back(std::move(lj));
    }
    return j.dump(2);
}

std::string hierarchy_to_dot(const PoolingHierarchy& hierarchy) {
    std::ostringstream out;
    out << "graph pooling_hierarchy {\n";
    out << "  node [shape=circle];\n";
    auto emit = [&](std::size_t level, const std::vector<std::int64_t>& nodes,
                    const std::vector<std::pair<std::int64_t, std::int64_t>>& edges) {
        out << "  subgraph cluster_" << level << " {\n";
        out << "    label=\"level " << level << "\";\n";
        for (std::int64_t n : nodes) out << "    \"L" << level << "_" << n << "\" [label=\"" << n << "\"];\n";
        for (const auto& [a, b] : edges) out << "    \"L" << level << "_" << a << "\" -- \"L" << level << "_" << b << "\";\n";
        out << "  }\n";
    };
    emit(0, hierarchy.input_ids, hierarchy.input_edges);
    for (const HierarchyLevel& level : hierarchy.levels) emit(level.level, level.preserved_ids, level.coarse_edges);
    out << "}\n";
    return out.str();
}

}  // namespace liftgraph
