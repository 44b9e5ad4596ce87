#include "liftgraph/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "liftgraph/errors.hpp"
#include "liftgraph/random.hpp"

namespace liftgraph {

std::string_view feature_kind_name(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::NodeLabelsOneHot: return "node_labels_onehot";
        case FeatureKind::NodeAttributes: return "node_attributes";
        case FeatureKind::DegreeOneHot: return "degree_onehot";
    }
    return "unknown";
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(graphs.size());
    for (const Graph& g : graphs) out.push_back(g.label().value_or(-1));
    return out;
}

void Dataset::validate() const {
    std::vector<char> seen(num_classes, 0);
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const Graph& g = graphs[i];
        if (!g.label() || *g.label() < 0 || static_cast<std::size_t>(*g.label()) >= num_classes) {
            throw std::invalid_argument("dataset " + name + ": graph " + std::to_string(i) + " lacks a valid label");
        }
        seen[static_cast<std::size_t>(*g.label())] = 1;
        if (g.num_nodes() == 0) throw std::invalid_argument("dataset " + name + ": graph " + std::to_string(i) + " is empty");
        if (g.feature_dim() != feature_dim) {
            throw ShapeError("dataset " + name + ": graph " + std::to_string(i) + " has feature width " +
                             std::to_string(g.feature_dim()) + ", expected " + std::to_string(feature_dim));
        }
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (!seen[c]) throw std::invalid_argument("dataset " + name + ": class " + std::to_string(c) + " has no graphs");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        parts.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return parts;
}

struct TextFile {
    std::string path;
    std::vector<std::string> lines;  // non-empty lines
    std::vector<std::size_t> line_numbers;
};

std::optional<TextFile> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    TextFile file;
    file.path = path.string();
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        file.lines.push_back(line);
        file.line_numbers.push_back(number);
    }
    return file;
}

TextFile require_lines(const std::filesystem::path& path) {
    auto file = read_lines(path);
    if (!file) throw ParseError("missing mandatory file " + path.string());
    return std::move(*file);
}

long long parse_int(const TextFile& file, std::size_t idx, std::string_view token) {
    long long value = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end || token.empty()) {
        throw ParseError(file.path, file.line_numbers[idx], "expected an integer, got '" + std::string(token) + "'");
    }
    return value;
}

double parse_real(const TextFile& file, std::size_t idx, std::string_view token) {
    try {
        std::size_t used = 0;
        const std::string s(token);
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError(file.path, file.line_numbers[idx], "expected a number, got '" + std::string(token) + "'");
    }
}

std::vector<long long> parse_int_column(const TextFile& file) {
    std::vector<long long> out;
    out.reserve(file.lines.size());
    for (std::size_t i = 0; i < file.lines.size(); ++i) {
        const auto parts = split_commas(file.lines[i]);
        out.push_back(parse_int(file, i, parts.front()));
    }
    return out;
}

}  // namespace

Matrix degree_one_hot(const Graph& g, std::size_t width, std::size_t cap) {
    const auto deg = degree(g);
    Matrix m(g.num_nodes(), width);
    for (std::size_t i = 0; i < deg.size(); ++i) {
        const auto slot = std::min(static_cast<std::size_t>(std::llround(deg[i])), cap);
        m(i, std::min(slot, width - 1)) = 1.0;
    }
    return m;
}

Dataset load_tu(const std::filesystem::path& dir, const std::string& name, const TuOptions& options) {
    if (!std::filesystem::is_directory(dir)) throw ParseError("dataset directory " + dir.string() + " does not exist");
    const auto file_for = [&](const char* suffix) { return dir / (name + suffix); };

    const TextFile indicator_file = require_lines(file_for("_graph_indicator.txt"));
    const TextFile labels_file = require_lines(file_for("_graph_labels.txt"));
    const TextFile edges_file = require_lines(file_for("_A.txt"));

    const auto indicator = parse_int_column(indicator_file);
    const std::size_t num_nodes = indicator.size();
    const auto raw_labels = parse_int_column(labels_file);
    const std::size_t num_graphs = raw_labels.size();

    std::vector<std::size_t> graph_of(num_nodes);
    std::vector<std::size_t> local_index(num_nodes);
    std::vector<std::size_t> graph_size(num_graphs, 0);
    for (std::size_t i = 0; i < num_nodes; ++i) {
        const long long gid = indicator[i];
        if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs) {
            throw ParseError(indicator_file.path, indicator_file.line_numbers[i],
                             "graph id " + std::to_string(gid) + " outside 1.." + std::to_string(num_graphs));
        }
        graph_of[i] = static_cast<std::size_t>(gid - 1);
        local_index[i] = graph_size[graph_of[i]]++;
    }

    std::vector<std::set<std::pair<std::size_t, std::size_t>>> edge_sets(num_graphs);
    for (std::size_t i = 0; i < edges_file.lines.size(); ++i) {
        const auto parts = split_commas(edges_file.lines[i]);
        if (parts.size() != 2) throw ParseError(edges_file.path, edges_file.line_numbers[i], "expected 'i, j'");
        const long long a = parse_int(edges_file, i, parts[0]);
        const long long b = parse_int(edges_file, i, parts[1]);
        for (long long v : {a, b}) {
            if (v < 1 || static_cast<std::size_t>(v) > num_nodes) {
                throw ParseError(edges_file.path, edges_file.line_numbers[i],
                                 "node id " + std::to_string(v) + " outside 1.." + std::to_string(num_nodes));
            }
        }
        const auto u = static_cast<std::size_t>(a - 1), v = static_cast<std::size_t>(b - 1);
        if (graph_of[u] != graph_of[v]) {
            throw ParseError(edges_file.path, edges_file.line_numbers[i],
                             "edge (" + std::to_string(a) + ", " + std::to_string(b) + ") crosses graphs " +
                                 std::to_string(graph_of[u] + 1) + " and " + std::to_string(graph_of[v] + 1));
        }
        if (u == v) continue;  // raw graphs carry no self-loops
        const std::size_t lu = local_index[u], lv = local_index[v];
        edge_sets[graph_of[u]].insert({std::min(lu, lv), std::max(lu, lv)});
    }

    Dataset ds;
    ds.name = name;

    // Features: attributes > node labels > degree.
    std::optional<Matrix> node_features;
    if (auto attr_file = read_lines(file_for("_node_attributes.txt"))) {
        if (attr_file->lines.size() != num_nodes) {
            throw ParseError(attr_file->path, attr_file->lines.size(),
                             "has " + std::to_string(attr_file->lines.size()) + " rows for " + std::to_string(num_nodes) + " nodes");
        }
        std::size_t width = 0;
        std::vector<std::vector<double>> rows(num_nodes);
        for (std::size_t i = 0; i < num_nodes; ++i) {
            for (auto tok : split_commas(attr_file->lines[i])) rows[i].push_back(parse_real(*attr_file, i, tok));
            if (i == 0) width = rows[i].size();
            if (rows[i].size() != width) {
                throw ParseError(attr_file->path, attr_file->line_numbers[i], "attribute count differs from first row");
            }
        }
        node_features = Matrix(num_nodes, width);
        for (std::size_t i = 0; i < num_nodes; ++i)
            for (std::size_t j = 0; j < width; ++j) (*node_features)(i, j) = rows[i][j];
        ds.feature_kind = FeatureKind::NodeAttributes;
    } else if (auto label_file = read_lines(file_for("_node_labels.txt"))) {
        if (label_file->lines.size() != num_nodes) {
            throw ParseError(label_file->path, label_file->lines.size(),
                             "has " + std::to_string(label_file->lines.size()) + " rows for " + std::to_string(num_nodes) + " nodes");
        }
        const auto node_labels = parse_int_column(*label_file);
        std::map<long long, std::size_t> slot;
        for (long long l : node_labels) slot.emplace(l, 0);
        std::size_t next = 0;
        for (auto& [l, s] : slot) s = next++;
        node_features = Matrix(num_nodes, slot.size());
        for (std::size_t i = 0; i < num_nodes; ++i) (*node_features)(i, slot[node_labels[i]]) = 1.0;
        ds.feature_kind = FeatureKind::NodeLabelsOneHot;
    } else {
        ds.feature_kind = FeatureKind::DegreeOneHot;
    }

    std::map<long long, int> label_map;
    for (long long l : raw_labels) label_map.emplace(l, 0);
    int next_label = 0;
    for (auto& [l, mapped] : label_map) mapped = next_label++;
    ds.num_classes = label_map.size();

    std::vector<std::vector<std::size_t>> members(num_graphs);
    for (std::size_t i = 0; i < num_nodes; ++i) members[graph_of[i]].push_back(i);

    for (std::size_t gi = 0; gi < num_graphs; ++gi) {
        if (members[gi].empty()) {
            throw ParseError(labels_file.path, labels_file.line_numbers[gi], "graph " + std::to_string(gi + 1) + " has no nodes");
        }
        std::vector<Edge> edges;
        for (const auto& [u, v] : edge_sets[gi]) edges.push_back({u, v, 1.0});
        const std::size_t n = members[gi].size();
        Matrix features(n, node_features ? node_features->cols() : 0);
        if (node_features) {
            for (std::size_t a = 0; a < n; ++a) {
                const auto src = node_features->row_span(members[gi][a]);
                std::copy(src.begin(), src.end(), features.row_span(a).begin());
            }
        }
        Graph g(n, std::move(edges), std::move(features), label_map[raw_labels[gi]]);
        std::vector<std::int64_t> ids;
        for (std::size_t node : members[gi]) ids.push_back(static_cast<std::int64_t>(node + 1));
        g.set_node_ids(std::move(ids));
        g.set_source_index(gi);
        ds.graphs.push_back(std::move(g));
    }

    if (ds.feature_kind == FeatureKind::DegreeOneHot) {
        std::size_t max_degree = 0;
        for (const Graph& g : ds.graphs)
            for (double d : degree(g)) max_degree = std::max(max_degree, static_cast<std::size_t>(std::llround(d)));
        const std::size_t width = std::min(max_degree, options.degree_cap) + 1;
        for (Graph& g : ds.graphs) g.set_features(degree_one_hot(g, width, options.degree_cap));
    }
    ds.feature_dim = ds.graphs.empty() ? 0 : ds.graphs.front().feature_dim();
    ds.validate();
    return ds;
}

Graph make_cycle(std::size_t n) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
    return Graph(n, std::move(edges), Matrix(n, 0));
}

Graph make_path(std::size_t n) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    return Graph(n, std::move(edges), Matrix(n, 0));
}

Dataset synth_cycles_vs_paths(std::size_t n_graphs, std::size_t min_size, std::size_t max_size, std::uint64_t seed) {
    if (min_size < 4 || max_size > 64 || min_size > max_size) {
        throw ConfigError("synthetic size range must satisfy 4 <= min <= max <= 64");
    }
    Rng rng(seed);
    Dataset ds;
    ds.name = "cycles-paths";
    ds.num_classes = 2;
    ds.feature_dim = 3;
    ds.feature_kind = FeatureKind::DegreeOneHot;
    for (std::size_t i = 0; i < n_graphs; ++i) {
        const std::size_t n = min_size + rng.below(max_size - min_size + 1);
        const int label = static_cast<int>(i % 2);
        Graph g = label == 0 ? make_cycle(n) : make_path(n);
        g.set_features(degree_one_hot(g, 3, 2));
        g.set_label(label);
        g.set_source_index(i);
        ds.graphs.push_back(std::move(g));
    }
    return ds;
}

std::vector<std::vector<std::size_t>> FoldPlan::folds() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(i);
    return out;
}

FoldPlan make_folds(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("fold count must be at least 2");
    std::vector<std::size_t> order(ds.graphs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ds.graphs[a].source_index().value_or(a) < ds.graphs[b].source_index().value_or(b);
    });

    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t i : order) {
        const int label = ds.graphs[i].label().value_or(-1);
        if (label < 0 || static_cast<std::size_t>(label) >= ds.num_classes) {
            throw std::invalid_argument("make_folds: graph " + std::to_string(i) + " has no valid label");
        }
        by_class[static_cast<std::size_t>(label)].push_back(i);
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(ds.graphs.size(), 0);
    std::size_t cursor = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < k) {
            throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                              " graphs, fewer than " + std::to_string(k) + " folds");
        }
        Rng rng(derive_seed(seed, c));
        rng.shuffle(by_class[c]);
        for (std::size_t i : by_class[c]) {
            plan.assignments[i] = cursor;
            cursor = (cursor + 1) % k;
        }
    }
    return plan;
}

}  // namespace liftgraph
