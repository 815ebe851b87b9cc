#include "retrial/model.hpp"

#include "retrial/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace retrial {

StateSpace::StateSpace(int population, int servers) : population_(population), servers_(servers) {
    if (population < 2)
        throw DomainError("population N must be at least 2, got " + std::to_string(population));
    if (servers < 1 || servers >= population)
        throw DomainError("recovery units c must satisfy 1 <= c < N, got c=" + std::to_string(servers) +
                          " N=" + std::to_string(population));
}

bool StateSpace::contains(State s) const noexcept {
    return s.i >= 0 && s.i <= servers_ && s.j >= 0 && s.j <= max_orbit();
}

std::size_t state_index(const StateSpace& space, State s) {
    if (!space.contains(s))
        throw DomainError("state (" + std::to_string(s.i) + "," + std::to_string(s.j) + ") outside state space");
    return static_cast<std::size_t>(space.width()) * static_cast<std::size_t>(s.i) + static_cast<std::size_t>(s.j);
}

State state_at(const StateSpace& space, std::size_t index) {
    if (index >= space.size())
        throw DomainError("state index " + std::to_string(index) + " outside state space");
    const auto w = static_cast<std::size_t>(space.width());
    return State{static_cast<int>(index / w), static_cast<int>(index % w)};
}

std::vector<State> enumerate_states(const StateSpace& space) {
    std::vector<State> states;
    states.reserve(space.size());
    for (int i = 0; i <= space.servers(); ++i)
        for (int j = 0; j <= space.max_orbit(); ++j)
            states.push_back({i, j});
    return states;
}

// ---------------------------------------------------------------------------
// ContactGraph

ContactGraph::ContactGraph(int nodes) : nodes_(nodes) {
    if (nodes < 0)
        throw DomainError("negative node count");
    adjacency_.assign(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes), 0);
    degrees_.assign(static_cast<std::size_t>(nodes), 0);
}

void ContactGraph::add_edge(int u, int v) {
    if (u < 0 || v < 0 || u >= nodes_ || v >= nodes_)
        throw DomainError("edge endpoint out of range");
    if (u == v)
        throw DomainError("self-loop on node " + std::to_string(u));
    auto& uv = adjacency_[static_cast<std::size_t>(u) * nodes_ + v];
    if (uv)
        return;
    uv = 1;
    adjacency_[static_cast<std::size_t>(v) * nodes_ + u] = 1;
    ++degrees_[u];
    ++degrees_[v];
    ++edges_;
}

bool ContactGraph::adjacent(int u, int v) const {
    if (u < 0 || v < 0 || u >= nodes_ || v >= nodes_)
        throw DomainError("node id out of range");
    return adjacency_[static_cast<std::size_t>(u) * nodes_ + v] != 0;
}

int ContactGraph::degree(int node) const {
    if (node < 0 || node >= nodes_)
        throw DomainError("node " + std::to_string(node) + " out of range for graph with " +
                          std::to_string(nodes_) + " nodes");
    return degrees_[node];
}

int degree(const ContactGraph& graph, int node) { return graph.degree(node); }

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
            ++pos;
        auto start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r')
            ++pos;
        if (pos > start)
            out.push_back(line.substr(start, pos - start));
    }
    return out;
}

bool parse_int(std::string_view token, int& value) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    return ec == std::errc() && ptr == token.data() + token.size();
}

} // namespace

ContactGraph load_graph(std::string_view text) {
    std::optional<ContactGraph> graph;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        auto tokens = split_ws(line);
        if (tokens.empty() || tokens.front().front() == '#')
            continue;

        if (!graph) {
            int n = 0;
            if (tokens.size() != 2 || tokens[0] != "n" || !parse_int(tokens[1], n) || n < 0)
                throw ParseError(line_no, "expected header \"n <count>\"");
            graph.emplace(n);
            continue;
        }

        int u = 0;
        int v = 0;
        if (tokens.size() != 2 || !parse_int(tokens[0], u) || !parse_int(tokens[1], v))
            throw ParseError(line_no, "expected \"u v\" edge line");
        if (u < 0 || v < 0 || u >= graph->nodes() || v >= graph->nodes())
            throw ParseError(line_no, "node id out of range [0, " + std::to_string(graph->nodes()) + ")");
        if (u == v)
            throw ParseError(line_no, "self-loop on node " + std::to_string(u));
        graph->add_edge(u, v);
    }
    if (!graph)
        throw ParseError(line_no, "missing header \"n <count>\"");
    return std::move(*graph);
}

ContactGraph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open graph file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_graph(buffer.str());
}

ContactGraph ring_plus_hub(int nodes) {
    if (nodes < 4)
        throw DomainError("ring-plus-hub needs at least 4 nodes");
    ContactGraph g(nodes);
    for (int v = 1; v < nodes; ++v) {
        g.add_edge(0, v);
        g.add_edge(v, v + 1 < nodes ? v + 1 : 1);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Configuration and rates

void ModelConfig::validate() const {
    if (population < 2)
        throw ConfigError("model.N: must be >= 2");
    if (servers < 1 || servers >= population)
        throw ConfigError("model.c: must satisfy 1 <= c < N");
    if (!(alpha > 0.0))
        throw ConfigError("model.alpha: must be > 0");
    if (!(mu > 0.0))
        throw ConfigError("model.mu: must be > 0");
    if (!(theta >= 0.0))
        throw ConfigError("model.theta: must be >= 0");
    if (!space().contains(initial_state))
        throw ConfigError("model.initial_state: outside the state space");
    if (mode == ContactMode::heterogeneous && (tagged_node < 0 || tagged_node >= population))
        throw ConfigError("model.tagged_node: must be in [0, N)");
}

double arrival_rate_hom(const ModelConfig& cfg, int i, int j) {
    if (!cfg.space().contains({i, j}))
        throw DomainError("arrival rate requested outside the state space");
    const double n = cfg.population;
    return cfg.alpha * (n - i - j) / n;
}

double arrival_rate_het(const ModelConfig& cfg, const ContactGraph* graph, int i, int j) {
    if (graph == nullptr)
        throw ConfigError("heterogeneous contacts need a contact graph");
    if (cfg.tagged_node < 0 || cfg.tagged_node >= graph->nodes())
        throw ConfigError("tagged node " + std::to_string(cfg.tagged_node) + " not in graph");
    if (!cfg.space().contains({i, j}))
        throw DomainError("arrival rate requested outside the state space");

    const double n = cfg.population;
    const int k = cfg.tagged_node;
    const double dk = graph->degree(k);
    const double alpha_k = cfg.alpha * dk / n;
    const double external = alpha_k * (n - i - j) / n;

    // beta_{l,k} = d_k / N for every neighbour l of k.
    double neighbor_sum = 0.0;
    for (int l = 0; l < graph->nodes(); ++l)
        if (l != k && graph->adjacent(l, k))
            neighbor_sum += dk / n;

    if (cfg.closure == NeighborClosure::mean_field)
        neighbor_sum *= (i + j) / n;
    return external + neighbor_sum;
}

RateFunction make_arrival_rate(const ModelConfig& cfg, const ContactGraph* graph) {
    if (cfg.mode == ContactMode::homogeneous)
        return [cfg](State s) { return arrival_rate_hom(cfg, s.i, s.j); };

    if (graph == nullptr)
        throw ConfigError("heterogeneous contacts need a contact graph");
    if (graph->nodes() != cfg.population)
        throw ConfigError("contact graph has " + std::to_string(graph->nodes()) + " nodes but N=" +
                          std::to_string(cfg.population));
    if (cfg.tagged_node < 0 || cfg.tagged_node >= graph->nodes())
        throw ConfigError("tagged node " + std::to_string(cfg.tagged_node) + " not in graph");
    return [cfg, g = *graph](State s) { return arrival_rate_het(cfg, &g, s.i, s.j); };
}

std::string to_string(ContactMode mode) {
    return mode == ContactMode::homogeneous ? "homogeneous" : "heterogeneous";
}

std::string to_string(NeighborClosure closure) {
    return closure == NeighborClosure::mean_field ? "mean_field" : "full_neighbor";
}

ContactMode parse_contact_mode(std::string_view text) {
    if (text == "homogeneous")
        return ContactMode::homogeneous;
    if (text == "heterogeneous")
        return ContactMode::heterogeneous;
    throw ConfigError("model.mode: expected homogeneous|heterogeneous, got '" + std::string(text) + "'");
}

NeighborClosure parse_closure(std::string_view text) {
    if (text == "mean_field")
        return NeighborClosure::mean_field;
    if (text == "full_neighbor")
        return NeighborClosure::full_neighbor;
    throw ConfigError("model.closure: expected mean_field|full_neighbor, got '" + std::string(text) + "'");
}

} // namespace retrial
