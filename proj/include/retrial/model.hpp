#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace retrial {

/// A state (i, j): i busy recovery units, j infected nodes in the orbit.
struct State {
    int i = 0;
    int j = 0;

    friend bool operator==(const State&, const State&) = default;
};

/// Finite state space over (i, j) with 0 <= i <= c and 0 <= j <= N - c,
/// linearised row-major by server level.
class StateSpace {
public:
    StateSpace(int population, int servers);

    int population() const noexcept { return population_; }
    int servers() const noexcept { return servers_; }
    /// Number of orbit levels per server level, N - c + 1.
    int width() const noexcept { return population_ - servers_ + 1; }
    int max_orbit() const noexcept { return population_ - servers_; }
    std::size_t size() const noexcept {
        return static_cast<std::size_t>(servers_ + 1) * static_cast<std::size_t>(width());
    }

    bool contains(State s) const noexcept;

    friend bool operator==(const StateSpace&, const StateSpace&) = default;

private:
    int population_;
    int servers_;
};

/// Linear index (N - c + 1) * i + j. Throws DomainError for states outside the space.
std::size_t state_index(const StateSpace& space, State s);
/// Inverse of state_index.
State state_at(const StateSpace& space, std::size_t index);
/// All states ordered by index.
std::vector<State> enumerate_states(const StateSpace& space);

/// Undirected simple graph stored as a dense symmetric 0/1 adjacency matrix.
class ContactGraph {
public:
    ContactGraph() = default;
    explicit ContactGraph(int nodes);

    /// Adds the undirected edge u-v. Repeated edges are idempotent; self-loops throw.
    void add_edge(int u, int v);

    int nodes() const noexcept { return nodes_; }
    bool adjacent(int u, int v) const;
    int degree(int node) const;
    const std::vector<int>& degrees() const noexcept { return degrees_; }
    std::size_t edge_count() const noexcept { return edges_; }

private:
    int nodes_ = 0;
    std::size_t edges_ = 0;
    std::vector<unsigned char> adjacency_;
    std::vector<int> degrees_;
};

int degree(const ContactGraph& graph, int node);

/// Parses the edge-list format: a header line "n <count>" followed by "u v"
/// lines with 0-based ids. Blank lines and lines starting with '#' are skipped.
ContactGraph load_graph(std::string_view text);
ContactGraph load_graph_file(const std::string& path);

/// Hub node 0 joined to every other node, nodes 1..n-1 joined in a ring.
/// This is the topology of the shipped fixture graphs.
ContactGraph ring_plus_hub(int nodes);

enum class ContactMode { homogeneous, heterogeneous };

/// How the count-level chain approximates the infected neighbour set of the tagged node.
enum class NeighborClosure {
    mean_field,    ///< neighbour sum scaled by the infected fraction (i + j) / N
    full_neighbor, ///< every neighbour counted as infected (upper bound)
};

struct ModelConfig {
    int population = 10; ///< N
    int servers = 5;     ///< c
    double alpha = 5.0;  ///< contact rate
    double mu = 0.4;     ///< recovery rate per busy unit
    double theta = 2.0;  ///< retrial rate per orbiting node
    ContactMode mode = ContactMode::homogeneous;
    int tagged_node = 2;
    NeighborClosure closure = NeighborClosure::mean_field;
    State initial_state{0, 0};

    StateSpace space() const { return StateSpace(population, servers); }
    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

double arrival_rate_hom(const ModelConfig& cfg, int i, int j);
double arrival_rate_het(const ModelConfig& cfg, const ContactGraph* graph, int i, int j);

using RateFunction = std::function<double(State)>;

/// Arrival rate lambda(i, j) for the configured contact mode. The graph is
/// required (and copied) in heterogeneous mode.
RateFunction make_arrival_rate(const ModelConfig& cfg, const ContactGraph* graph = nullptr);

std::string to_string(ContactMode mode);
std::string to_string(NeighborClosure closure);
ContactMode parse_contact_mode(std::string_view text);
NeighborClosure parse_closure(std::string_view text);

} // namespace retrial
