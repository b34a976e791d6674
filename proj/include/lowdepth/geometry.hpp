#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lowdepth/circuit.hpp"
#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/rng.hpp"
#include "lowdepth/serialize.hpp"
#include "lowdepth/simulator.hpp"

namespace lowdepth {

inline constexpr int kMaxJump = 4;

/// Undirected simple graph on vertices 0..n-1.
class Geometry {
 public:
  Geometry() = default;

  Geometry(int n_vertices, const std::vector<std::pair<int, int>>& edges) : n_(n_vertices), adj_(n_vertices) {
    detail::require(n_vertices >= 1, "geometry needs at least one vertex");
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : edges) {
      detail::require(u >= 0 && v >= 0 && u < n_ && v < n_, "geometry edge endpoint out of range");
      detail::require(u != v, "geometry self-loop");
      const auto e = std::minmax(u, v);
      if (!seen.insert(e).second) continue;
      edges_.emplace_back(e.first, e.second);
      adj_[u].push_back(v);
      adj_[v].push_back(u);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
  }

  int n() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }

  int max_degree() const {
    std::size_t d = 0;
    for (const auto& a : adj_) d = std::max(d, a.size());
    return static_cast<int>(d);
  }

  bool has_edge(int u, int v) const { return std::binary_search(adj_[u].begin(), adj_[u].end(), v); }

  /// BFS distances from `src`; unreachable vertices get -1.
  std::vector<int> distances_from(int src) const {
    std::vector<int> dist(n_, -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int w : adj_[u])
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
    }
    return dist;
  }

  bool connected() const {
    const auto d = distances_from(0);
    return std::all_of(d.begin(), d.end(), [](int x) { return x >= 0; });
  }

  int distance(int u, int v) const { return distances_from(u)[v]; }

  /// Shortest path u -> v. From each vertex the next step is the
  /// lowest-index neighbour one step closer to v.
  std::vector<int> shortest_path(int u, int v) const {
    const auto dist = distances_from(v);
    detail::require(dist[u] >= 0, "shortest_path: vertices are disconnected");
    std::vector<int> path{u};
    while (path.back() != v) {
      const int cur = path.back();
      for (int w : adj_[cur])
        if (dist[w] == dist[cur] - 1) {
          path.push_back(w);
          break;
        }
    }
    return path;
  }

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

inline Geometry line_geometry(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Geometry(n, e);
}

inline Geometry ring_geometry(int n) {
  detail::require(n >= 3, "ring needs at least 3 vertices");
  auto e = line_geometry(n).edges();
  e.emplace_back(0, n - 1);
  return Geometry(n, e);
}

/// rows x cols lattice, vertex r*cols + c.
inline Geometry grid_geometry(int rows, int cols) {
  std::vector<std::pair<int, int>> e;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.emplace_back(r * cols + c, r * cols + c + 1);
      if (r + 1 < rows) e.emplace_back(r * cols + c, (r + 1) * cols + c);
    }
  return Geometry(rows * cols, e);
}

/// Random spanning tree (each vertex attaches to an earlier vertex with spare
/// degree) plus up to `extra_edges` random chords, all within `max_degree`.
inline Geometry random_connected_graph(int n, int max_degree, int extra_edges, RngStream& rng) {
  detail::require(n >= 1, "random graph needs vertices");
  detail::require(max_degree >= 2 || n <= 2, "random graph: max_degree must be >= 2");
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  std::shuffle(label.begin(), label.end(), rng);
  std::vector<int> deg(n, 0);
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) {
    std::vector<int> open;
    for (int j = 0; j < i; ++j)
      if (deg[label[j]] < max_degree) open.push_back(label[j]);
    const int parent = open[rng.below(open.size())];
    e.emplace_back(parent, label[i]);
    ++deg[parent];
    ++deg[label[i]];
  }
  std::set<std::pair<int, int>> present;
  for (auto [u, v] : e) present.insert(std::minmax(u, v));
  for (int t = 0; t < extra_edges * 4 && extra_edges > 0; ++t) {
    const int u = static_cast<int>(rng.below(n)), v = static_cast<int>(rng.below(n));
    if (u == v || deg[u] >= max_degree || deg[v] >= max_degree || !present.insert(std::minmax(u, v)).second) continue;
    e.emplace_back(u, v);
    ++deg[u];
    ++deg[v];
    if (static_cast<int>(e.size()) >= n - 1 + extra_edges) break;
  }
  return Geometry(n, e);
}

/// Edge-list text: one "u v" pair per line; '#' starts a comment. The vertex
/// count is one more than the largest label.
inline Geometry parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<int, int>> e;
  int n = 0;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream ls(line);
    int u, v;
    if (!(ls >> u)) continue;
    if (!(ls >> v)) throw UsageError("edge list: line needs two vertices: '" + line + "'");
    e.emplace_back(u, v);
    n = std::max({n, u + 1, v + 1});
  }
  detail::require(n > 0, "edge list is empty");
  return Geometry(n, e);
}

inline json geometry_to_json(const Geometry& g) {
  json edges = json::array();
  for (auto [u, v] : g.edges()) edges.push_back({u, v});
  return {{"n", g.n()}, {"edges", edges}};
}

/// Accepts {"n", "edges": [[u, v], ...]} or {"adjacency": [[...], ...]}.
inline Geometry geometry_from_json(const json& j) {
  try {
    std::vector<std::pair<int, int>> e;
    if (j.contains("adjacency")) {
      const auto& adj = j.at("adjacency");
      for (std::size_t u = 0; u < adj.size(); ++u)
        for (const auto& v : adj[u]) e.emplace_back(static_cast<int>(u), v.get<int>());
      return Geometry(static_cast<int>(adj.size()), e);
    }
    for (const auto& p : j.at("edges")) e.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    return Geometry(j.at("n").get<int>(), e);
  } catch (const json::exception& ex) {
    throw UsageError(std::string("malformed geometry JSON: ") + ex.what());
  }
}

/// Loads a geometry from a .json file or an edge-list text file.
inline Geometry load_geometry(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return geometry_from_json(parse_json_text(text, path));
  return parse_edge_list(text);
}

// ------------------------------------------------------- Hamiltonian paths

struct HamPath {
  std::vector<int> order;
  std::vector<int> jump_distances;  // graph distance from order[i] to order[i+1]

  int max_jump() const {
    return jump_distances.empty() ? 0 : *std::max_element(jump_distances.begin(), jump_distances.end());
  }
};

inline json ham_path_to_json(const HamPath& p) { return {{"order", p.order}, {"jump_distances", p.jump_distances}}; }

namespace detail {

// Path through the subtree at v: v, P(c_1), ..., P(c_{l-1}), B(c_l), where
// B(c_l) moves the first vertex of P(c_l) to its end. Every P starts at its
// root and ends at a child of it. The rotation needs the second vertex of
// P(c_l) to be a child of c_l; when c_l has a single non-leaf child it is not,
// and B(c_l) is P(c_l) reversed instead. Both forms end at c_l and start
// within distance one of it, so every jump stays within distance four.
inline std::vector<int> subtree_path(const std::vector<std::vector<int>>& children, int v) {
  std::vector<int> out{v};
  const auto& ch = children[v];
  for (std::size_t i = 0; i < ch.size(); ++i) {
    std::vector<int> sub = subtree_path(children, ch[i]);
    if (i + 1 == ch.size()) {
      const auto& grand = children[ch[i]];
      if (sub.size() == 1 || std::find(grand.begin(), grand.end(), sub[1]) != grand.end())
        std::rotate(sub.begin(), sub.begin() + 1, sub.end());
      else
        std::reverse(sub.begin(), sub.end());
    }
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

}  // namespace detail

/// Hamiltonian path on the distance-4 graph of `g`: a DFS tree (children in
/// ascending order) traversed by the recursive rule in detail::subtree_path.
/// A DFS tree that is a single chain is already a Hamiltonian path of g and
/// is returned as is.
inline HamPath hamiltonian_path_g4(const Geometry& g, int root = 0) {
  detail::require(root >= 0 && root < g.n(), "hamiltonian_path_g4: root out of range");
  detail::require(g.connected(), "hamiltonian_path_g4: graph is disconnected");
  std::vector<std::vector<int>> children(g.n());
  std::vector<bool> seen(g.n(), false);
  std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
  seen[root] = true;
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    const auto& nb = g.neighbors(v);
    while (next < nb.size() && seen[nb[next]]) ++next;
    if (next == nb.size()) {
      stack.pop_back();
      continue;
    }
    const int w = nb[next++];
    seen[w] = true;
    children[v].push_back(w);
    stack.emplace_back(w, 0);
  }
  HamPath p;
  const bool chain = std::all_of(children.begin(), children.end(), [](const auto& c) { return c.size() <= 1; });
  if (chain) {
    for (int v = root;; v = children[v][0]) {
      p.order.push_back(v);
      if (children[v].empty()) break;
    }
  } else {
    p.order = detail::subtree_path(children, root);
  }
  for (std::size_t i = 0; i + 1 < p.order.size(); ++i) p.jump_distances.push_back(g.distance(p.order[i], p.order[i + 1]));
  return p;
}

// -------------------------------------------------------- swap networks

struct SwapSchedule {
  Circuit circuit;                    // native-edge circuit on the vertices of G
  std::vector<std::vector<int>> paths;  // shortest path of each two-qubit gate
  std::vector<int> colors;            // colour of each two-qubit gate
  int num_colors = 0;
  int max_conflict_degree = 0;
  int swap_count = 0;
};

/// |ball of radius r| in a graph of maximum degree delta.
inline long long ball_size_bound(int delta, int r) {
  long long total = 1, shell = delta;
  for (int i = 0; i < r; ++i) {
    total += shell;
    shell *= std::max(delta - 1, 0);
  }
  return total;
}

/// Bound on the conflict-graph degree for jumps of length <= 4: each of the
/// at most 5 path vertices lies on paths of at most |ball(4)| disjoint pairs.
inline long long conflict_degree_bound(int delta) { return 5 * ball_size_bound(delta, kMaxJump); }

namespace detail {

inline void append_gate_on(Circuit& out, const Gate& g, std::vector<int> qubits) {
  Gate moved = g;
  moved.qubits = std::move(qubits);
  out.append_asap(std::move(moved));
}

}  // namespace detail

/// Compiles one layer of gates on G^(4) onto native edges of G. Each
/// two-qubit gate (a, b) moves a along the shortest path next to b by SWAPs,
/// acts, and moves back along the same path. Gates whose paths intersect
/// conflict; a greedy colouring groups non-conflicting gates, and colours are
/// emitted one after another (gates are placed as early as their qubits allow).
inline SwapSchedule compile_depth1_on_g4(const Geometry& g, const Layer& layer) {
  SwapSchedule s{Circuit(g.n()), {}, {}, 0, 0, 0};
  std::vector<bool> used(g.n(), false);
  std::vector<const Gate*> singles, pairs;
  for (const auto& gate : layer) {
    detail::require(gate.arity() <= 2, "compile_depth1_on_g4: gates must act on at most two qubits");
    for (int q : gate.qubits) {
      detail::require(q >= 0 && q < g.n(), "compile_depth1_on_g4: qubit outside geometry");
      detail::require(!used[q], "compile_depth1_on_g4: overlapping gates");
      used[q] = true;
    }
    (gate.arity() == 1 ? singles : pairs).push_back(&gate);
  }
  for (const Gate* p : pairs) {
    auto path = g.shortest_path(p->qubits[0], p->qubits[1]);
    detail::require(static_cast<int>(path.size()) - 1 <= kMaxJump, "compile_depth1_on_g4: gate distance exceeds four");
    s.paths.push_back(std::move(path));
  }
  const std::size_t m = pairs.size();
  std::vector<std::vector<int>> conflicts(m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      const std::set<int> pa(s.paths[a].begin(), s.paths[a].end());
      const bool hit = std::any_of(s.paths[b].begin(), s.paths[b].end(), [&](int v) { return pa.count(v) > 0; });
      if (hit) {
        conflicts[a].push_back(static_cast<int>(b));
        conflicts[b].push_back(static_cast<int>(a));
      }
    }
  for (const auto& c : conflicts) s.max_conflict_degree = std::max(s.max_conflict_degree, static_cast<int>(c.size()));
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return conflicts[a].size() > conflicts[b].size(); });
  s.colors.assign(m, -1);
  for (int a : order) {
    std::set<int> taken;
    for (int b : conflicts[a])
      if (s.colors[b] >= 0) taken.insert(s.colors[b]);
    int c = 0;
    while (taken.count(c)) ++c;
    s.colors[a] = c;
    s.num_colors = std::max(s.num_colors, c + 1);
  }
  for (const Gate* p : singles) s.circuit.append_asap(*p);
  for (int color = 0; color < s.num_colors; ++color)
    for (std::size_t a = 0; a < m; ++a) {
      if (s.colors[a] != color) continue;
      const auto& path = s.paths[a];
      const std::size_t d = path.size() - 1;
      for (std::size_t i = 0; i + 1 < d; ++i) {
        s.circuit.append_asap(Gate::named(GateName::SWAP, {path[i], path[i + 1]}));
        ++s.swap_count;
      }
      detail::append_gate_on(s.circuit, *pairs[a], {path[d - 1], path[d]});
      for (std::size_t i = d - 1; i-- > 0;) {
        s.circuit.append_asap(Gate::named(GateName::SWAP, {path[i], path[i + 1]}));
        ++s.swap_count;
      }
    }
  return s;
}

inline json swap_schedule_to_json(const SwapSchedule& s) {
  return {{"circuit", circuit_to_json(s.circuit)}, {"paths", s.paths},       {"colors", s.colors},
          {"num_colors", s.num_colors},          {"swap_count", s.swap_count}, {"max_conflict_degree", s.max_conflict_degree}};
}

struct CompiledCircuit {
  Circuit circuit;              // on the vertices of G
  std::vector<int> relabeling;  // line position i sits on vertex relabeling[i]
  HamPath path;
  int max_colors = 0;
  int max_conflict_degree = 0;
  int swap_count = 0;
  double overhead = 0.0;  // output depth / input depth
};

/// Maps gate qubits through `relabeling` (qubit i -> relabeling[i]).
inline Circuit relabel_circuit(const Circuit& c, const std::vector<int>& relabeling, int n_out) {
  detail::require(static_cast<int>(relabeling.size()) == c.n(), "relabel: relabeling size mismatch");
  Circuit out(n_out);
  for (const auto& layer : c.layers()) {
    Layer l;
    for (const auto& g : layer) {
      Gate h = g;
      for (int& q : h.qubits) q = relabeling[q];
      l.push_back(std::move(h));
    }
    out.add_layer(std::move(l));
  }
  return out;
}

/// Places a nearest-neighbour line circuit on G: line position i goes to the
/// i-th vertex of the Hamiltonian path, then each layer is compiled by
/// compile_depth1_on_g4.
inline CompiledCircuit compile_1d_to_geometry(const Circuit& c1d, const Geometry& g, int root = 0) {
  detail::require(c1d.n() == g.n(), "compile_1d_to_geometry: qubit count must equal vertex count");
  for (const auto& layer : c1d.layers())
    for (const auto& gate : layer) {
      detail::require(gate.arity() <= 2, "compile_1d_to_geometry: gates must act on at most two qubits");
      if (gate.arity() == 2)
        detail::require(std::abs(gate.qubits[0] - gate.qubits[1]) == 1,
                        "compile_1d_to_geometry: two-qubit gates must be nearest neighbours on the line");
    }
  CompiledCircuit out{Circuit(g.n()), {}, hamiltonian_path_g4(g, root), 0, 0, 0, 0.0};
  out.relabeling = out.path.order;
  const Circuit placed = relabel_circuit(c1d, out.relabeling, g.n());
  for (const auto& layer : placed.layers()) {
    const SwapSchedule s = compile_depth1_on_g4(g, layer);
    out.max_colors = std::max(out.max_colors, s.num_colors);
    out.max_conflict_degree = std::max(out.max_conflict_degree, s.max_conflict_degree);
    out.swap_count += s.swap_count;
    for (const auto& l : s.circuit.layers())
      for (const auto& gate : l) out.circuit.append_asap(gate);
  }
  out.overhead = c1d.depth() == 0 ? 1.0 : static_cast<double>(out.circuit.depth()) / c1d.depth();
  return out;
}

struct EquivalenceReport {
  bool equal = false;
  double max_dev = 0.0;
};

inline constexpr double kEquivalenceTol = 1e-8;

/// Compares unitaries up to global phase after mapping the original's qubit i
/// to the compiled circuit's qubit relabeling[i].
inline EquivalenceReport verify_compilation(const Circuit& original, const Circuit& compiled,
                                            const std::vector<int>& relabeling, double tol = kEquivalenceTol) {
  detail::require_cap(compiled.n() <= 12, "verify_compilation: n exceeds 12");
  detail::require(original.n() == compiled.n(), "verify_compilation: qubit count mismatch");
  const Matrix a = unitary_of(relabel_circuit(original, relabeling, compiled.n()));
  const Matrix b = unitary_of(compiled);
  EquivalenceReport r;
  r.max_dev = phase_aligned_deviation(a, b);
  r.equal = r.max_dev <= tol;
  return r;
}

inline std::vector<int> identity_relabeling(int n) {
  std::vector<int> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

}  // namespace lowdepth
