#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "tvmin.hpp"

namespace lsgrad {

namespace {

// Dinic max-flow on a small dense-ish graph.
class FlowGraph {
 public:
  explicit FlowGraph(int n) : head_(n, -1), level_(n), iter_(n) {}

  void add_edge(int a, int b, double cap_ab, double cap_ba) {
    if (cap_ab <= 0.0 && cap_ba <= 0.0) return;
    to_.push_back(b);
    cap_.push_back(cap_ab);
    next_.push_back(head_[a]);
    head_[a] = static_cast<int>(to_.size()) - 1;
    to_.push_back(a);
    cap_.push_back(cap_ba);
    next_.push_back(head_[b]);
    head_[b] = static_cast<int>(to_.size()) - 1;
  }

  double max_flow(int s, int t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      std::copy(head_.begin(), head_.end(), iter_.begin());
      for (double f; (f = dfs(s, t, std::numeric_limits<double>::infinity())) > 0.0;) {
        flow += f;
      }
    }
    return flow;
  }

  // Vertices reachable from s in the residual graph (the minimal source set).
  std::vector<char> source_side(int s) const {
    std::vector<char> seen(head_.size(), 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int e = head_[v]; e >= 0; e = next_[e]) {
        if (cap_[e] > kEps && !seen[to_[e]]) {
          seen[to_[e]] = 1;
          q.push(to_[e]);
        }
      }
    }
    return seen;
  }

 private:
  static constexpr double kEps = 1e-13;

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int e = head_[v]; e >= 0; e = next_[e]) {
        if (cap_[e] > kEps && level_[to_[e]] < 0) {
          level_[to_[e]] = level_[v] + 1;
          q.push(to_[e]);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int v, int t, double pushed) {
    if (v == t) return pushed;
    for (int& e = iter_[v]; e >= 0; e = next_[e]) {
      const int w = to_[e];
      if (cap_[e] > kEps && level_[w] == level_[v] + 1) {
        const double d = dfs(w, t, std::min(pushed, cap_[e]));
        if (d > 0.0) {
          cap_[e] -= d;
          cap_[e ^ 1] += d;
          return d;
        }
      }
    }
    return 0.0;
  }

  std::vector<int> head_, to_, next_;
  std::vector<double> cap_;
  std::vector<int> level_, iter_;
};

std::vector<double> distinct_levels(const BoundaryData& h) {
  std::vector<double> lv = h.values;
  for (double v : lv) {
    if (!std::isfinite(v)) throw std::invalid_argument("boundary data contains NaN or inf");
  }
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  return lv;
}

}  // namespace

OracleResult coarea_mincut_min_phi(const Grid& grid, const BoundaryData& h) {
  check_shape(grid, h);
  const std::size_t nc = grid.num_cells();
  if (nc > kOracleMaxCells) {
    throw SizeLimitError("oracle refuses grids with more than " +
                         std::to_string(kOracleMaxCells) + " cells");
  }
  OracleResult res;
  res.levels = distinct_levels(h);
  if (res.levels.size() > kOracleMaxLevels) {
    throw SizeLimitError("oracle refuses more than " + std::to_string(kOracleMaxLevels) +
                         " distinct boundary levels");
  }
  const std::size_t m = res.levels.size();
  res.u = make_bulk(grid, m ? res.levels.front() : 0.0);
  const int src = static_cast<int>(nc);
  const int snk = src + 1;
  std::vector<char> prev(nc, 1);
  const auto& bdry = grid.boundary();

  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double t = res.levels[k];  // any threshold in [l_k, l_{k+1})
    FlowGraph g(static_cast<int>(nc) + 2);
    for (const Face& f : grid.faces()) g.add_edge(f.lo, f.hi, f.length, f.length);
    std::vector<double> up(nc, 0.0), down(nc, 0.0);
    for (const BoundaryFace& b : bdry) {
      (h.values[&b - bdry.data()] > t ? up : down)[b.cell] += b.length;
    }
    for (std::size_t i = 0; i < nc; ++i) {
      g.add_edge(src, static_cast<int>(i), up[i], 0.0);
      g.add_edge(static_cast<int>(i), snk, down[i], 0.0);
    }
    res.cut_values.push_back(g.max_flow(src, snk));
    const auto side = g.source_side(src);
    const double jump = res.levels[k + 1] - res.levels[k];
    for (std::size_t i = 0; i < nc; ++i) {
      if (side[i]) {
        res.u.values[i] += jump;
        if (!prev[i]) res.nested = false;
      }
      prev[i] = side[i];
    }
    res.value += jump * res.cut_values.back();
  }
  return res;
}

double exhaustive_min_phi(const Grid& grid, const BoundaryData& h) {
  check_shape(grid, h);
  const std::size_t nc = grid.num_cells();
  const auto levels = distinct_levels(h);
  if (nc > kExhaustiveMaxCells || levels.size() > kExhaustiveMaxLevels) {
    throw SizeLimitError("exhaustive search needs <= 16 cells and <= 8 levels");
  }
  const double count = std::pow(static_cast<double>(levels.size()), static_cast<double>(nc));
  if (count > kExhaustiveMaxAssignments) {
    throw SizeLimitError("exhaustive search space of " + std::to_string(count) +
                         " assignments is too large");
  }
  std::vector<std::size_t> digit(nc, 0);
  BulkField u = make_bulk(grid, levels.front());
  double best = energy_phi_h_anisotropic(grid, h, u);
  while (true) {
    std::size_t i = 0;
    while (i < nc && ++digit[i] == levels.size()) {
      digit[i] = 0;
      u.values[i] = levels[0];
      ++i;
    }
    if (i == nc) break;
    u.values[i] = levels[digit[i]];
    best = std::min(best, energy_phi_h_anisotropic(grid, h, u));
  }
  return best;
}

}  // namespace lsgrad
