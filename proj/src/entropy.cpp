#include "lgent/entropy.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace lgent {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t cell_key(const Vec& coords, double cell) {
  uint64_t h = 0x2545f4914f6cdd1dULL;
  for (int i = 0; i < coords.size(); ++i) {
    auto q = static_cast<int64_t>(std::floor(coords(i) / cell));
    h = splitmix64(h ^ static_cast<uint64_t>(q));
  }
  return h;
}

// Dynamic bitset over grid indices.
struct CoverageSet {
  std::vector<uint64_t> bits;
  int count = 0;

  explicit CoverageSet(int n_points = 0) : bits((n_points + 63) / 64, 0) {}
  void set(int i) {
    uint64_t& w = bits[i >> 6];
    uint64_t m = 1ULL << (i & 63);
    if (!(w & m)) {
      w |= m;
      ++count;
    }
  }
  bool test(int i) const { return bits[i >> 6] >> (i & 63) & 1; }
  bool subset_of(const CoverageSet& other) const {
    for (size_t k = 0; k < bits.size(); ++k) {
      if (bits[k] & ~other.bits[k]) return false;
    }
    return true;
  }
  bool operator==(const CoverageSet& other) const { return bits == other.bits; }
  uint64_t hash() const {
    uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (uint64_t w : bits) h = splitmix64(h ^ w);
    return h;
  }
};

struct StepBudget {
  long long steps = 0;
  long long max_steps = 0;
  int horizon = 1;

  StepBudget(long long budget, int n) : max_steps(budget * n), horizon(n) {}
  void charge(long long k) {
    steps += k;
    if (steps > max_steps) {
      throw BudgetExceeded("(word, point) evaluation budget exceeded");
    }
  }
  long long evaluations() const { return (steps + horizon - 1) / horizon; }
};

bool word_lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

AdmissiblePair AdmissiblePair::build(const GroupSpec& g, Box k_box, Box q_box,
                                     double eps, double rho) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (rho > eps / 4.0 + 1e-12) {
    throw ConfigError("grid resolution must satisfy rho <= eps / 4");
  }
  AdmissiblePair pair;
  pair.k_box = std::move(k_box);
  pair.q_box = std::move(q_box);
  pair.eps = eps;
  pair.rho = rho;
  for (Vec& p : pair.k_box.grid(rho)) {
    GroupPoint gp = g.make_point(std::move(p));
    if (!pair.q_box.contains(gp.coords, 1e-12)) {
      throw ConfigError("K grid point outside Q");
    }
    pair.k_grid.push_back(std::move(gp));
  }
  return pair;
}

AdmissiblePair AdmissiblePair::build_segment(const GroupSpec& g,
                                             const Vec& direction,
                                             double length, double spacing,
                                             Box q_box, double eps) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(spacing > 0.0) || spacing > eps / 4.0 + 1e-15) {
    throw ConfigError("segment spacing must satisfy 0 < spacing <= eps / 4");
  }
  Vec dir = direction / direction.norm();
  AdmissiblePair pair;
  pair.q_box = std::move(q_box);
  pair.eps = eps;
  pair.rho = spacing;
  const auto steps = static_cast<long>(std::floor(length / spacing));
  pair.k_grid.reserve(steps + 1);
  for (long i = 0; i <= steps; ++i) {
    GroupPoint gp = g.make_point(i * spacing * dir);
    if (!pair.q_box.contains(gp.coords, 1e-12)) {
      throw ConfigError("K segment point outside Q");
    }
    pair.k_grid.push_back(std::move(gp));
  }
  pair.k_box = Box(Vec::Zero(g.dimension()), Vec::Zero(g.dimension()));
  return pair;
}

AdmissibilityCertificate certify_admissible(const LinearSystem& sys,
                                            const AdmissiblePair& pair,
                                            int horizon, double memo_cell,
                                            long long budget) {
  if (horizon < 1) throw ConfigError("certificate horizon must be >= 1");
  if (memo_cell <= 0.0) memo_cell = pair.rho / 2.0;
  const int n_letters = sys.control().alphabet_size();

  // Try small controls first.
  std::vector<int> letter_order(n_letters);
  for (int i = 0; i < n_letters; ++i) letter_order[i] = i;
  std::stable_sort(letter_order.begin(), letter_order.end(), [&](int a, int b) {
    return sys.control().letter(a).norm() < sys.control().letter(b).norm();
  });

  AdmissibilityCertificate cert;
  cert.horizon = horizon;
  cert.words.resize(pair.k_grid.size());
  StepBudget bud(budget, horizon);

  // memo[cell] = largest remaining-step count known to be unachievable from
  // states in this cell (conflates states at the memo resolution).
  std::unordered_map<uint64_t, int> memo;

  std::vector<int> word;
  std::function<bool(const GroupPoint&, int)> dfs = [&](const GroupPoint& state,
                                                        int remaining) -> bool {
    if (remaining == 0) return true;
    uint64_t key = cell_key(state.coords, memo_cell);
    auto it = memo.find(key);
    if (it != memo.end() && it->second >= remaining) return false;
    for (int letter : letter_order) {
      bud.charge(1);
      GroupPoint next = sys.step_letter(state, letter);
      if (!pair.q_box.contains(next.coords, 1e-12)) continue;
      word.push_back(letter);
      if (dfs(next, remaining - 1)) return true;
      word.pop_back();
    }
    int& worst = memo[key];
    worst = std::max(worst, remaining);
    return false;
  };

  for (size_t i = 0; i < pair.k_grid.size(); ++i) {
    word.clear();
    if (dfs(pair.k_grid[i], horizon)) {
      cert.words[i].letters = word;
    } else {
      cert.uncovered.push_back(static_cast<int>(i));
    }
  }
  cert.evaluations = bud.evaluations();
  return cert;
}

void require_certificate(const AdmissibilityCertificate& cert) {
  if (!cert.complete()) {
    throw NotAdmissibleAtResolution(
        std::to_string(cert.uncovered.size()) +
        " grid points admit no in-Q word over the discretized alphabet "
        "(true inadmissibility not established)");
  }
}

namespace {

struct BeamNode {
  std::vector<int> word;
  std::vector<int> alive;   // grid indices, ascending
  std::vector<Vec> states;  // current chart coordinates, parallel to alive
  double margin = 0.0;      // min chart clearance of the bundle in N_eps(Q)
};

// Chart-space clearance of p inside the eps-inflated box; the beam's
// secondary score. A drifting prefix that still keeps everything alive loses
// to a centered one, which matters when every letter ties on coverage.
double chart_margin(const Box& q, double eps, const Vec& p) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.size(); ++i) {
    m = std::min({m, q.hi(i) + eps - p(i), p(i) - (q.lo(i) - eps)});
  }
  return m;
}

// One lazily generated greedy pick: the best word (beam-searched) that keeps
// `target` inside N_eps(Q) through every step, scored by how many
// still-uncovered points it keeps inside as well.
std::optional<std::pair<std::vector<int>, std::vector<int>>> beam_pick(
    const LinearSystem& sys, const AdmissiblePair& pair, int n, double eps,
    int target, const std::vector<int>& uncovered, StepBudget& bud,
    int beam_width) {
  const GroupSpec& g = sys.group();
  const int n_letters = sys.control().alphabet_size();

  BeamNode root;
  root.alive = uncovered;
  root.states.reserve(uncovered.size());
  for (int idx : uncovered) root.states.push_back(pair.k_grid[idx].coords);

  std::vector<BeamNode> beam;
  beam.push_back(std::move(root));

  for (int depth = 0; depth < n; ++depth) {
    std::vector<BeamNode> candidates;
    for (const BeamNode& node : beam) {
      for (int letter = 0; letter < n_letters; ++letter) {
        BeamNode next;
        next.word = node.word;
        next.word.push_back(letter);
        next.margin = std::numeric_limits<double>::infinity();
        bool target_alive = false;
        bud.charge(static_cast<long long>(node.alive.size()));
        for (size_t k = 0; k < node.alive.size(); ++k) {
          GroupPoint p = sys.step_letter(GroupPoint(node.states[k]), letter);
          if (in_eps_neighborhood(g, pair.q_box, eps, p)) {
            next.alive.push_back(node.alive[k]);
            next.margin = std::min(next.margin, chart_margin(pair.q_box, eps, p.coords));
            next.states.push_back(p.coords);
            if (node.alive[k] == target) target_alive = true;
          }
        }
        if (target_alive) candidates.push_back(std::move(next));
      }
    }
    if (candidates.empty()) return std::nullopt;
    const bool final_depth = depth == n - 1;
    std::sort(candidates.begin(), candidates.end(),
              [final_depth](const BeamNode& a, const BeamNode& b) {
                if (a.alive.size() != b.alive.size()) {
                  return a.alive.size() > b.alive.size();
                }
                // among equal-coverage words the pick is lexicographic; at
                // intermediate depths prefer the better-centered bundle
                if (!final_depth && a.margin != b.margin) {
                  return a.margin > b.margin;
                }
                return word_lex_less(a.word, b.word);
              });
    // Distinct prefixes with identical alive sets expand identically; keep
    // only the lex-smallest of each (otherwise the early no-discrimination
    // depths cost beam_width times the useful work).
    std::vector<BeamNode> kept;
    for (BeamNode& cand : candidates) {
      bool dup = false;
      for (const BeamNode& k : kept) {
        if (k.alive == cand.alive) {
          dup = true;
          break;
        }
      }
      if (!dup) {
        kept.push_back(std::move(cand));
        if (static_cast<int>(kept.size()) == beam_width) break;
      }
    }
    beam = std::move(kept);
  }
  return std::make_pair(beam.front().word, beam.front().alive);
}

// Replays `word` for each listed grid point; returns those staying in
// N_eps(Q) through steps 1..n.
std::vector<int> replay_coverage(const LinearSystem& sys,
                                 const AdmissiblePair& pair, int n, double eps,
                                 const std::vector<int>& word,
                                 const std::vector<int>& points,
                                 StepBudget& bud) {
  const GroupSpec& g = sys.group();
  std::vector<int> covered;
  for (int idx : points) {
    GroupPoint p = pair.k_grid[idx];
    bool ok = true;
    bud.charge(n);
    for (int j = 0; j < n; ++j) {
      p = sys.step_letter(p, word[j]);
      if (!in_eps_neighborhood(g, pair.q_box, eps, p)) {
        ok = false;
        break;
      }
    }
    if (ok) covered.push_back(idx);
  }
  return covered;
}

SpanningResult greedy_cover(const LinearSystem& sys, const AdmissiblePair& pair,
                            const AdmissibilityCertificate& cert, int n,
                            double eps, long long budget) {
  SpanningResult result;
  result.n = n;
  result.eps = eps;
  result.method = CoverMethod::greedy;
  StepBudget bud(budget, n);

  std::vector<int> uncovered(pair.k_grid.size());
  for (size_t i = 0; i < uncovered.size(); ++i) uncovered[i] = static_cast<int>(i);

  const int beam_width = 8;
  while (!uncovered.empty()) {
    const int target = uncovered.front();
    auto picked = beam_pick(sys, pair, n, eps, target, uncovered, bud, beam_width);
    std::vector<int> word, covered;
    if (picked) {
      word = std::move(picked->first);
      covered = std::move(picked->second);
    } else {
      // The certificate word keeps the target in Q itself, hence in N_eps(Q).
      word.assign(cert.words[target].letters.begin(),
                  cert.words[target].letters.begin() + n);
      covered = replay_coverage(sys, pair, n, eps, word, uncovered, bud);
    }
    if (covered.empty()) {
      throw InfeasibleCover("no word covers grid point " + std::to_string(target));
    }
    std::vector<int> remaining;
    remaining.reserve(uncovered.size());
    std::set_difference(uncovered.begin(), uncovered.end(), covered.begin(),
                        covered.end(), std::back_inserter(remaining));
    uncovered = std::move(remaining);
    ControlWord cw;
    cw.letters = std::move(word);
    result.cover.emplace_back(std::move(cw), std::move(covered));
  }
  result.r_inv = static_cast<long long>(result.cover.size());
  result.evaluations = bud.evaluations();
  return result;
}

struct EnumeratedWord {
  std::vector<int> word;
  CoverageSet coverage;
};

// Exhaustive alive-prefix enumeration of every word with nonempty coverage,
// deduplicated by coverage set (lexicographically smallest word kept).
std::vector<EnumeratedWord> enumerate_words(const LinearSystem& sys,
                                            const AdmissiblePair& pair, int n,
                                            double eps, StepBudget& bud,
                                            size_t universe_cap) {
  const GroupSpec& g = sys.group();
  const int n_letters = sys.control().alphabet_size();
  const int n_points = static_cast<int>(pair.k_grid.size());

  std::vector<EnumeratedWord> words;
  std::unordered_map<uint64_t, std::vector<size_t>> dedup;

  std::vector<int> word;
  std::function<void(const std::vector<int>&, const std::vector<Vec>&)> rec =
      [&](const std::vector<int>& alive, const std::vector<Vec>& states) {
        if (static_cast<int>(word.size()) == n) {
          CoverageSet cov(n_points);
          for (int idx : alive) cov.set(idx);
          uint64_t h = cov.hash();
          auto& bucket = dedup[h];
          for (size_t j : bucket) {
            if (words[j].coverage == cov) return;  // first found is lex least
          }
          bucket.push_back(words.size());
          words.push_back(EnumeratedWord{word, std::move(cov)});
          if (words.size() > universe_cap) {
            throw BudgetExceeded("exact word universe exceeds cap after dedup");
          }
          return;
        }
        for (int letter = 0; letter < n_letters; ++letter) {
          std::vector<int> next_alive;
          std::vector<Vec> next_states;
          bud.charge(static_cast<long long>(alive.size()));
          for (size_t k = 0; k < alive.size(); ++k) {
            GroupPoint p = sys.step_letter(GroupPoint(states[k]), letter);
            if (in_eps_neighborhood(g, pair.q_box, eps, p)) {
              next_alive.push_back(alive[k]);
              next_states.push_back(p.coords);
            }
          }
          if (next_alive.empty()) continue;
          word.push_back(letter);
          rec(next_alive, next_states);
          word.pop_back();
        }
      };

  std::vector<int> all(n_points);
  std::vector<Vec> states(n_points);
  for (int i = 0; i < n_points; ++i) {
    all[i] = i;
    states[i] = pair.k_grid[i].coords;
  }
  rec(all, states);
  return words;
}

std::vector<size_t> dominance_filter(const std::vector<EnumeratedWord>& words) {
  std::vector<size_t> order(words.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (words[a].coverage.count != words[b].coverage.count) {
      return words[a].coverage.count > words[b].coverage.count;
    }
    return word_lex_less(words[a].word, words[b].word);
  });
  const size_t pairwise_cap = 20000;
  if (order.size() > pairwise_cap) return order;  // keep all, B&B still exact
  std::vector<size_t> kept;
  for (size_t cand : order) {
    bool dominated = false;
    for (size_t k : kept) {
      if (words[cand].coverage.subset_of(words[k].coverage)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(cand);
  }
  return kept;
}

// Classic greedy over the assembled matrix; the branch-and-bound incumbent.
std::vector<size_t> matrix_greedy(const std::vector<EnumeratedWord>& words,
                                  const std::vector<size_t>& pool, int n_points) {
  CoverageSet covered(n_points);
  std::vector<size_t> chosen;
  while (covered.count < n_points) {
    size_t best = SIZE_MAX;
    int best_gain = 0;
    for (size_t idx : pool) {
      int gain = 0;
      for (size_t w = 0; w < covered.bits.size(); ++w) {
        gain += std::popcount(words[idx].coverage.bits[w] & ~covered.bits[w]);
      }
      if (gain > best_gain ||
          (gain == best_gain && gain > 0 && best != SIZE_MAX &&
           word_lex_less(words[idx].word, words[best].word))) {
        best = idx;
        best_gain = gain;
      }
    }
    if (best == SIZE_MAX) throw InfeasibleCover("grid point covered by no word");
    for (size_t w = 0; w < covered.bits.size(); ++w) {
      uint64_t add = words[best].coverage.bits[w] & ~covered.bits[w];
      covered.bits[w] |= add;
      covered.count += std::popcount(add);
    }
    chosen.push_back(best);
  }
  return chosen;
}

struct BranchAndBound {
  const std::vector<EnumeratedWord>& words;
  const std::vector<size_t>& pool;
  int n_points;
  std::vector<std::vector<size_t>> point_sets;  // covering sets per point
  int max_set_size = 1;
  std::vector<size_t> best;
  std::vector<size_t> chosen;

  BranchAndBound(const std::vector<EnumeratedWord>& w,
                 const std::vector<size_t>& p, int np)
      : words(w), pool(p), n_points(np), point_sets(np) {
    for (size_t idx : p) {
      max_set_size = std::max(max_set_size, words[idx].coverage.count);
      for (int i = 0; i < np; ++i) {
        if (words[idx].coverage.test(i)) point_sets[i].push_back(idx);
      }
    }
    for (int i = 0; i < np; ++i) {
      if (point_sets[i].empty()) {
        throw InfeasibleCover("grid point " + std::to_string(i) +
                              " covered by no enumerated word");
      }
    }
  }

  void run(CoverageSet& covered) {
    if (covered.count == n_points) {
      if (chosen.size() < best.size()) best = chosen;
      return;
    }
    int remaining = n_points - covered.count;
    size_t lower = chosen.size() + (remaining + max_set_size - 1) / max_set_size;
    if (lower >= best.size()) return;

    // Most constrained uncovered point.
    int pivot = -1;
    size_t fewest = SIZE_MAX;
    for (int i = 0; i < n_points; ++i) {
      if (covered.test(i)) continue;
      if (point_sets[i].size() < fewest) {
        fewest = point_sets[i].size();
        pivot = i;
      }
    }
    std::vector<size_t> branches = point_sets[pivot];
    std::stable_sort(branches.begin(), branches.end(), [&](size_t a, size_t b) {
      int ga = 0, gb = 0;
      for (size_t w = 0; w < covered.bits.size(); ++w) {
        ga += std::popcount(words[a].coverage.bits[w] & ~covered.bits[w]);
        gb += std::popcount(words[b].coverage.bits[w] & ~covered.bits[w]);
      }
      if (ga != gb) return ga > gb;
      return word_lex_less(words[a].word, words[b].word);
    });
    for (size_t idx : branches) {
      CoverageSet next = covered;
      for (size_t w = 0; w < next.bits.size(); ++w) {
        uint64_t add = words[idx].coverage.bits[w] & ~next.bits[w];
        next.bits[w] |= add;
        next.count += std::popcount(add);
      }
      chosen.push_back(idx);
      run(next);
      chosen.pop_back();
    }
  }
};

SpanningResult exact_cover(const LinearSystem& sys, const AdmissiblePair& pair,
                           int n, double eps, long long budget) {
  SpanningResult result;
  result.n = n;
  result.eps = eps;
  result.method = CoverMethod::exact;
  StepBudget bud(budget, n);

  const int n_points = static_cast<int>(pair.k_grid.size());
  std::vector<EnumeratedWord> words =
      enumerate_words(sys, pair, n, eps, bud, 1000000);
  std::vector<size_t> pool = dominance_filter(words);

  BranchAndBound bnb(words, pool, n_points);
  bnb.best = matrix_greedy(words, pool, n_points);
  bnb.chosen.clear();
  CoverageSet covered(n_points);
  bnb.run(covered);

  for (size_t idx : bnb.best) {
    ControlWord cw;
    cw.letters = words[idx].word;
    std::vector<int> pts;
    for (int i = 0; i < n_points; ++i) {
      if (words[idx].coverage.test(i)) pts.push_back(i);
    }
    result.cover.emplace_back(std::move(cw), std::move(pts));
  }
  result.r_inv = static_cast<long long>(result.cover.size());
  result.evaluations = bud.evaluations();
  return result;
}

}  // namespace

SpanningResult r_inv_estimate(const LinearSystem& sys,
                              const AdmissiblePair& pair,
                              const AdmissibilityCertificate& cert, int n,
                              double eps, CoverMethod method,
                              long long budget) {
  if (n < 1) throw ConfigError("spanning horizon must be >= 1");
  if (method == CoverMethod::greedy) {
    if (cert.horizon < n) {
      throw ConfigError("admissibility certificate horizon shorter than n");
    }
    require_certificate(cert);
    return greedy_cover(sys, pair, cert, n, eps, budget);
  }
  return exact_cover(sys, pair, n, eps, budget);
}

bool verify_spanning(const LinearSystem& sys, const AdmissiblePair& pair,
                     const SpanningResult& result) {
  const GroupSpec& g = sys.group();
  std::vector<char> seen(pair.k_grid.size(), 0);
  for (const auto& [word, points] : result.cover) {
    for (int idx : points) {
      GroupPoint p = pair.k_grid[idx];
      for (int j = 0; j < result.n; ++j) {
        p = sys.step_letter(p, word.letters[j]);
        if (!in_eps_neighborhood(g, pair.q_box, result.eps, p)) return false;
      }
      seen[idx] = 1;
    }
  }
  for (char c : seen) {
    if (!c) return false;
  }
  return true;
}

EntropyFit h_inv_estimate(const std::vector<std::pair<int, long long>>& r_by_n,
                          double log_base) {
  if (r_by_n.size() < 4) {
    throw InsufficientData("h_inv fit needs at least 4 horizons, got " +
                           std::to_string(r_by_n.size()));
  }
  EntropyFit fit;
  fit.points = static_cast<int>(r_by_n.size());
  const double lb = std::log(log_base);
  double sx = 0, sy = 0;
  for (const auto& [n, r] : r_by_n) {
    sx += n;
    sy += std::log(static_cast<double>(r)) / lb;
  }
  const double m = static_cast<double>(r_by_n.size());
  const double xbar = sx / m, ybar = sy / m;
  double sxx = 0, sxy = 0;
  for (const auto& [n, r] : r_by_n) {
    const double y = std::log(static_cast<double>(r)) / lb;
    sxx += (n - xbar) * (n - xbar);
    sxy += (n - xbar) * (y - ybar);
  }
  fit.slope = sxy / sxx;
  double ssr = 0;
  for (const auto& [n, r] : r_by_n) {
    const double y = std::log(static_cast<double>(r)) / lb;
    const double pred = ybar + fit.slope * (n - xbar);
    ssr += (y - pred) * (y - pred);
  }
  fit.stderr_slope = std::sqrt(ssr / (m - 2.0) / sxx);
  fit.ci95 = 1.96 * fit.stderr_slope;
  fit.limsup_surrogate = 0.0;
  for (const auto& [n, r] : r_by_n) {
    fit.limsup_surrogate = std::max(
        fit.limsup_surrogate, std::log(static_cast<double>(r)) / lb / n);
  }
  return fit;
}

SweepTable outer_entropy_sweep(const LinearSystem& sys,
                               const AdmissiblePair& pair,
                               const AdmissibilityCertificate& cert,
                               const std::vector<double>& eps_list, int n_min,
                               int n_max, CoverMethod method, long long budget,
                               double log_base) {
  if (eps_list.empty()) throw ConfigError("eps list must be nonempty");
  for (size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) {
      throw ConfigError("eps list must be strictly decreasing");
    }
  }
  if (n_min < 1 || n_max < n_min) throw ConfigError("bad n range");

  SweepTable table;
  for (double eps : eps_list) {
    std::vector<std::pair<int, long long>> r_by_n;
    for (int n = n_min; n <= n_max; ++n) {
      auto t0 = std::chrono::steady_clock::now();
      SpanningResult res = r_inv_estimate(sys, pair, cert, n, eps, method, budget);
      auto t1 = std::chrono::steady_clock::now();
      SweepCell cell;
      cell.eps = eps;
      cell.n = n;
      cell.r_inv = res.r_inv;
      cell.method = method;
      cell.evaluations = res.evaluations;
      cell.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      table.cells.push_back(cell);
      r_by_n.emplace_back(n, res.r_inv);
    }
    table.fits.emplace_back(eps, h_inv_estimate(r_by_n, log_base));
  }
  table.sup_slope = table.fits.front().second.slope;
  for (const auto& [eps, fit] : table.fits) {
    table.sup_slope = std::max(table.sup_slope, fit.slope);
  }
  return table;
}

namespace {

struct OrbitHash {
  double cell_width = 1.0;
  int wrap_cells = 0;  // > 0 on the torus
  std::unordered_map<uint64_t, std::vector<int>> buckets;

  OrbitHash(const GroupSpec& g, double eps) {
    if (g.name() == GroupName::Torus2) {
      wrap_cells = std::max(1, static_cast<int>(std::floor(1.0 / eps)));
      cell_width = 1.0 / wrap_cells;
    } else {
      cell_width = eps;
    }
  }

  int64_t axis_cell(double c) const {
    auto q = static_cast<int64_t>(std::floor(c / cell_width));
    if (wrap_cells > 0) q = ((q % wrap_cells) + wrap_cells) % wrap_cells;
    return q;
  }

  uint64_t key_of_cells(const std::vector<int64_t>& cells) const {
    uint64_t h = 0x2545f4914f6cdd1dULL;
    for (int64_t q : cells) h = splitmix64(h ^ static_cast<uint64_t>(q));
    return h;
  }

  void insert(const Vec& p, int id) {
    std::vector<int64_t> cells(p.size());
    for (int i = 0; i < p.size(); ++i) cells[i] = axis_cell(p(i));
    buckets[key_of_cells(cells)].push_back(id);
  }

  // Visits ids in the 3^d neighborhood of p's cell (a superset of the
  // eps-neighbors; each id lives in exactly one cell, so no duplicates).
  // Stops early when fn returns true.
  template <typename Fn>
  void visit_neighbors(const Vec& p, Fn&& fn) const {
    const int d = static_cast<int>(p.size());
    std::vector<int64_t> base(d), cells(d);
    for (int i = 0; i < d; ++i) base[i] = axis_cell(p(i));
    std::vector<int> off(d, -1);
    while (true) {
      for (int i = 0; i < d; ++i) {
        int64_t q = base[i] + off[i];
        if (wrap_cells > 0) q = ((q % wrap_cells) + wrap_cells) % wrap_cells;
        cells[i] = q;
      }
      auto it = buckets.find(key_of_cells(cells));
      if (it != buckets.end()) {
        for (int id : it->second) {
          if (fn(id)) return;
        }
      }
      int axis = d - 1;
      while (axis >= 0) {
        if (++off[axis] <= 1) break;
        off[axis] = -1;
        --axis;
      }
      if (axis < 0) break;
    }
  }
};

}  // namespace

SeparatedResult separated_set(const LinearSystem& sys,
                              const std::vector<GroupPoint>& grid, int n,
                              double eps) {
  const GroupSpec& g = sys.group();
  SeparatedResult result;
  result.n = n;
  result.eps = eps;

  std::vector<std::vector<GroupPoint>> orbits;  // selected only
  OrbitHash hash(g, eps);

  for (size_t idx = 0; idx < grid.size(); ++idx) {
    std::vector<GroupPoint> orbit;
    orbit.reserve(n + 1);
    orbit.push_back(grid[idx]);
    for (int j = 0; j < n; ++j) orbit.push_back(sys.f0(orbit.back()));

    bool blocked = false;
    hash.visit_neighbors(orbit[n].coords, [&](int id) {
      bool all_close = true;
      for (int j = 0; j <= n; ++j) {
        if (g.distance(orbit[j], orbits[id][j]) > eps) {
          all_close = false;
          break;
        }
      }
      if (all_close) blocked = true;
      return blocked;
    });
    if (!blocked) {
      hash.insert(orbit[n].coords, static_cast<int>(orbits.size()));
      orbits.push_back(std::move(orbit));
      result.selected.push_back(static_cast<int>(idx));
    }
  }
  result.s_n = static_cast<long long>(result.selected.size());
  return result;
}

long long count_spanning_failures(const LinearSystem& sys,
                                  const std::vector<GroupPoint>& grid,
                                  const SeparatedResult& separated) {
  const GroupSpec& g = sys.group();
  const int n = separated.n;
  const double eps = separated.eps;

  std::vector<std::vector<GroupPoint>> orbits;
  OrbitHash hash(g, eps);
  std::vector<char> is_selected(grid.size(), 0);
  for (int idx : separated.selected) {
    is_selected[idx] = 1;
    std::vector<GroupPoint> orbit;
    orbit.push_back(grid[idx]);
    for (int j = 0; j < n; ++j) orbit.push_back(sys.f0(orbit.back()));
    hash.insert(orbit[n].coords, static_cast<int>(orbits.size()));
    orbits.push_back(std::move(orbit));
  }

  long long failures = 0;
  for (size_t idx = 0; idx < grid.size(); ++idx) {
    if (is_selected[idx]) continue;  // spanned by itself
    std::vector<GroupPoint> orbit;
    orbit.push_back(grid[idx]);
    for (int j = 0; j < n; ++j) orbit.push_back(sys.f0(orbit.back()));
    bool spanned = false;
    hash.visit_neighbors(orbit[n].coords, [&](int id) {
      bool all_close = true;
      for (int j = 0; j <= n; ++j) {
        if (g.distance(orbit[j], orbits[id][j]) > eps) {
          all_close = false;
          break;
        }
      }
      if (all_close) spanned = true;
      return spanned;
    });
    if (!spanned) ++failures;
  }
  return failures;
}

TheoremVerdict theorem_check(const TheoremInputs& in) {
  TheoremVerdict v;
  v.estimate = in.estimate_slope;
  v.upper = in.bowen_upper;
  v.lower = in.lower_slope;
  v.upper_margin = in.bowen_upper + in.upper_tol - in.estimate_slope;
  v.upper_ok = v.upper_margin >= 0.0;
  v.lower_gated = in.gate_lower && in.lower_slope.has_value();
  if (in.lower_slope) {
    v.lower_margin = in.estimate_slope - *in.lower_slope + in.lower_tol;
    v.lower_ok = !v.lower_gated || v.lower_margin >= 0.0;
  }
  v.pointwise_ok = true;
  for (const auto& [log_bound, log_r] : in.pointwise_log) {
    if (log_bound > log_r + 1e-9) v.pointwise_ok = false;
  }
  v.pass = v.upper_ok && v.lower_ok && v.pointwise_ok;
  v.detail = std::string("upper ") + (v.upper_ok ? "ok" : "VIOLATED") +
             ", lower " +
             (in.lower_slope ? (v.lower_ok ? "ok" : "VIOLATED") : "n/a") +
             (v.lower_gated ? "" : " (reported, not gated)") + ", pointwise " +
             (v.pointwise_ok ? "ok" : "VIOLATED");
  return v;
}

}  // namespace lgent
