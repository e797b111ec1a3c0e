#include "omap/word.hpp"

#include <algorithm>
#include <cmath>

namespace omap {

bool word_neighborhood_contains(const OpenMapSystem& sys, const SymbolicWord& word, WordSign sign,
                                const PhasePoint& p) {
    if (word.empty()) throw std::invalid_argument("word_neighborhood_contains: empty word");
    const int n = static_cast<int>(word.size());
    for (int q : word)
        if (q < 0 || q >= sys.alphabet_size())
            throw std::invalid_argument("word_neighborhood_contains: invalid letter");
    PhasePoint q = p;
    if (sign == WordSign::minus) {
        if (!sys.cell_contains(word[0], q)) return false;
        for (int i = 1; i < n; ++i) {
            auto next = step(sys, q);
            if (!next) return false;
            q = next->second;
            if (!sys.cell_contains(word[i], q)) return false;
        }
        return true;
    }
    for (int i = 1; i <= n; ++i) {
        auto prev = step_back(sys, q);
        if (!prev) return false;
        q = prev->second;
        if (!sys.cell_contains(word[n - i], q)) return false;
    }
    return true;
}

WordTable::WordTable(const OpenMapSystem& sys, int max_len, int depth,
                     std::vector<PhasePoint> samples)
    : sys_(&sys), max_len_(max_len), depth_(depth), samples_(std::move(samples)) {
    if (depth_ < max_len_)
        throw std::invalid_argument("WordTable: sample depth must cover the word length");
    const int q_count = sys.alphabet_size();
    fwd_trie_.push_back(TrieNode{std::vector<int>(q_count, -1), 0.0, -1});
    bwd_trie_.push_back(TrieNode{std::vector<int>(q_count, -1), 0.0, -1});
    cum_log_ju_.resize(samples_.size());
    cum_log_js_.resize(samples_.size());

    auto cell_of = [&sys, q_count](const PhasePoint& p) {
        for (int c = 0; c < q_count; ++c)
            if (sys.cell_contains(c, p)) return c;
        return -1;
    };

    const int dir_depth = std::min(depth_, 16);
    for (std::size_t s = 0; s < samples_.size(); ++s) {
        const PhasePoint p = samples_[s];
        // forward itinerary and cumulative unstable expansion
        Vec2 vu = unstable_direction(sys, p, dir_depth);
        std::vector<double>& cu = cum_log_ju_[s];
        cu.assign(max_len_ + 1, 0.0);
        {
            PhasePoint q = p;
            int node = 0;
            for (int i = 0; i < max_len_; ++i) {
                int c = cell_of(q);
                if (c < 0) break;
                int& slot = fwd_trie_[node].child[c];
                if (slot < 0) {
                    slot = static_cast<int>(fwd_trie_.size());
                    fwd_trie_.push_back(
                        TrieNode{std::vector<int>(sys.alphabet_size(), -1),
                                 std::numeric_limits<double>::infinity(), -1});
                }
                node = slot;
                Mat2 d = differential_at(sys, q);
                vu = d * vu;
                cu[i + 1] = cu[i] + std::log(vu.norm());
                vu.normalize();
                if (cu[i + 1] < fwd_trie_[node].min_log_j) {
                    fwd_trie_[node].min_log_j = cu[i + 1];
                    fwd_trie_[node].best_sample = static_cast<int>(s);
                }
                auto next = step(sys, q);
                if (!next) break;
                q = next->second;
            }
        }
        // backward itinerary and cumulative stable expansion J^s_{-n}
        Vec2 vs = stable_direction(sys, p, dir_depth);
        std::vector<double>& cs = cum_log_js_[s];
        cs.assign(max_len_ + 1, 0.0);
        {
            PhasePoint q = p;
            int node = 0;
            for (int i = 0; i < max_len_; ++i) {
                auto prev = step_back(sys, q);
                if (!prev) break;
                q = prev->second;
                int c = cell_of(q);
                if (c < 0) break;
                int& slot = bwd_trie_[node].child[c];
                if (slot < 0) {
                    slot = static_cast<int>(bwd_trie_.size());
                    bwd_trie_.push_back(
                        TrieNode{std::vector<int>(sys.alphabet_size(), -1),
                                 std::numeric_limits<double>::infinity(), -1});
                }
                node = slot;
                vs = differential_at(sys, q).inverse() * vs;
                cs[i + 1] = cs[i] + std::log(vs.norm());
                vs.normalize();
                if (cs[i + 1] < bwd_trie_[node].min_log_j) {
                    bwd_trie_[node].min_log_j = cs[i + 1];
                    bwd_trie_[node].best_sample = static_cast<int>(s);
                }
            }
        }
    }
}

WordTable WordTable::build(const OpenMapSystem& sys, int max_len, int nx0, int nxi0, int levels,
                           std::vector<PhasePoint> seeds) {
    const int depth = max_len + 2;
    std::vector<PhasePoint> pts = trapped_sample_refined(sys, depth, nx0, nxi0, levels);
    for (const PhasePoint& p : seeds) pts.push_back(p);
    return WordTable(sys, max_len, depth, std::move(pts));
}

int WordTable::descend(const std::vector<TrieNode>& trie, const SymbolicWord& word, bool reversed,
                       int* reached_depth) const {
    int node = 0;
    const int n = static_cast<int>(word.size());
    int d = 0;
    for (; d < n; ++d) {
        int letter = reversed ? word[n - 1 - d] : word[d];
        int next = trie[node].child[letter];
        if (next < 0) break;
        node = next;
    }
    if (reached_depth) *reached_depth = d;
    return node;
}

PhasePoint WordTable::representative(const SymbolicWord& word) const {
    const int n = static_cast<int>(word.size());
    if (!admissible(word)) throw EmptyNeighborhoodError("empty refined neighborhood");

    // Adaptive cylinder tracking: probe a grid in the current box, keep the
    // points matching the longest prefix of the word, and zoom onto them.
    // The word cylinder contracts exponentially in the unstable direction,
    // so a fixed-resolution probe cannot find deep words directly.
    auto matched_prefix = [&](PhasePoint p) {
        int depth = 0;
        if (!sys_->cell_contains(word[0], p)) return 0;
        depth = 1;
        while (depth < n) {
            auto next = step(*sys_, p);
            if (!next) break;
            p = next->second;
            if (!sys_->cell_contains(word[depth], p)) break;
            ++depth;
        }
        return depth;
    };

    Rect box = sys_->partition[word[0]].rect;
    const int block = sys_->pieces[sys_->partition[word[0]].piece].from_block;
    const int m = 33;
    for (int round = 0; round < 40; ++round) {
        int best = 0;
        std::vector<PhasePoint> deepest;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                PhasePoint p{box.x_min + (i + 0.5) * box.width() / m,
                             box.xi_min + (j + 0.5) * box.height() / m, block};
                const int d = matched_prefix(p);
                if (d == n) return p;
                if (d > best) {
                    best = d;
                    deepest.clear();
                }
                if (d == best && d > 0) deepest.push_back(p);
            }
        }
        if (deepest.empty()) break;
        Rect hull{deepest[0].x, deepest[0].x, deepest[0].xi, deepest[0].xi};
        for (const PhasePoint& p : deepest) {
            hull.x_min = std::min(hull.x_min, p.x);
            hull.x_max = std::max(hull.x_max, p.x);
            hull.xi_min = std::min(hull.xi_min, p.xi);
            hull.xi_max = std::max(hull.xi_max, p.xi);
        }
        const double pad_x = 1.5 * box.width() / m;
        const double pad_xi = 1.5 * box.height() / m;
        Rect next{std::max(box.x_min, hull.x_min - pad_x), std::min(box.x_max, hull.x_max + pad_x),
                  std::max(box.xi_min, hull.xi_min - pad_xi),
                  std::min(box.xi_max, hull.xi_max + pad_xi)};
        if (next.width() >= 0.95 * box.width() && next.height() >= 0.95 * box.height())
            break;  // no further localization possible
        box = next;
    }
    throw EmptyNeighborhoodError("empty refined neighborhood");
}

JacobianPair WordTable::local_word_jacobian(const SymbolicWord& word) const {
    const int n = static_cast<int>(word.size());
    if (n < 1 || n > max_len_)
        throw std::invalid_argument("local_word_jacobian: word length out of range");
    JacobianPair out;
    int fd = 0, bd = 0;
    int fnode = descend(fwd_trie_, word, false, &fd);
    int bnode = descend(bwd_trie_, word, true, &bd);
    if (fd == n && bd == n) {
        out.j_minus = std::exp(fwd_trie_[fnode].min_log_j);
        out.j_plus = std::exp(bwd_trie_[bnode].min_log_j);
        out.witness = samples_[fwd_trie_[fnode].best_sample];
        out.shadowed = false;
        return out;
    }
    // No sample fully inside the refined neighborhood: shadow with the
    // nearest survivor (sup metric) of a representative point of V_q^-.
    PhasePoint rep = representative(word);
    if (samples_.empty())
        throw std::runtime_error("local_word_jacobian: no trapped samples available for shadowing");
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t s = 0; s < samples_.size(); ++s) {
        double d = distance(*sys_, rep, samples_[s]);
        if (d < best) {
            best = d;
            best_idx = s;
        }
    }
    if (!std::isfinite(best))
        throw std::runtime_error("local_word_jacobian: no trapped samples in the word's block");
    out.shadowed = true;
    out.witness = samples_[best_idx];
    out.j_minus = std::exp(cum_log_ju_[best_idx][n]);
    out.j_plus = std::exp(cum_log_js_[best_idx][n]);
    // sup distance between the representative orbit and the witness orbit
    PhasePoint a = rep, b = out.witness;
    double dmax = distance(*sys_, a, b);
    for (int i = 1; i < n; ++i) {
        auto na = step(*sys_, a);
        auto nb = step(*sys_, b);
        if (!na || !nb) break;
        a = na->second;
        b = nb->second;
        dmax = std::max(dmax, distance(*sys_, a, b));
    }
    out.witness_distance = dmax;
    return out;
}

bool WordTable::admissible(const SymbolicWord& word) const {
    for (std::size_t i = 0; i + 1 < word.size(); ++i)
        if (!sys_->transitions[word[i]][word[i + 1]]) return false;
    return true;
}

std::vector<double> WordTable::admissible_counts(int n) const {
    const int q_count = sys_->alphabet_size();
    std::vector<double> counts;
    std::vector<double> row(q_count, 1.0);
    counts.push_back(q_count);
    for (int len = 2; len <= n; ++len) {
        std::vector<double> next(q_count, 0.0);
        for (int a = 0; a < q_count; ++a)
            for (int b = 0; b < q_count; ++b)
                if (sys_->transitions[b][a]) next[a] += row[b];
        row.swap(next);
        double total = 0.0;
        for (double v : row) total += v;
        counts.push_back(total);
    }
    return counts;
}

std::vector<SymbolicWord> WordTable::admissible_words(int n, std::size_t budget) const {
    std::vector<double> counts = admissible_counts(n);
    if (counts[n - 1] > static_cast<double>(budget)) {
        int feasible = 0;
        for (int k = 1; k <= n; ++k)
            if (counts[k - 1] <= static_cast<double>(budget)) feasible = k;
        throw BudgetExceededError("word enumeration budget exceeded; largest feasible length is " +
                                      std::to_string(feasible),
                                  feasible);
    }
    std::vector<SymbolicWord> words;
    SymbolicWord cur(n);
    const int q_count = sys_->alphabet_size();
    std::function<void(int)> dfs = [&](int depth) {
        if (depth == n) {
            words.push_back(cur);
            return;
        }
        for (int q = 0; q < q_count; ++q) {
            if (depth > 0 && !sys_->transitions[cur[depth - 1]][q]) continue;
            cur[depth] = q;
            dfs(depth + 1);
        }
    };
    dfs(0);
    return words;
}

}  // namespace omap
