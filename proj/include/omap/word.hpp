#pragma once
// Symbolic words over the partition alphabet: refined neighborhoods V_q^-,
// V_q^+ and the local word Jacobians J_q^-, J_q^+.

#include "omap/open_map.hpp"

namespace omap {

using SymbolicWord = std::vector<int>;

enum class WordSign { minus, plus };

struct EmptyNeighborhoodError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetExceededError : std::runtime_error {
    BudgetExceededError(const std::string& msg, int feasible)
        : std::runtime_error(msg), largest_feasible_n(feasible) {}
    int largest_feasible_n;
};

/// Local word Jacobians with the trapped witness realizing them. When the
/// refined neighborhood contains no trapped sample, the value comes from a
/// shadowing orbit and `witness_distance` records the sup distance between
/// the witness orbit and a representative orbit of the word.
struct JacobianPair {
    double j_minus = 0.0;
    double j_plus = 0.0;
    PhasePoint witness;
    double witness_distance = 0.0;
    bool shadowed = false;
};

/// True iff the orbit of p visits the word's cells at the prescribed times:
/// sign minus: F^i(p) in V_{q_i} for i = 0..n-1;
/// sign plus:  F^{-i}(p) in V_{q_{n-i}} for i = 1..n.
bool word_neighborhood_contains(const OpenMapSystem& sys, const SymbolicWord& word, WordSign sign,
                                const PhasePoint& p);

/// Trapped-sample table with per-sample itineraries and cumulative expansion
/// factors, organized in prefix tries so word Jacobians are O(word length).
class WordTable {
  public:
    /// `samples` must survive `depth` steps both ways; depth >= max_len + 2.
    WordTable(const OpenMapSystem& sys, int max_len, int depth, std::vector<PhasePoint> samples);

    /// Samples from the refined survivor grid at depth max_len + 2, plus any
    /// caller-provided exactly-trapped seeds (e.g. periodic points).
    static WordTable build(const OpenMapSystem& sys, int max_len, int nx0 = 96, int nxi0 = 96,
                           int levels = 4, std::vector<PhasePoint> seeds = {});

    const OpenMapSystem& system() const { return *sys_; }
    int max_len() const { return max_len_; }
    int depth() const { return depth_; }
    std::size_t sample_count() const { return samples_.size(); }
    const std::vector<PhasePoint>& samples() const { return samples_; }

    /// J_q^- and J_q^+ per the refined-neighborhood definition, falling back
    /// to the nearest-survivor shadowing orbit when the neighborhood holds no
    /// sample. Throws EmptyNeighborhoodError when V_q^- is empty at the
    /// probing resolution.
    JacobianPair local_word_jacobian(const SymbolicWord& word) const;

    /// Letter-transition admissibility of the word.
    bool admissible(const SymbolicWord& word) const;

    /// All admissible words of length n; throws BudgetExceededError (naming
    /// the largest feasible n) if their number exceeds the budget.
    std::vector<SymbolicWord> admissible_words(int n, std::size_t budget = 2'000'000) const;

    /// Number of admissible words per length 1..n (transition-matrix paths).
    std::vector<double> admissible_counts(int n) const;

  private:
    struct TrieNode {
        std::vector<int> child;    // per letter, -1 if absent
        double min_log_j = std::numeric_limits<double>::infinity();
        int best_sample = -1;
    };

    int descend(const std::vector<TrieNode>& trie, const SymbolicWord& word, bool reversed,
                int* reached_depth) const;
    PhasePoint representative(const SymbolicWord& word) const;

    const OpenMapSystem* sys_;
    int max_len_;
    int depth_;
    std::vector<PhasePoint> samples_;
    std::vector<std::vector<double>> cum_log_ju_;  // per sample, length max_len+1
    std::vector<std::vector<double>> cum_log_js_;  // log J^s_{-n} along backward orbit
    std::vector<TrieNode> fwd_trie_;               // keyed by forward itinerary
    std::vector<TrieNode> bwd_trie_;               // keyed by backward itinerary
};

}  // namespace omap
