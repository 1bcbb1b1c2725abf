#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fzirt {

// An IRTree decision structure. Row m of the mapping matrix lists the node
// outcomes (0, 1, or NA for "not visited") on the path leading to category
// m + 1. Categories are coded 1..M everywhere outside this class; labels are
// for display only.
struct TreeLabels {
  std::vector<std::string> categories;
  std::vector<std::string> nodes;
};

// Unvalidated input to validate_tree(); nullopt encodes NA.
struct RawTree {
  int categories = 0;
  int nodes = 0;
  std::vector<std::optional<int>> entries;  // row-major, categories x nodes
  TreeLabels labels;
};

class TreeSpec {
 public:
  static constexpr std::int8_t kNA = -1;

  int categories() const noexcept { return categories_; }
  int nodes() const noexcept { return nodes_; }

  // -1 (kNA), 0 or 1; m and n are 0-based.
  std::int8_t entry(int m, int n) const { return map_[m * nodes_ + n]; }
  bool visits(int m, int n) const { return entry(m, n) != kNA; }
  int path_length(int m) const;

  const TreeLabels& labels() const noexcept { return labels_; }
  std::string category_label(int category) const;  // category in 1..M
  std::string node_label(int n) const;

  RawTree raw() const;

  friend bool operator==(const TreeSpec& a, const TreeSpec& b) {
    return a.categories_ == b.categories_ && a.nodes_ == b.nodes_ && a.map_ == b.map_;
  }

 private:
  friend TreeSpec validate_tree(RawTree raw);
  TreeSpec() = default;

  int categories_ = 0;
  int nodes_ = 0;
  std::vector<std::int8_t> map_;
  TreeLabels labels_;
};

// Throws Error with bad_entry, empty_row, duplicate_path or incomplete_tree.
// A valid tree assigns every one of the 2^N node-outcome vectors to exactly
// one category, which is what makes the category probabilities sum to one.
TreeSpec validate_tree(RawTree raw);

enum class TreeKind { linear3, nested5, six_schema1, six_schema2 };

TreeSpec builtin_tree(TreeKind kind);

// Sequential chain for M categories (M - 1 nodes): category m continues past
// the first m - 1 nodes and stops at node m. linear_tree(3) is the linear3
// tree without its display labels.
TreeSpec linear_tree(int categories);

// Parses "linear3", "nested5", "six_schema1", "six_schema2" or "linearK".
std::optional<TreeSpec> builtin_tree_by_name(const std::string& name);

// Node success probability logistic(eta + alpha), evaluated stably.
double node_probability(double eta, double alpha);

// P(Y = m) for m = 1..M as the product of Bernoulli branch probabilities over
// the nodes visited by each path.
std::vector<double> category_probabilities(const TreeSpec& spec,
                                           std::span<const double> eta,
                                           std::span<const double> alpha);
std::vector<double> category_probabilities_from_nodes(const TreeSpec& spec,
                                                      std::span<const double> pi);

// Rating matrix, persons x items, categories 1..M with 0 for missing.
struct RatingMatrix {
  static constexpr int kMissing = 0;

  int persons = 0;
  int items = 0;
  std::vector<int> values;  // row-major

  RatingMatrix() = default;
  RatingMatrix(int persons_, int items_)
      : persons(persons_), items(items_), values(static_cast<size_t>(persons_) * items_, kMissing) {}

  int& at(int i, int j) { return values[static_cast<size_t>(i) * items + j]; }
  int at(int i, int j) const { return values[static_cast<size_t>(i) * items + j]; }

  friend bool operator==(const RatingMatrix&, const RatingMatrix&) = default;
};

struct BinaryRow {
  int person;
  int item;
  int node;
  std::uint8_t z;
};

// Node-level pseudo-responses, ordered by person, then item, then node.
struct BinaryExpansion {
  int persons = 0;
  int items = 0;
  int nodes = 0;
  std::vector<BinaryRow> rows;
};

// Throws out_of_range_category for values outside 0..M.
BinaryExpansion expand(const RatingMatrix& ratings, const TreeSpec& spec);

// Inverse of expand(): matches each (person, item) z-pattern to its category.
RatingMatrix reconstruct(const BinaryExpansion& expansion, const TreeSpec& spec);

}  // namespace fzirt
