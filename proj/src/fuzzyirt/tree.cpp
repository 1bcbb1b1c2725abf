#include "fuzzyirt/tree.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "fuzzyirt/error.hpp"

namespace fzirt {

namespace {

constexpr std::optional<int> NA = std::nullopt;

TreeSpec make_builtin(int m, int n, std::vector<std::optional<int>> entries,
                      std::vector<std::string> category_labels = {}) {
  RawTree raw;
  raw.categories = m;
  raw.nodes = n;
  raw.entries = std::move(entries);
  raw.labels.categories = std::move(category_labels);
  return validate_tree(std::move(raw));
}

// Two paths describe disjoint events iff they disagree on a node both visit.
bool paths_disjoint(const RawTree& raw, int a, int b) {
  for (int n = 0; n < raw.nodes; ++n) {
    const auto& ea = raw.entries[a * raw.nodes + n];
    const auto& eb = raw.entries[b * raw.nodes + n];
    if (ea && eb && *ea != *eb) return true;
  }
  return false;
}

}  // namespace

int TreeSpec::path_length(int m) const {
  int len = 0;
  for (int n = 0; n < nodes_; ++n) len += visits(m, n) ? 1 : 0;
  return len;
}

std::string TreeSpec::category_label(int category) const {
  if (!labels_.categories.empty()) return labels_.categories.at(category - 1);
  return std::to_string(category);
}

std::string TreeSpec::node_label(int n) const {
  if (!labels_.nodes.empty()) return labels_.nodes.at(n);
  return "node" + std::to_string(n + 1);
}

RawTree TreeSpec::raw() const {
  RawTree r;
  r.categories = categories_;
  r.nodes = nodes_;
  r.entries.reserve(map_.size());
  for (auto e : map_) r.entries.push_back(e == kNA ? NA : std::optional<int>(e));
  r.labels = labels_;
  return r;
}

TreeSpec validate_tree(RawTree raw) {
  const int m_count = raw.categories;
  const int n_count = raw.nodes;
  if (m_count < 2) throw Error(ErrorCode::invalid_argument, "tree needs at least 2 categories");
  if (n_count < 1) throw Error(ErrorCode::invalid_argument, "tree needs at least 1 node");
  if (n_count > 62) throw Error(ErrorCode::invalid_argument, "tree has more than 62 nodes");
  if (raw.entries.size() != static_cast<size_t>(m_count) * n_count)
    throw Error(ErrorCode::invalid_argument, "mapping matrix size does not match M x N");
  if (!raw.labels.categories.empty() && raw.labels.categories.size() != static_cast<size_t>(m_count))
    throw Error(ErrorCode::invalid_argument, "category label count does not match M");
  if (!raw.labels.nodes.empty() && raw.labels.nodes.size() != static_cast<size_t>(n_count))
    throw Error(ErrorCode::invalid_argument, "node label count does not match N");

  for (size_t k = 0; k < raw.entries.size(); ++k) {
    const auto& e = raw.entries[k];
    if (e && *e != 0 && *e != 1) {
      throw Error(ErrorCode::bad_entry,
                  "mapping entry (" + std::to_string(k / n_count + 1) + "," +
                      std::to_string(k % n_count + 1) + ") is " + std::to_string(*e) +
                      ", expected 0, 1 or NA");
    }
  }

  std::vector<int> lengths(m_count, 0);
  for (int m = 0; m < m_count; ++m) {
    for (int n = 0; n < n_count; ++n) lengths[m] += raw.entries[m * n_count + n] ? 1 : 0;
    if (lengths[m] == 0)
      throw Error(ErrorCode::empty_row, "category " + std::to_string(m + 1) + " maps to no node");
  }

  for (int a = 0; a < m_count; ++a) {
    for (int b = a + 1; b < m_count; ++b) {
      if (!paths_disjoint(raw, a, b)) {
        throw Error(ErrorCode::duplicate_path, "categories " + std::to_string(a + 1) + " and " +
                                                   std::to_string(b + 1) +
                                                   " share a node-outcome pattern");
      }
    }
  }

  // With pairwise disjoint paths, closure holds iff the paths cover all 2^N
  // outcome vectors: sum over m of 2^(N - len_m) == 2^N.
  std::uint64_t covered = 0;
  for (int m = 0; m < m_count; ++m) covered += std::uint64_t{1} << (n_count - lengths[m]);
  if (covered != (std::uint64_t{1} << n_count)) {
    throw Error(ErrorCode::incomplete_tree,
                "paths do not cover every node-outcome combination; category probabilities "
                "would not sum to one");
  }

  TreeSpec spec;
  spec.categories_ = m_count;
  spec.nodes_ = n_count;
  spec.map_.resize(raw.entries.size());
  for (size_t k = 0; k < raw.entries.size(); ++k)
    spec.map_[k] = raw.entries[k] ? static_cast<std::int8_t>(*raw.entries[k]) : TreeSpec::kNA;
  spec.labels_ = std::move(raw.labels);
  return spec;
}

TreeSpec builtin_tree(TreeKind kind) {
  switch (kind) {
    case TreeKind::linear3:
      return make_builtin(3, 2,
                          {0, NA,  //
                           1, 0,   //
                           1, 1},
                          {"0", "1", "2"});
    case TreeKind::nested5:
      return make_builtin(5, 4,
                          {1, 0, 0, NA,     //
                           1, 0, 1, NA,     //
                           0, NA, NA, NA,   //
                           1, 1, NA, 0,     //
                           1, 1, NA, 1});
    case TreeKind::six_schema1:
      return make_builtin(6, 5,
                          {1, NA, 0, 0, NA,    //
                           1, NA, 0, 1, NA,    //
                           0, 0, NA, NA, NA,   //
                           0, 1, NA, NA, NA,   //
                           1, NA, 1, NA, 0,    //
                           1, NA, 1, NA, 1});
    case TreeKind::six_schema2:
      return make_builtin(6, 5,
                          {0, 0, NA, 0, NA,    //
                           0, 0, NA, 1, NA,    //
                           0, 1, NA, NA, NA,   //
                           1, NA, 0, NA, NA,   //
                           1, NA, 1, NA, 0,    //
                           1, NA, 1, NA, 1});
  }
  throw Error(ErrorCode::invalid_argument, "unknown builtin tree");
}

TreeSpec linear_tree(int categories) {
  if (categories < 2) throw Error(ErrorCode::invalid_argument, "linear tree needs M >= 2");
  const int n_count = categories - 1;
  RawTree raw;
  raw.categories = categories;
  raw.nodes = n_count;
  raw.entries.assign(static_cast<size_t>(categories) * n_count, NA);
  for (int m = 0; m < categories; ++m) {
    for (int n = 0; n < n_count; ++n) {
      if (n < m) raw.entries[m * n_count + n] = 1;
      else if (n == m) raw.entries[m * n_count + n] = 0;
    }
  }
  return validate_tree(std::move(raw));
}

std::optional<TreeSpec> builtin_tree_by_name(const std::string& name) {
  if (name == "linear3") return builtin_tree(TreeKind::linear3);
  if (name == "nested5") return builtin_tree(TreeKind::nested5);
  if (name == "six_schema1") return builtin_tree(TreeKind::six_schema1);
  if (name == "six_schema2") return builtin_tree(TreeKind::six_schema2);
  if (name.rfind("linear", 0) == 0 && name.size() > 6) {
    const std::string digits = name.substr(6);
    if (digits.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    const int m = std::stoi(digits);
    if (m < 2 || m > 63) return std::nullopt;
    return linear_tree(m);
  }
  return std::nullopt;
}

double node_probability(double eta, double alpha) {
  const double x = eta + alpha;
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> category_probabilities_from_nodes(const TreeSpec& spec,
                                                      std::span<const double> pi) {
  if (pi.size() != static_cast<size_t>(spec.nodes()))
    throw Error(ErrorCode::invalid_argument, "node probability vector has wrong length");
  std::vector<double> p(spec.categories(), 1.0);
  for (int m = 0; m < spec.categories(); ++m) {
    for (int n = 0; n < spec.nodes(); ++n) {
      const auto t = spec.entry(m, n);
      if (t == TreeSpec::kNA) continue;
      p[m] *= t == 1 ? pi[n] : 1.0 - pi[n];
    }
  }
  return p;
}

std::vector<double> category_probabilities(const TreeSpec& spec, std::span<const double> eta,
                                           std::span<const double> alpha) {
  if (eta.size() != static_cast<size_t>(spec.nodes()) ||
      alpha.size() != static_cast<size_t>(spec.nodes()))
    throw Error(ErrorCode::invalid_argument, "eta and alpha must have one entry per node");
  std::vector<double> pi(spec.nodes());
  for (int n = 0; n < spec.nodes(); ++n) {
    if (!std::isfinite(eta[n]) || !std::isfinite(alpha[n]))
      throw Error(ErrorCode::invalid_argument, "non-finite node parameter");
    pi[n] = node_probability(eta[n], alpha[n]);
  }
  return category_probabilities_from_nodes(spec, pi);
}

BinaryExpansion expand(const RatingMatrix& ratings, const TreeSpec& spec) {
  if (ratings.values.size() != static_cast<size_t>(ratings.persons) * ratings.items)
    throw Error(ErrorCode::invalid_argument, "rating matrix storage does not match its shape");
  BinaryExpansion out;
  out.persons = ratings.persons;
  out.items = ratings.items;
  out.nodes = spec.nodes();
  for (int i = 0; i < ratings.persons; ++i) {
    for (int j = 0; j < ratings.items; ++j) {
      const int y = ratings.at(i, j);
      if (y == RatingMatrix::kMissing) continue;
      if (y < 1 || y > spec.categories()) {
        throw Error(ErrorCode::out_of_range_category,
                    "rating " + std::to_string(y) + " at person " + std::to_string(i + 1) +
                        ", item " + std::to_string(j + 1) + " is outside 1.." +
                        std::to_string(spec.categories()));
      }
      for (int n = 0; n < spec.nodes(); ++n) {
        const auto t = spec.entry(y - 1, n);
        if (t == TreeSpec::kNA) continue;
        out.rows.push_back({i, j, n, static_cast<std::uint8_t>(t)});
      }
    }
  }
  return out;
}

RatingMatrix reconstruct(const BinaryExpansion& expansion, const TreeSpec& spec) {
  RatingMatrix out(expansion.persons, expansion.items);
  std::vector<std::int8_t> pattern(spec.nodes());
  size_t r = 0;
  while (r < expansion.rows.size()) {
    const int i = expansion.rows[r].person;
    const int j = expansion.rows[r].item;
    std::fill(pattern.begin(), pattern.end(), TreeSpec::kNA);
    for (; r < expansion.rows.size() && expansion.rows[r].person == i && expansion.rows[r].item == j;
         ++r) {
      pattern[expansion.rows[r].node] = static_cast<std::int8_t>(expansion.rows[r].z);
    }
    int found = 0;
    for (int m = 0; m < spec.categories() && found == 0; ++m) {
      bool match = true;
      for (int n = 0; n < spec.nodes() && match; ++n) match = spec.entry(m, n) == pattern[n];
      if (match) found = m + 1;
    }
    if (found == 0)
      throw Error(ErrorCode::invalid_argument, "binary pattern matches no category of the tree");
    out.at(i, j) = found;
  }
  return out;
}

}  // namespace fzirt
