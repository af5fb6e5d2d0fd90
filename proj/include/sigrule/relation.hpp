#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sigrule/bitvector.hpp"
#include "sigrule/errors.hpp"

namespace sigrule {

/// Position of an attribute in a Relation (or a JointDistribution). Names live
/// with the owning container.
struct AttributeId {
  std::uint32_t index = 0;

  friend auto operator<=>(const AttributeId&, const AttributeId&) = default;
};

/// A single assignment A=a.
struct Literal {
  AttributeId attr;
  bool value = true;

  Literal negated() const noexcept { return {attr, !value}; }

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

inline Literal positive(std::uint32_t index) { return {AttributeId{index}, true}; }
inline Literal negative(std::uint32_t index) { return {AttributeId{index}, false}; }

/// Conjunction of literals, at most one per attribute, kept sorted by attribute.
/// The empty event is the always-true assignment.
class Event {
 public:
  Event() = default;
  Event(std::initializer_list<Literal> literals) : Event(std::vector<Literal>(literals)) {}
  explicit Event(std::vector<Literal> literals) : literals_(std::move(literals)) {
    std::sort(literals_.begin(), literals_.end());
    literals_.erase(std::unique(literals_.begin(), literals_.end()), literals_.end());
    for (std::size_t i = 1; i < literals_.size(); ++i) {
      if (literals_[i].attr == literals_[i - 1].attr) {
        throw usage_error("event assigns both values to attribute " +
                          std::to_string(literals_[i].attr.index));
      }
    }
  }

  std::span<const Literal> literals() const noexcept { return literals_; }
  std::size_t size() const noexcept { return literals_.size(); }
  bool empty() const noexcept { return literals_.empty(); }
  auto begin() const noexcept { return literals_.begin(); }
  auto end() const noexcept { return literals_.end(); }
  const Literal& operator[](std::size_t i) const noexcept { return literals_[i]; }

  std::optional<bool> value_of(AttributeId a) const noexcept {
    for (const Literal& l : literals_) {
      if (l.attr == a) return l.value;
    }
    return std::nullopt;
  }
  bool mentions(AttributeId a) const noexcept { return value_of(a).has_value(); }

  Event with(Literal l) const {
    std::vector<Literal> out = literals_;
    out.push_back(l);
    return Event(std::move(out));
  }

  Event without(AttributeId a) const {
    Event out;
    for (const Literal& l : literals_) {
      if (l.attr != a) out.literals_.push_back(l);
    }
    return out;
  }

  Event united(const Event& other) const {
    std::vector<Literal> out = literals_;
    out.insert(out.end(), other.literals_.begin(), other.literals_.end());
    return Event(std::move(out));
  }

  bool is_subset_of(const Event& other) const {
    return std::includes(other.literals_.begin(), other.literals_.end(), literals_.begin(),
                         literals_.end());
  }

  bool shares_attribute_with(const Event& other) const noexcept {
    for (const Literal& l : literals_) {
      if (other.mentions(l.attr)) return true;
    }
    return false;
  }

  /// Sub-event selected by the set bits of `mask` (bit i keeps literal i).
  Event subset(std::uint64_t mask) const {
    Event out;
    for (std::size_t i = 0; i < literals_.size(); ++i) {
      if ((mask >> i) & 1U) out.literals_.push_back(literals_[i]);
    }
    return out;
  }

  friend auto operator<=>(const Event&, const Event&) = default;

 private:
  std::vector<Literal> literals_;
};

/// Immutable n x k binary relation stored column-wise. Both polarities of each
/// column are kept so any literal conjunction is a word-wise AND.
class Relation {
 public:
  Relation(std::vector<std::string> names, std::vector<BitVector> columns)
      : names_(std::move(names)), positive_(std::move(columns)) {
    if (names_.empty()) throw load_error("relation has no attributes");
    if (names_.size() != positive_.size()) throw usage_error("name/column count mismatch");
    n_ = positive_.front().size();
    if (n_ == 0) throw load_error("relation has no rows");
    std::set<std::string_view> seen;
    for (std::size_t a = 0; a < names_.size(); ++a) {
      if (positive_[a].size() != n_) throw usage_error("column length mismatch");
      if (!seen.insert(names_[a]).second) throw load_error("duplicate attribute name '" + names_[a] + "'");
      index_.emplace(names_[a], static_cast<std::uint32_t>(a));
    }
    negative_.reserve(positive_.size());
    for (const BitVector& c : positive_) negative_.push_back(~c);
  }

  /// Rows given as 0/1 values in attribute order.
  static Relation from_rows(std::vector<std::string> names,
                            const std::vector<std::vector<std::uint8_t>>& rows) {
    std::vector<BitVector> cols(names.size(), BitVector(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (rows[t].size() != names.size()) throw usage_error("row width mismatch");
      for (std::size_t a = 0; a < names.size(); ++a) {
        if (rows[t][a] != 0) cols[a].set(t);
      }
    }
    return Relation(std::move(names), std::move(cols));
  }

  std::size_t rows() const noexcept { return n_; }
  std::size_t attributes() const noexcept { return names_.size(); }
  std::span<const std::string> names() const noexcept { return names_; }

  const std::string& name(AttributeId a) const {
    check(a);
    return names_[a.index];
  }

  std::optional<AttributeId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return AttributeId{it->second};
  }

  AttributeId attribute(std::string_view name) const {
    if (auto a = find(name)) return *a;
    throw usage_error("unknown attribute '" + std::string(name) + "'");
  }

  const BitVector& column(Literal l) const {
    check(l.attr);
    return l.value ? positive_[l.attr.index] : negative_[l.attr.index];
  }

  bool value(std::size_t row, AttributeId a) const {
    check(a);
    return positive_[a.index].test(row);
  }

  /// Rows satisfying every literal of `e`.
  BitVector cover(const Event& e) const {
    BitVector out(n_, true);
    for (const Literal& l : e) out &= column(l);
    return out;
  }

  std::int64_t support(const Event& e) const {
    for (const Literal& l : e) check(l.attr);
    if (e.empty()) return static_cast<std::int64_t>(n_);
    if (e.size() == 1) return static_cast<std::int64_t>(column(e[0]).count());
    const std::size_t words = positive_.front().words().size();
    std::int64_t total = 0;
    for (std::size_t w = 0; w < words; ++w) {
      BitVector::word_type acc = ~BitVector::word_type{0};
      for (const Literal& l : e) acc &= column(l).words()[w];
      total += std::popcount(acc);
    }
    return total;
  }

  double probability(const Event& e) const {
    return static_cast<double>(support(e)) / static_cast<double>(n_);
  }

  std::string describe(const Event& e) const {
    std::string out;
    for (const Literal& l : e) {
      if (!out.empty()) out += ',';
      if (!l.value) out += '!';
      out += name(l.attr);
    }
    return out;
  }

 private:
  void check(AttributeId a) const {
    if (a.index >= names_.size()) {
      throw usage_error("attribute index " + std::to_string(a.index) + " out of range");
    }
  }

  std::vector<std::string> names_;
  std::vector<BitVector> positive_;
  std::vector<BitVector> negative_;
  std::map<std::string, std::uint32_t> index_;
  std::size_t n_ = 0;
};

inline std::int64_t support(const Relation& rel, const Event& e) { return rel.support(e); }
inline double probability(const Relation& rel, const Event& e) { return rel.probability(e); }

/// One transaction per line, whitespace-separated item tokens. Attributes are
/// the sorted union of tokens; absent items read as 0.
inline Relation load_transactions(std::istream& in) {
  std::vector<std::set<std::string>> lines;
  std::set<std::string> vocabulary;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream tokens(line);
    std::set<std::string> items;
    for (std::string tok; tokens >> tok;) items.insert(tok);
    if (items.empty()) continue;
    vocabulary.insert(items.begin(), items.end());
    lines.push_back(std::move(items));
  }
  if (lines.empty()) throw load_error("transaction input contains no items");

  std::vector<std::string> names(vocabulary.begin(), vocabulary.end());
  std::map<std::string_view, std::size_t> pos;
  for (std::size_t a = 0; a < names.size(); ++a) pos.emplace(names[a], a);
  std::vector<BitVector> cols(names.size(), BitVector(lines.size()));
  for (std::size_t t = 0; t < lines.size(); ++t) {
    for (const std::string& item : lines[t]) cols[pos.at(item)].set(t);
  }
  return Relation(std::move(names), std::move(cols));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto end = s.find(sep, start);
    out.push_back(trim(s.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace detail

/// Header row of attribute names, then rows of "0"/"1" cells.
inline Relation load_csv_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    for (std::string_view cell : detail::split(line, ',')) names.emplace_back(cell);
    break;
  }
  if (names.empty()) throw load_error("csv input is empty");
  {
    std::map<std::string_view, std::size_t> seen;
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (names[c].empty()) throw load_error("empty attribute name", line_no, c + 1);
      if (auto [it, fresh] = seen.emplace(names[c], c); !fresh) {
        throw load_error("duplicate attribute name '" + names[c] + "'", line_no, c + 1);
      }
    }
  }

  std::vector<std::vector<std::uint8_t>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != names.size()) {
      throw load_error("expected " + std::to_string(names.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    std::vector<std::uint8_t> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c] == "1") {
        row[c] = 1;
      } else if (cells[c] != "0") {
        throw load_error("non-binary cell '" + std::string(cells[c]) + "'", line_no, c + 1);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw load_error("csv input has a header but no rows");
  return Relation::from_rows(std::move(names), rows);
}

enum class DatasetFormat { automatic, csv, transactions };

inline Relation load_dataset(const std::filesystem::path& path,
                             DatasetFormat format = DatasetFormat::automatic) {
  std::ifstream in(path);
  if (!in) throw load_error("cannot open '" + path.string() + "'");
  if (format == DatasetFormat::automatic) {
    format = path.extension() == ".csv" ? DatasetFormat::csv : DatasetFormat::transactions;
  }
  return format == DatasetFormat::csv ? load_csv_matrix(in) : load_transactions(in);
}

}  // namespace sigrule
