#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pslf {

struct RatingTuple {
  std::string user;
  std::string item;
  double rating = 0.0;
};

// Column layout of a delimited rating file. The delimiter may be longer
// than one character ("::" for ML-1M); columns are 0-based and any extra
// columns (timestamps) are ignored.
struct FormatSpec {
  std::string delimiter = "\t";
  int user_col = 0;
  int item_col = 1;
  int rating_col = 2;
  bool skip_header = false;

  static FormatSpec ml1m() { return {"::", 0, 1, 2, false}; }
  static FormatSpec csv() { return {",", 0, 1, 2, false}; }
  static FormatSpec tsv() { return {"\t", 0, 1, 2, false}; }

  // Accepts "ml1m", "csv", "tsv" or "delim=<s>;cols=<u>,<i>,<r>[;header]".
  static FormatSpec parse(const std::string& name);
};

struct Entry {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  double rating = 0.0;
};

// Sparse rating matrix over dense ids: the known-entry set K in a fixed
// order plus per-user and per-item adjacency (entry indices, CSR-style).
// Immutable after construction; safe to share across readers.
class HdiMatrix {
 public:
  HdiMatrix() = default;

  // Validates index ranges, rejects duplicate (user, item) pairs and
  // builds adjacency. The id vectors (dense index -> raw id) may be empty
  // when the matrix was not built from raw tuples.
  HdiMatrix(std::size_t num_users, std::size_t num_items,
            std::vector<Entry> entries, std::vector<std::string> user_ids = {},
            std::vector<std::string> item_ids = {});

  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t num_entries() const { return entries_.size(); }
  std::span<const Entry> entries() const { return entries_; }
  const Entry& entry(std::size_t k) const { return entries_[k]; }

  // Entry indices of K_u / K_i.
  std::span<const std::uint32_t> user_entries(std::size_t u) const;
  std::span<const std::uint32_t> item_entries(std::size_t i) const;
  std::size_t user_degree(std::size_t u) const;  // |K_u|
  std::size_t item_degree(std::size_t i) const;  // |K_i|

  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }

 private:
  std::size_t num_users_ = 0;
  std::size_t num_items_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::uint32_t> user_offsets_, user_index_;
  std::vector<std::uint32_t> item_offsets_, item_index_;
  std::vector<std::string> user_ids_, item_ids_;
};

struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

struct Partition {
  HdiMatrix train;  // same dimensions as the source matrix
  std::vector<Entry> validation;
  std::vector<Entry> test;
  std::uint64_t seed = 0;
  // Positions into the source entry list, in the order each subset
  // consumes them; these are what the run manifest records.
  std::vector<std::uint32_t> train_indices;
  std::vector<std::uint32_t> validation_indices;
  std::vector<std::uint32_t> test_indices;
};

// One RatingTuple per well-formed line, in file order. Blank lines are
// skipped; anything else malformed raises a DataError naming the line.
std::vector<RatingTuple> parse_ratings(std::istream& in, const FormatSpec& fmt);

// Dense ids assigned in first-appearance order.
HdiMatrix build_hdi(std::span<const RatingTuple> tuples);

HdiMatrix load_dataset(const std::string& path, const FormatSpec& fmt);

// Seeded uniform shuffle of the entry list split by ratio. Cut points are
// floor(cumulative ratio * |K|), so each subset lands within one entry of
// its exact share and the test set absorbs the remainder.
Partition make_partition(const HdiMatrix& matrix, const SplitRatios& ratios,
                         std::uint64_t seed);

// |K| / (|U| * |I|)
double density(const HdiMatrix& matrix);

}  // namespace pslf
