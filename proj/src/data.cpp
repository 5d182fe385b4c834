#include "data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "error.hpp"
#include "rng.hpp"

namespace pslf {

namespace {

std::vector<std::string> split(const std::string& line, const std::string& delim) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(delim, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + delim.size();
  }
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc{} && result.ptr == end;
}

}  // namespace

FormatSpec FormatSpec::parse(const std::string& name) {
  if (name == "ml1m") return ml1m();
  if (name == "csv") return csv();
  if (name == "tsv") return tsv();
  if (name.rfind("delim=", 0) == 0) {
    FormatSpec spec;
    bool have_cols = false;
    for (const auto& part : split(name, ";")) {
      if (part.rfind("delim=", 0) == 0) {
        spec.delimiter = part.substr(6);
        if (spec.delimiter == "\\t") spec.delimiter = "\t";
      } else if (part.rfind("cols=", 0) == 0) {
        const auto cols = split(part.substr(5), ",");
        if (cols.size() != 3) throw ConfigError("format: cols= needs u,i,r");
        spec.user_col = std::stoi(cols[0]);
        spec.item_col = std::stoi(cols[1]);
        spec.rating_col = std::stoi(cols[2]);
        have_cols = true;
      } else if (part == "header") {
        spec.skip_header = true;
      } else {
        throw ConfigError("format: unknown clause '" + part + "'");
      }
    }
    if (spec.delimiter.empty()) throw ConfigError("format: empty delimiter");
    (void)have_cols;
    return spec;
  }
  throw ConfigError("unknown dataset format '" + name + "'");
}

std::vector<RatingTuple> parse_ratings(std::istream& in, const FormatSpec& fmt) {
  if (fmt.delimiter.empty()) throw ConfigError("format: empty delimiter");
  const int max_col =
      std::max({fmt.user_col, fmt.item_col, fmt.rating_col});
  if (std::min({fmt.user_col, fmt.item_col, fmt.rating_col}) < 0) {
    throw ConfigError("format: negative column index");
  }

  std::vector<RatingTuple> tuples;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = fmt.skip_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split(line, fmt.delimiter);
    if (static_cast<int>(fields.size()) <= max_col) {
      throw DataError("parse error at line " + std::to_string(line_no) +
                      ": expected at least " + std::to_string(max_col + 1) +
                      " columns, got " + std::to_string(fields.size()));
    }
    RatingTuple tuple;
    tuple.user = fields[fmt.user_col];
    tuple.item = fields[fmt.item_col];
    if (tuple.user.empty() || tuple.item.empty()) {
      throw DataError("parse error at line " + std::to_string(line_no) +
                      ": empty id");
    }
    if (!parse_double(fields[fmt.rating_col], tuple.rating) ||
        !std::isfinite(tuple.rating)) {
      throw DataError("parse error at line " + std::to_string(line_no) +
                      ": non-numeric rating '" + fields[fmt.rating_col] + "'");
    }
    tuples.push_back(std::move(tuple));
  }
  return tuples;
}

HdiMatrix::HdiMatrix(std::size_t num_users, std::size_t num_items,
                     std::vector<Entry> entries,
                     std::vector<std::string> user_ids,
                     std::vector<std::string> item_ids)
    : num_users_(num_users),
      num_items_(num_items),
      entries_(std::move(entries)),
      user_ids_(std::move(user_ids)),
      item_ids_(std::move(item_ids)) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(entries_.size());
  for (const Entry& e : entries_) {
    if (e.user >= num_users_ || e.item >= num_items_) {
      throw DataError("entry (" + std::to_string(e.user) + "," +
                      std::to_string(e.item) + ") out of range");
    }
    const std::uint64_t key =
        (static_cast<std::uint64_t>(e.user) << 32) | e.item;
    if (!seen.insert(key).second) {
      const std::string u = e.user < user_ids_.size() ? user_ids_[e.user]
                                                      : std::to_string(e.user);
      const std::string i = e.item < item_ids_.size() ? item_ids_[e.item]
                                                      : std::to_string(e.item);
      throw DataError("duplicate rating for pair (" + u + "," + i + ")");
    }
  }

  // CSR adjacency: count, prefix-sum, fill.
  user_offsets_.assign(num_users_ + 1, 0);
  item_offsets_.assign(num_items_ + 1, 0);
  for (const Entry& e : entries_) {
    ++user_offsets_[e.user + 1];
    ++item_offsets_[e.item + 1];
  }
  std::partial_sum(user_offsets_.begin(), user_offsets_.end(), user_offsets_.begin());
  std::partial_sum(item_offsets_.begin(), item_offsets_.end(), item_offsets_.begin());
  user_index_.resize(entries_.size());
  item_index_.resize(entries_.size());
  std::vector<std::uint32_t> ucur(user_offsets_.begin(), user_offsets_.end() - 1);
  std::vector<std::uint32_t> icur(item_offsets_.begin(), item_offsets_.end() - 1);
  for (std::uint32_t k = 0; k < entries_.size(); ++k) {
    user_index_[ucur[entries_[k].user]++] = k;
    item_index_[icur[entries_[k].item]++] = k;
  }
}

std::span<const std::uint32_t> HdiMatrix::user_entries(std::size_t u) const {
  return {user_index_.data() + user_offsets_[u],
          user_index_.data() + user_offsets_[u + 1]};
}

std::span<const std::uint32_t> HdiMatrix::item_entries(std::size_t i) const {
  return {item_index_.data() + item_offsets_[i],
          item_index_.data() + item_offsets_[i + 1]};
}

std::size_t HdiMatrix::user_degree(std::size_t u) const {
  return user_offsets_[u + 1] - user_offsets_[u];
}

std::size_t HdiMatrix::item_degree(std::size_t i) const {
  return item_offsets_[i + 1] - item_offsets_[i];
}

HdiMatrix build_hdi(std::span<const RatingTuple> tuples) {
  if (tuples.empty()) throw DataError("cannot build matrix from zero tuples");

  std::unordered_map<std::string, std::uint32_t> user_map, item_map;
  std::vector<std::string> user_ids, item_ids;
  std::vector<Entry> entries;
  entries.reserve(tuples.size());
  for (const RatingTuple& t : tuples) {
    auto [uit, unew] = user_map.try_emplace(t.user, static_cast<std::uint32_t>(user_ids.size()));
    if (unew) user_ids.push_back(t.user);
    auto [iit, inew] = item_map.try_emplace(t.item, static_cast<std::uint32_t>(item_ids.size()));
    if (inew) item_ids.push_back(t.item);
    entries.push_back({uit->second, iit->second, t.rating});
  }
  const std::size_t num_users = user_ids.size();
  const std::size_t num_items = item_ids.size();
  return HdiMatrix(num_users, num_items, std::move(entries),
                   std::move(user_ids), std::move(item_ids));
}

HdiMatrix load_dataset(const std::string& path, const FormatSpec& fmt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  const auto tuples = parse_ratings(in, fmt);
  if (tuples.empty()) throw DataError("dataset '" + path + "' has no ratings");
  return build_hdi(tuples);
}

Partition make_partition(const HdiMatrix& matrix, const SplitRatios& ratios,
                         std::uint64_t seed) {
  if (!(ratios.train > 0.0) || !(ratios.validation > 0.0) || !(ratios.test > 0.0)) {
    throw ConfigError("partition ratios must all be positive");
  }
  const double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("partition ratios must sum to 1");
  }

  const std::size_t n = matrix.num_entries();
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng rng(seed);
  rng.shuffle(std::span<std::uint32_t>(perm));

  const auto cut1 = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(n)));
  const auto cut2 = static_cast<std::size_t>(
      std::floor((ratios.train + ratios.validation) * static_cast<double>(n)));

  Partition part;
  part.seed = seed;
  part.train_indices.assign(perm.begin(), perm.begin() + cut1);
  part.validation_indices.assign(perm.begin() + cut1, perm.begin() + cut2);
  part.test_indices.assign(perm.begin() + cut2, perm.end());

  std::vector<Entry> train_entries;
  train_entries.reserve(cut1);
  for (const auto k : part.train_indices) train_entries.push_back(matrix.entry(k));
  part.train = HdiMatrix(matrix.num_users(), matrix.num_items(),
                         std::move(train_entries), matrix.user_ids(),
                         matrix.item_ids());
  for (const auto k : part.validation_indices) part.validation.push_back(matrix.entry(k));
  for (const auto k : part.test_indices) part.test.push_back(matrix.entry(k));
  return part;
}

double density(const HdiMatrix& matrix) {
  if (matrix.num_users() == 0 || matrix.num_items() == 0) {
    throw DataError("density of an empty matrix");
  }
  return static_cast<double>(matrix.num_entries()) /
         (static_cast<double>(matrix.num_users()) *
          static_cast<double>(matrix.num_items()));
}

}  // namespace pslf
