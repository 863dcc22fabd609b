#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace attnlab {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kSeqLen = 10;
inline constexpr int kQueryLen = 3;
inline constexpr int kAlphabet = 10;
inline constexpr int kOrderingPool = 5;
inline constexpr int kMaxStart = kSeqLen - kQueryLen;  // inclusive
inline constexpr int kPadToken = 10;                   // conditioning pad id

enum class Task { sorting, retrieval };

struct SortingInstance {
  int ordering_id = 0;
  std::array<int, kSeqLen> ordering{};
  std::array<int, kSeqLen> target{};
  std::array<int, kSeqLen> labels{};
  bool operator==(const SortingInstance&) const = default;
};

struct RetrievalInstance {
  std::array<int, kQueryLen> query{};
  std::array<int, kSeqLen> reference{};
  int start = 0;
  bool operator==(const RetrievalInstance&) const = default;
};

struct DatasetSpec {
  int n_train = 1000;
  int n_test = 200;
  uint64_t seed = 0;
  Task task = Task::sorting;
  void validate() const;
};

// label[i] = destination index of target[i] after a stable sort by the
// ordering's rank (ties keep original order). Generic length for oracle
// cross-checks; the task itself uses length 10.
std::vector<int> sorting_labels(const std::vector<int>& target, const std::vector<int>& ordering);

// Five distinct permutations of {0..9}, a pure function of the seed.
std::vector<std::array<int, kSeqLen>> ordering_pool(uint64_t seed);

struct SortingDataset {
  std::vector<std::array<int, kSeqLen>> pool;
  std::vector<SortingInstance> train, test;
};

struct RetrievalDataset {
  std::vector<RetrievalInstance> train, test;
};

SortingDataset gen_sorting(const DatasetSpec& spec);
RetrievalDataset gen_retrieval(const DatasetSpec& spec);

std::string serialize(const std::vector<SortingInstance>& v);
std::string serialize(const std::vector<RetrievalInstance>& v);

// Throw ParseError naming the 1-based line on malformed or invalid records.
std::vector<SortingInstance> parse_sorting(const std::string& text);
std::vector<RetrievalInstance> parse_retrieval(const std::string& text);

}  // namespace attnlab
