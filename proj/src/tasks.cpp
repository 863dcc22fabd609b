#include "attnlab/tasks.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "attnlab/rng.hpp"

namespace attnlab {
namespace {

void check_token(int tok, int line_no) {
  if (tok < 0 || tok >= kAlphabet)
    throw ParseError("line " + std::to_string(line_no) + ": token " + std::to_string(tok) +
                     " outside the alphabet");
}

bool is_permutation_of_len(const std::array<int, kSeqLen>& v) {
  std::array<bool, kSeqLen> seen{};
  for (int x : v) {
    if (x < 0 || x >= kSeqLen || seen[x]) return false;
    seen[x] = true;
  }
  return true;
}

std::array<int, kSeqLen> random_permutation(RngStream& rng) {
  std::array<int, kSeqLen> p;
  std::iota(p.begin(), p.end(), 0);
  for (int i = kSeqLen - 1; i > 0; --i) {
    const int j = rng.uniform_int(i + 1);
    std::swap(p[i], p[j]);
  }
  return p;
}

int first_occurrence(const std::array<int, kSeqLen>& reference,
                     const std::array<int, kQueryLen>& query) {
  for (int s = 0; s <= kMaxStart; ++s) {
    bool match = true;
    for (int k = 0; k < kQueryLen; ++k) {
      if (reference[s + k] != query[k]) {
        match = false;
        break;
      }
    }
    if (match) return s;
  }
  return -1;
}

SortingInstance make_sorting_instance(const std::vector<std::array<int, kSeqLen>>& pool,
                                      RngStream& rng) {
  SortingInstance inst;
  inst.ordering_id = rng.uniform_int(kOrderingPool);
  inst.ordering = pool[inst.ordering_id];
  for (int& t : inst.target) t = rng.uniform_int(kAlphabet);
  const std::vector<int> labels =
      sorting_labels(std::vector<int>(inst.target.begin(), inst.target.end()),
                     std::vector<int>(inst.ordering.begin(), inst.ordering.end()));
  std::copy(labels.begin(), labels.end(), inst.labels.begin());
  return inst;
}

RetrievalInstance make_retrieval_instance(RngStream& rng) {
  RetrievalInstance inst;
  for (int& t : inst.query) t = rng.uniform_int(kAlphabet);
  std::array<int, kSeqLen - kQueryLen> filler;
  for (int& t : filler) t = rng.uniform_int(kAlphabet);
  const int insert_at = rng.uniform_int(kMaxStart + 1);
  int f = 0;
  for (int pos = 0; pos < kSeqLen; ++pos) {
    if (pos >= insert_at && pos < insert_at + kQueryLen) {
      inst.reference[pos] = inst.query[pos - insert_at];
    } else {
      inst.reference[pos] = filler[f++];
    }
  }
  // Random fillers can reproduce the query ahead of the insertion point; the
  // label is the first occurrence so it stays unique.
  inst.start = first_occurrence(inst.reference, inst.query);
  return inst;
}

void append_csv(std::string& out, const int* v, int len) {
  for (int i = 0; i < len; ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  size_t from = 0;
  while (true) {
    const size_t at = s.find(sep, from);
    if (at == std::string::npos) {
      parts.push_back(s.substr(from));
      return parts;
    }
    parts.push_back(s.substr(from, at - from));
    from = at + 1;
  }
}

int parse_int(const std::string& s, int line_no) {
  if (s.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty field");
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": '" + s + "' is not an integer");
  }
  if (used != s.size())
    throw ParseError("line " + std::to_string(line_no) + ": trailing characters in '" + s + "'");
  return v;
}

template <size_t N>
std::array<int, N> parse_csv_tokens(const std::string& field, int line_no) {
  const auto parts = split(field, ',');
  if (parts.size() != N)
    throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(N) +
                     " comma-separated values, got " + std::to_string(parts.size()));
  std::array<int, N> out;
  for (size_t i = 0; i < N; ++i) out[i] = parse_int(parts[i], line_no);
  return out;
}

// Returns non-empty lines with their 1-based numbers; rejects blank interior
// lines so truncated files are caught loudly.
std::vector<std::pair<int, std::string>> numbered_lines(const std::string& text) {
  std::vector<std::pair<int, std::string>> lines;
  int line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError("line " + std::to_string(line_no) + ": blank line");
    lines.emplace_back(line_no, line);
  }
  return lines;
}

}  // namespace

void DatasetSpec::validate() const {
  if (n_train < 1 || n_test < 1) throw std::invalid_argument("instance counts must be positive");
}

std::vector<int> sorting_labels(const std::vector<int>& target, const std::vector<int>& ordering) {
  const int n = static_cast<int>(ordering.size());
  if (target.size() != ordering.size())
    throw std::invalid_argument("target and ordering lengths differ");
  std::vector<int> rank(n, -1);
  for (int r = 0; r < n; ++r) {
    const int tok = ordering[r];
    if (tok < 0 || tok >= n || rank[tok] != -1)
      throw std::invalid_argument("ordering is not a permutation");
    rank[tok] = r;
  }
  for (int tok : target)
    if (tok < 0 || tok >= n) throw std::invalid_argument("target token outside the alphabet");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return rank[target[a]] < rank[target[b]]; });
  std::vector<int> labels(n);
  for (int r = 0; r < n; ++r) labels[idx[r]] = r;
  return labels;
}

std::vector<std::array<int, kSeqLen>> ordering_pool(uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<std::array<int, kSeqLen>> pool;
  std::set<std::array<int, kSeqLen>> seen;
  while (pool.size() < kOrderingPool) {
    const auto p = random_permutation(rng);
    if (seen.insert(p).second) pool.push_back(p);
  }
  return pool;
}

SortingDataset gen_sorting(const DatasetSpec& spec) {
  spec.validate();
  SortingDataset out;
  out.pool = ordering_pool(spec.seed);
  RngStream train_rng(spec.seed, 1);
  RngStream test_rng(spec.seed, 2);
  out.train.reserve(spec.n_train);
  out.test.reserve(spec.n_test);
  for (int i = 0; i < spec.n_train; ++i) out.train.push_back(make_sorting_instance(out.pool, train_rng));
  for (int i = 0; i < spec.n_test; ++i) out.test.push_back(make_sorting_instance(out.pool, test_rng));
  return out;
}

RetrievalDataset gen_retrieval(const DatasetSpec& spec) {
  spec.validate();
  RetrievalDataset out;
  RngStream train_rng(spec.seed, 1);
  RngStream test_rng(spec.seed, 2);
  out.train.reserve(spec.n_train);
  out.test.reserve(spec.n_test);
  for (int i = 0; i < spec.n_train; ++i) out.train.push_back(make_retrieval_instance(train_rng));
  for (int i = 0; i < spec.n_test; ++i) out.test.push_back(make_retrieval_instance(test_rng));
  return out;
}

std::string serialize(const std::vector<SortingInstance>& v) {
  std::string out;
  for (const auto& inst : v) {
    out += std::to_string(inst.ordering_id);
    out += ' ';
    append_csv(out, inst.ordering.data(), kSeqLen);
    out += ' ';
    append_csv(out, inst.target.data(), kSeqLen);
    out += ' ';
    append_csv(out, inst.labels.data(), kSeqLen);
    out += '\n';
  }
  return out;
}

std::string serialize(const std::vector<RetrievalInstance>& v) {
  std::string out;
  for (const auto& inst : v) {
    append_csv(out, inst.query.data(), kQueryLen);
    out += ' ';
    append_csv(out, inst.reference.data(), kSeqLen);
    out += ' ';
    out += std::to_string(inst.start);
    out += '\n';
  }
  return out;
}

std::vector<SortingInstance> parse_sorting(const std::string& text) {
  std::vector<SortingInstance> out;
  for (const auto& [line_no, line] : numbered_lines(text)) {
    const auto fields = split(line, ' ');
    if (fields.size() != 4)
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    SortingInstance inst;
    inst.ordering_id = parse_int(fields[0], line_no);
    if (inst.ordering_id < 0 || inst.ordering_id >= kOrderingPool)
      throw ParseError("line " + std::to_string(line_no) + ": ordering_id out of range");
    inst.ordering = parse_csv_tokens<kSeqLen>(fields[1], line_no);
    inst.target = parse_csv_tokens<kSeqLen>(fields[2], line_no);
    inst.labels = parse_csv_tokens<kSeqLen>(fields[3], line_no);
    if (!is_permutation_of_len(inst.ordering))
      throw ParseError("line " + std::to_string(line_no) + ": ordering is not a permutation");
    for (int t : inst.target) check_token(t, line_no);
    if (!is_permutation_of_len(inst.labels))
      throw ParseError("line " + std::to_string(line_no) + ": labels are not a permutation");
    // Scattering by labels must put the tokens in nondecreasing rank order.
    std::array<int, kSeqLen> rank{};
    for (int r = 0; r < kSeqLen; ++r) rank[inst.ordering[r]] = r;
    std::array<int, kSeqLen> scattered{};
    for (int i = 0; i < kSeqLen; ++i) scattered[inst.labels[i]] = rank[inst.target[i]];
    for (int r = 1; r < kSeqLen; ++r)
      if (scattered[r] < scattered[r - 1])
        throw ParseError("line " + std::to_string(line_no) +
                         ": labels disagree with the ordering");
    out.push_back(inst);
  }
  return out;
}

std::vector<RetrievalInstance> parse_retrieval(const std::string& text) {
  std::vector<RetrievalInstance> out;
  for (const auto& [line_no, line] : numbered_lines(text)) {
    const auto fields = split(line, ' ');
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                       std::to_string(fields.size()));
    RetrievalInstance inst;
    inst.query = parse_csv_tokens<kQueryLen>(fields[0], line_no);
    inst.reference = parse_csv_tokens<kSeqLen>(fields[1], line_no);
    inst.start = parse_int(fields[2], line_no);
    for (int t : inst.query) check_token(t, line_no);
    for (int t : inst.reference) check_token(t, line_no);
    if (inst.start < 0 || inst.start > kMaxStart)
      throw ParseError("line " + std::to_string(line_no) + ": start out of range");
    if (first_occurrence(inst.reference, inst.query) != inst.start)
      throw ParseError("line " + std::to_string(line_no) +
                       ": start is not the first occurrence of the query");
    out.push_back(inst);
  }
  return out;
}

}  // namespace attnlab
