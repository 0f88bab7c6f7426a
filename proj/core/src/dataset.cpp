#include "iomlab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string_view>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "iomlab/error.hpp"

namespace iomlab {

std::size_t Corpus::sample_count() const noexcept {
  std::size_t total = 0;
  for (const auto& u : users) total += u.samples.size();
  return total;
}

std::size_t Corpus::min_samples_per_user() const noexcept {
  if (users.empty()) return 0;
  std::size_t least = users.front().samples.size();
  for (const auto& u : users) least = std::min(least, u.samples.size());
  return least;
}

void Corpus::validate() const {
  require(n > 0, ErrorKind::InvalidInput, "corpus: n must be positive");
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& u : users) {
    require(!u.samples.empty(), ErrorKind::InvalidInput,
            "corpus: user without samples");
    require(u.sample_ids.size() == u.samples.size(), ErrorKind::InvalidInput,
            "corpus: sample id count differs from sample count");
    require(seen.emplace(u.user_id, 0).second, ErrorKind::InvalidInput,
            "corpus: duplicate user id");
    for (const auto& s : u.samples) {
      require(s.size() == n, ErrorKind::DimensionError,
              "corpus: sample length differs from n");
    }
  }
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void fail_at(ErrorKind kind, std::size_t line, const std::string& what) {
  fail(kind, "line " + std::to_string(line) + ": " + what);
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorKind::ParseError, "line 1: empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split(line);
  if (header.size() < 3 || header[0] != "user_id" || header[1] != "sample_id") {
    fail_at(ErrorKind::ParseError, line_no, "header must be user_id,sample_id,f1,...,fn");
  }
  Corpus corpus;
  corpus.n = header.size() - 2;
  for (std::size_t j = 0; j < corpus.n; ++j) {
    if (header[j + 2] != "f" + std::to_string(j + 1)) {
      fail_at(ErrorKind::ParseError, line_no, "unexpected feature column name");
    }
  }

  std::unordered_map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != corpus.n + 2) {
      fail_at(ErrorKind::DimensionError, line_no,
              "expected " + std::to_string(corpus.n) + " feature values, got " +
                  std::to_string(fields.size() < 2 ? 0 : fields.size() - 2));
    }
    if (fields[0].empty()) fail_at(ErrorKind::ParseError, line_no, "empty user_id");
    std::vector<double> values(corpus.n);
    for (std::size_t j = 0; j < corpus.n; ++j) {
      const auto field = fields[j + 2];
      const auto res = std::from_chars(field.data(), field.data() + field.size(), values[j]);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        fail_at(ErrorKind::ParseError, line_no,
                "cannot parse value in column " + std::to_string(j + 3));
      }
      if (!std::isfinite(values[j])) {
        fail_at(ErrorKind::ParseError, line_no, "non-finite value in column " +
                                                    std::to_string(j + 3));
      }
    }
    const std::string user(fields[0]);
    auto [it, inserted] = index.emplace(user, corpus.users.size());
    if (inserted) corpus.users.push_back(UserRecord{user, {}, {}});
    auto& record = corpus.users[it->second];
    record.sample_ids.emplace_back(fields[1]);
    record.samples.emplace_back(std::move(values));
  }
  if (corpus.users.empty()) fail_at(ErrorKind::ParseError, line_no, "no sample rows");
  corpus.validate();
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open corpus file " + path.string());
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  corpus.validate();
  std::string text = "user_id,sample_id";
  for (std::size_t j = 1; j <= corpus.n; ++j) text += ",f" + std::to_string(j);
  text += '\n';
  for (const auto& user : corpus.users) {
    for (std::size_t s = 0; s < user.samples.size(); ++s) {
      text += user.user_id;
      text += ',';
      text += user.sample_ids[s];
      for (double v : user.samples[s].values()) {
        text += ',';
        append_double(text, v);
      }
      text += '\n';
    }
  }
  out << text;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write corpus file " + path.string());
  write_corpus(out, corpus);
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

Corpus synth_corpus(const SynthSpec& spec) {
  const auto [lo, hi] = spec.range;
  require(lo < hi, ErrorKind::InvalidInput, "synthetic corpus: need lo < hi");
  require(spec.noise_sigma >= 0.0, ErrorKind::InvalidInput,
          "synthetic corpus: noise sigma must be >= 0");
  require(spec.users >= 1 && spec.samples_per_user >= 1 && spec.n >= 1,
          ErrorKind::InvalidInput, "synthetic corpus: empty shape");

  Corpus corpus;
  corpus.n = spec.n;
  corpus.users.reserve(spec.users);
  for (std::size_t u = 0; u < spec.users; ++u) {
    Rng rng(derive_seed(spec.seed, Stream::Corpus, u));
    std::vector<double> mean(spec.n);
    for (auto& v : mean) v = rng.uniform(lo, hi);

    UserRecord record;
    char id[32];
    std::snprintf(id, sizeof(id), "u%03zu", u + 1);
    record.user_id = id;
    for (std::size_t s = 0; s < spec.samples_per_user; ++s) {
      std::vector<double> sample(spec.n);
      for (std::size_t j = 0; j < spec.n; ++j) {
        const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.gaussian() : 0.0;
        sample[j] = std::clamp(mean[j] + noise, lo, hi);
      }
      record.sample_ids.push_back(std::to_string(s + 1));
      record.samples.emplace_back(std::move(sample));
    }
    corpus.users.push_back(std::move(record));
  }
  return corpus;
}

std::pair<SampleRef, SampleRef> draw_genuine_pair(const Corpus& corpus, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t u = 0; u < corpus.users.size(); ++u) {
    if (corpus.users[u].samples.size() >= 2) eligible.push_back(u);
  }
  require(!eligible.empty(), ErrorKind::InsufficientData,
          "genuine pairs need a user with at least two samples");
  const auto user = eligible[rng.below(eligible.size())];
  const auto count = corpus.users[user].samples.size();
  const auto first = rng.below(count);
  auto second = rng.below(count - 1);
  if (second >= first) ++second;
  return {{user, first}, {user, second}};
}

std::pair<SampleRef, SampleRef> draw_impostor_pair(const Corpus& corpus, Rng& rng) {
  const auto users = corpus.users.size();
  require(users >= 2, ErrorKind::InsufficientData,
          "impostor pairs need at least two users");
  const auto a = rng.below(users);
  auto b = rng.below(users - 1);
  if (b >= a) ++b;
  return {{a, rng.below(corpus.users[a].samples.size())},
          {b, rng.below(corpus.users[b].samples.size())}};
}

std::vector<std::pair<SampleRef, SampleRef>> sample_pair_refs(
    const Corpus& corpus, std::uint64_t seed, std::size_t count, PairKind kind) {
  Rng rng(derive_seed(seed, Stream::Pairs, static_cast<std::uint64_t>(kind)));
  std::vector<std::pair<SampleRef, SampleRef>> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    pairs.push_back(kind == PairKind::Genuine ? draw_genuine_pair(corpus, rng)
                                              : draw_impostor_pair(corpus, rng));
  }
  return pairs;
}

std::vector<std::pair<FeatureVector, FeatureVector>> sample_pairs(
    const Corpus& corpus, std::uint64_t seed, std::size_t count, PairKind kind) {
  std::vector<std::pair<FeatureVector, FeatureVector>> out;
  out.reserve(count);
  for (const auto& [a, b] : sample_pair_refs(corpus, seed, count, kind)) {
    out.emplace_back(corpus.users[a.user].samples[a.sample],
                     corpus.users[b.user].samples[b.sample]);
  }
  return out;
}

std::vector<double> corpus_mean(const Corpus& corpus) {
  std::vector<double> mean(corpus.n, 0.0);
  const auto total = corpus.sample_count();
  require(total > 0, ErrorKind::InsufficientData, "corpus is empty");
  for (const auto& user : corpus.users) {
    for (const auto& s : user.samples) {
      for (std::size_t j = 0; j < corpus.n; ++j) mean[j] += s[j];
    }
  }
  for (auto& v : mean) v /= static_cast<double>(total);
  return mean;
}

}  // namespace iomlab
