#pragma once

// Feature-vector corpora: CSV ingestion and emission, a seeded synthetic
// generator, and genuine/impostor pair sampling.
//
// CSV layout (UTF-8, LF line endings):
//   user_id,sample_id,f1,...,fn
//   <user>,<sample>,<v1>,...,<vn>
// One row per sample. Values are written with 17 significant digits so a
// save/load cycle is bit-exact. Rows of one user need not be contiguous;
// users keep the order of their first row.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "iomlab/core.hpp"
#include "iomlab/random.hpp"

namespace iomlab {

struct UserRecord {
  std::string user_id;
  std::vector<std::string> sample_ids;
  std::vector<FeatureVector> samples;

  bool operator==(const UserRecord&) const = default;
};

struct Corpus {
  std::size_t n = 0;
  std::vector<UserRecord> users;

  std::size_t sample_count() const noexcept;
  std::size_t min_samples_per_user() const noexcept;

  /// Throws DimensionError / InvalidInput when the invariants do not hold.
  void validate() const;

  bool operator==(const Corpus&) const = default;
};

Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Extremes of the published feature components.
inline constexpr std::pair<double, double> kFeatureRange{-0.2504, 0.2132};

struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t users = 100;
  std::size_t samples_per_user = 5;
  std::size_t n = 299;
  std::pair<double, double> range = kFeatureRange;
  double noise_sigma = 0.02;
};

/// Per user, a mean drawn uniformly in [lo, hi]^n; each sample is the mean
/// plus N(0, noise_sigma^2) noise per component, clipped to [lo, hi]. This
/// model is not fitted to any real fingerprint features.
Corpus synth_corpus(const SynthSpec& spec);

struct SampleRef {
  std::size_t user = 0;
  std::size_t sample = 0;

  bool operator==(const SampleRef&) const = default;
};

enum class PairKind { Genuine, Impostor };

/// Draws one genuine pair: a user with >= 2 samples, two distinct samples.
std::pair<SampleRef, SampleRef> draw_genuine_pair(const Corpus& corpus, Rng& rng);

/// Draws one impostor pair: two distinct users, one sample each.
std::pair<SampleRef, SampleRef> draw_impostor_pair(const Corpus& corpus, Rng& rng);

std::vector<std::pair<SampleRef, SampleRef>> sample_pair_refs(
    const Corpus& corpus, std::uint64_t seed, std::size_t count, PairKind kind);

std::vector<std::pair<FeatureVector, FeatureVector>> sample_pairs(
    const Corpus& corpus, std::uint64_t seed, std::size_t count, PairKind kind);

/// Componentwise mean of every sample in the corpus.
std::vector<double> corpus_mean(const Corpus& corpus);

}  // namespace iomlab
