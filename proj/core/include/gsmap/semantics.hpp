#pragma once

#include "gsmap/image.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gsmap {

inline constexpr std::size_t kEmbeddingDim = 256;

/// L2-normalized text embedding.
struct Embedding {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

double cosine(const Embedding& a, const Embedding& b);

/// Deterministic hashed bag-of-features embedding: lowercased tokens plus
/// within-token character trigrams, signed FNV-1a bins, L2-normalized.
/// Text with no tokens maps to a fixed unit basis vector.
Embedding mock_embed(std::string_view text, std::size_t dim = kEmbeddingDim);

/// Deduplicates "; "-separated segments (keeping first occurrences) and
/// truncates at a segment boundary to fit `limit`.  Idempotent.
std::string mock_summarize(const std::string& text, std::size_t limit);

class EmbedderContract {
 public:
  virtual ~EmbedderContract() = default;
  virtual Embedding embed(std::string_view text) const = 0;
};

class SummarizerContract {
 public:
  virtual ~SummarizerContract() = default;
  /// Output must fit within `limit` bytes.
  virtual std::string summarize(const std::string& text, std::size_t limit) const = 0;
};

class ScorerContract {
 public:
  virtual ~ScorerContract() = default;
  /// Relevance of a map unit to a goal, in [0,1].  `unit_image` may be null.
  virtual double score(const std::string& unit_text, const ImageBuffer* unit_image,
                       const std::string& goal_text) const = 0;
};

class MockEmbedder final : public EmbedderContract {
 public:
  Embedding embed(std::string_view text) const override { return mock_embed(text); }
};

class MockSummarizer final : public SummarizerContract {
 public:
  std::string summarize(const std::string& text, std::size_t limit) const override {
    return mock_summarize(text, limit);
  }
};

/// Text-only scorer: embedding cosine mapped affinely onto [0,1].
class MockScorer final : public ScorerContract {
 public:
  double score(const std::string& unit_text, const ImageBuffer* unit_image,
               const std::string& goal_text) const override;
};

/// Replays responses recorded from a live backend; unknown inputs are a data
/// error.  Recording format: JSON with "embeddings" (text -> vector),
/// "summaries" (text -> text), "scores" ("unit\n---\ngoal" -> number).
class ReplayTranscript {
 public:
  static ReplayTranscript load(const std::filesystem::path& path);

  std::optional<Embedding> embedding(std::string_view text) const;
  std::optional<std::string> summary(std::string_view text) const;
  std::optional<double> score(std::string_view unit_text, std::string_view goal_text) const;

 private:
  std::map<std::string, Embedding, std::less<>> embeddings_;
  std::map<std::string, std::string, std::less<>> summaries_;
  std::map<std::string, double, std::less<>> scores_;
};

class ReplayEmbedder final : public EmbedderContract {
 public:
  explicit ReplayEmbedder(const ReplayTranscript* transcript) : transcript_(transcript) {}
  Embedding embed(std::string_view text) const override;

 private:
  const ReplayTranscript* transcript_;
};

class ReplaySummarizer final : public SummarizerContract {
 public:
  explicit ReplaySummarizer(const ReplayTranscript* transcript) : transcript_(transcript) {}
  std::string summarize(const std::string& text, std::size_t limit) const override;

 private:
  const ReplayTranscript* transcript_;
};

class ReplayScorer final : public ScorerContract {
 public:
  explicit ReplayScorer(const ReplayTranscript* transcript) : transcript_(transcript) {}
  double score(const std::string& unit_text, const ImageBuffer* unit_image,
               const std::string& goal_text) const override;

 private:
  const ReplayTranscript* transcript_;
};

/// Per-frame scene description: observed object instances with their pixel
/// masks and the regions grouping them, all ids local to the frame.
struct ParsedInstance {
  int local_id = 0;
  std::string text;
  std::string mask_path;  // relative to the parse file's directory
};

struct ParsedRegion {
  int local_id = 0;
  std::string text;
  std::set<int> members;  // local instance ids
};

struct SemanticParse {
  std::string frame_id;
  std::vector<ParsedInstance> instances;
  std::vector<ParsedRegion> regions;
};

/// Loads and validates a parse JSON file.  Duplicate local ids, empty texts,
/// or region members referencing unknown instances are data errors.
SemanticParse load_parse(const std::filesystem::path& path);

}  // namespace gsmap
