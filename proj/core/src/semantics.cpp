#include "gsmap/semantics.hpp"

#include "gsmap/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>

namespace gsmap {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

void accumulate_feature(std::vector<double>& bins, std::string_view feature) {
  const std::uint64_t h = fnv1a(feature);
  const std::size_t bin = static_cast<std::size_t>(h % bins.size());
  const double sign = ((h >> 32) & 1ULL) ? 1.0 : -1.0;
  bins[bin] += sign;
}

bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  return dot;
}

Embedding mock_embed(std::string_view text, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("mock_embed: zero dimension");
  std::vector<double> bins(dim, 0.0);

  std::string token;
  bool any = false;
  auto flush = [&]() {
    if (token.empty()) return;
    any = true;
    accumulate_feature(bins, "T#" + token);
    if (token.size() >= 3) {
      for (std::size_t i = 0; i + 3 <= token.size(); ++i) {
        accumulate_feature(bins, "3#" + token.substr(i, 3));
      }
    }
    token.clear();
  };
  for (char c : text) {
    if (alnum(c)) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();

  Embedding e;
  e.values = std::move(bins);
  if (!any) {
    e.values.assign(dim, 0.0);
    e.values[0] = 1.0;
    return e;
  }
  double norm = 0.0;
  for (double v : e.values) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) {  // all features cancelled; fall back like empty text
    e.values.assign(dim, 0.0);
    e.values[0] = 1.0;
    return e;
  }
  for (double& v : e.values) v /= norm;
  return e;
}

std::string mock_summarize(const std::string& text, std::size_t limit) {
  static constexpr std::string_view kDelim = "; ";

  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(kDelim, start);
    if (pos == std::string::npos) {
      segments.push_back(text.substr(start));
      break;
    }
    segments.push_back(text.substr(start, pos - start));
    start = pos + kDelim.size();
  }

  std::vector<std::string> kept;
  std::set<std::string> seen;
  for (auto& s : segments) {
    if (seen.insert(s).second) kept.push_back(std::move(s));
  }

  std::string out;
  for (const auto& s : kept) {
    const std::size_t next = out.empty() ? s.size() : out.size() + kDelim.size() + s.size();
    if (next > limit) break;
    if (!out.empty()) out += kDelim;
    out += s;
  }
  if (out.empty() && !kept.empty()) out = kept.front().substr(0, limit);
  return out;
}

double MockScorer::score(const std::string& unit_text, const ImageBuffer* unit_image,
                         const std::string& goal_text) const {
  (void)unit_image;
  const double c = std::clamp(cosine(mock_embed(unit_text), mock_embed(goal_text)), -1.0, 1.0);
  return 0.5 * (c + 1.0);
}

ReplayTranscript ReplayTranscript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("replay transcript: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("replay transcript: " + path.string() + ": " + e.what());
  }

  ReplayTranscript t;
  if (j.contains("embeddings")) {
    for (auto& [text, vec] : j.at("embeddings").items()) {
      Embedding e;
      e.values = vec.get<std::vector<double>>();
      t.embeddings_.emplace(text, std::move(e));
    }
  }
  if (j.contains("summaries")) {
    for (auto& [text, out] : j.at("summaries").items()) {
      t.summaries_.emplace(text, out.get<std::string>());
    }
  }
  if (j.contains("scores")) {
    for (auto& [key, v] : j.at("scores").items()) {
      t.scores_.emplace(key, v.get<double>());
    }
  }
  return t;
}

std::optional<Embedding> ReplayTranscript::embedding(std::string_view text) const {
  auto it = embeddings_.find(text);
  if (it == embeddings_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> ReplayTranscript::summary(std::string_view text) const {
  auto it = summaries_.find(text);
  if (it == summaries_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ReplayTranscript::score(std::string_view unit_text,
                                              std::string_view goal_text) const {
  std::string key;
  key.reserve(unit_text.size() + goal_text.size() + 5);
  key.append(unit_text);
  key.append("\n---\n");
  key.append(goal_text);
  auto it = scores_.find(key);
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

Embedding ReplayEmbedder::embed(std::string_view text) const {
  if (auto e = transcript_->embedding(text)) return *e;
  throw DataError("replay embedder: no recorded response for \"" + std::string(text) + "\"");
}

std::string ReplaySummarizer::summarize(const std::string& text, std::size_t limit) const {
  auto s = transcript_->summary(text);
  if (!s) throw DataError("replay summarizer: no recorded response for \"" + text + "\"");
  if (s->size() > limit) throw DataError("replay summarizer: recorded response exceeds limit");
  return *s;
}

double ReplayScorer::score(const std::string& unit_text, const ImageBuffer* unit_image,
                           const std::string& goal_text) const {
  (void)unit_image;
  if (auto v = transcript_->score(unit_text, goal_text)) return *v;
  throw DataError("replay scorer: no recorded response for \"" + unit_text + "\" vs \"" +
                  goal_text + "\"");
}

SemanticParse load_parse(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("parse: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("parse: " + path.string() + ": " + e.what());
  }

  SemanticParse parse;
  try {
    parse.frame_id = j.at("frame_id").get<std::string>();
    std::set<int> instance_ids;
    for (const auto& ji : j.value("instances", nlohmann::json::array())) {
      ParsedInstance inst;
      inst.local_id = ji.at("id").get<int>();
      inst.text = ji.at("text").get<std::string>();
      inst.mask_path = ji.at("mask").get<std::string>();
      if (inst.text.empty()) {
        throw DataError("parse: " + parse.frame_id + ": instance " +
                        std::to_string(inst.local_id) + " has empty text");
      }
      if (!instance_ids.insert(inst.local_id).second) {
        throw DataError("parse: " + parse.frame_id + ": duplicate instance id " +
                        std::to_string(inst.local_id));
      }
      parse.instances.push_back(std::move(inst));
    }
    std::set<int> region_ids;
    for (const auto& jr : j.value("regions", nlohmann::json::array())) {
      ParsedRegion region;
      region.local_id = jr.at("id").get<int>();
      region.text = jr.at("text").get<std::string>();
      if (region.text.empty()) {
        throw DataError("parse: " + parse.frame_id + ": region " +
                        std::to_string(region.local_id) + " has empty text");
      }
      if (!region_ids.insert(region.local_id).second) {
        throw DataError("parse: " + parse.frame_id + ": duplicate region id " +
                        std::to_string(region.local_id));
      }
      for (const auto& m : jr.at("members")) {
        const int member = m.get<int>();
        if (!instance_ids.count(member)) {
          throw DataError("parse: " + parse.frame_id + ": region " +
                          std::to_string(region.local_id) + " references unknown instance " +
                          std::to_string(member));
        }
        region.members.insert(member);
      }
      parse.regions.push_back(std::move(region));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("parse: " + path.string() + ": " + e.what());
  }
  return parse;
}

}  // namespace gsmap
