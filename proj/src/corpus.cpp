// Copyright 2026 The gencmr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gencmr/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gencmr/error.hpp"
#include "gencmr/text.hpp"

namespace gencmr {

using nlohmann::json;

std::string_view direction_name(Direction d) {
  return d == Direction::kToImage ? "to_image" : "to_text";
}

Direction parse_direction(std::string_view name) {
  if (name == "to_image") return Direction::kToImage;
  if (name == "to_text") return Direction::kToText;
  throw Error(ErrorCode::kMalformedRecord, "unknown direction '" + std::string(name) + "'");
}

Corpus::Corpus(std::vector<Target> targets) : targets_(std::move(targets)) {
  if (targets_.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no targets");
  direction_ = targets_.front().direction;
  index_.reserve(targets_.size());
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    const Target& t = targets_[i];
    if (t.target_id.empty()) {
      throw Error(ErrorCode::kMalformedRecord, "record " + std::to_string(i + 1) + ": empty target_id");
    }
    if (trim(t.descriptor).empty()) throw Error(ErrorCode::kEmptyDescriptor, t.target_id);
    if (t.direction != direction_) {
      throw Error(ErrorCode::kMalformedRecord, "mixed directions at target " + t.target_id);
    }
    if (!index_.emplace(t.target_id, i).second) throw Error(ErrorCode::kDuplicateId, t.target_id);
  }
}

std::optional<std::size_t> Corpus::index_of(std::string_view target_id) const {
  const auto it = index_.find(std::string(target_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Target& Corpus::at(std::string_view target_id) const {
  if (auto i = index_of(target_id)) return targets_[*i];
  throw Error(ErrorCode::kUnknownTarget, std::string(target_id));
}

std::vector<std::string> Corpus::descriptors() const {
  std::vector<std::string> out;
  out.reserve(targets_.size());
  for (const auto& t : targets_) out.push_back(t.descriptor);
  return out;
}

namespace {

std::string line_tag(std::size_t line) { return "line " + std::to_string(line); }

json parse_record(const std::string& raw, std::size_t line) {
  json record;
  try {
    record = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": " + e.what());
  }
  if (!record.is_object()) throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": not a JSON object");
  return record;
}

std::string required_string(const json& record, const char* field, std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw Error(ErrorCode::kMalformedRecord,
                line_tag(line) + ": missing string field '" + field + "'");
  }
  try {
    return nfc_normalize(it->get<std::string>());
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": " + e.what());
  }
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    fn(parse_record(raw, line), line);
  }
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  std::vector<Target> targets;
  std::set<std::string> seen;
  for_each_record(in, [&](const json& record, std::size_t line) {
    Target t;
    t.target_id = required_string(record, "target_id", line);
    t.descriptor = required_string(record, "descriptor", line);
    if (const auto it = record.find("direction"); it != record.end()) {
      if (!it->is_string()) throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": direction");
      try {
        t.direction = parse_direction(it->get<std::string>());
      } catch (const Error&) {
        throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": unknown direction");
      }
    }
    if (t.target_id.empty()) throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": empty target_id");
    if (trim(t.descriptor).empty()) throw Error(ErrorCode::kEmptyDescriptor, line_tag(line));
    if (!seen.insert(t.target_id).second) {
      throw Error(ErrorCode::kDuplicateId, t.target_id + " (" + line_tag(line) + ")");
    }
    if (!targets.empty() && t.direction != targets.front().direction) {
      throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": direction differs from first record");
    }
    targets.push_back(std::move(t));
  });
  return Corpus(std::move(targets));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus " + path.string());
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& t : corpus.targets()) {
    json record = {{"target_id", t.target_id},
                   {"descriptor", t.descriptor},
                   {"direction", direction_name(t.direction)}};
    out << record.dump() << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  atomic_write(path, out.str());
}

std::vector<Query> parse_queries(std::istream& in, const Corpus& corpus) {
  std::vector<Query> queries;
  std::set<std::string> seen;
  for_each_record(in, [&](const json& record, std::size_t line) {
    Query q;
    q.query_id = required_string(record, "query_id", line);
    q.text = required_string(record, "text", line);
    if (q.query_id.empty()) throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": empty query_id");
    if (trim(q.text).empty()) throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": empty text");
    const auto gt = record.find("gt_targets");
    if (gt == record.end() || !gt->is_array() || gt->empty()) {
      throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": gt_targets must be a nonempty array");
    }
    std::set<std::string> ids;
    for (const auto& id : *gt) {
      if (!id.is_string()) throw Error(ErrorCode::kMalformedRecord, line_tag(line) + ": gt target not a string");
      std::string normalized = nfc_normalize(id.get<std::string>());
      if (!corpus.index_of(normalized)) {
        throw Error(ErrorCode::kUnknownTarget, q.query_id + " -> " + normalized + " (" + line_tag(line) + ")");
      }
      ids.insert(std::move(normalized));
    }
    q.gt_targets.assign(ids.begin(), ids.end());
    if (!seen.insert(q.query_id).second) {
      throw Error(ErrorCode::kDuplicateId, q.query_id + " (" + line_tag(line) + ")");
    }
    queries.push_back(std::move(q));
  });
  return queries;
}

std::vector<Query> load_queries(const std::filesystem::path& path, const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open queries " + path.string());
  return parse_queries(in, corpus);
}

void write_queries(std::ostream& out, const std::vector<Query>& queries) {
  for (const auto& q : queries) {
    json record = {{"query_id", q.query_id}, {"text", q.text}, {"gt_targets", q.gt_targets}};
    out << record.dump() << '\n';
  }
}

void save_queries(const std::filesystem::path& path, const std::vector<Query>& queries) {
  std::ostringstream out;
  write_queries(out, queries);
  atomic_write(path, out.str());
}

void atomic_write(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "rename to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace gencmr
