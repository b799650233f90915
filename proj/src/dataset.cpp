//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molr/dataset.h"

#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "molr/canonical.h"
#include "molr/random.h"

namespace molr {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DatasetError(DatasetErrorKind::kIo,
                       "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const ordered_json &require(const ordered_json &obj, const char *key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw DatasetError(DatasetErrorKind::kMalformedLine,
                       std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const ordered_json &obj, const char *key) {
  const ordered_json &v = require(obj, key);
  if (!v.is_string())
    throw DatasetError(DatasetErrorKind::kMalformedLine,
                       std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

ordered_json parse_object(std::string_view line) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(line);
  } catch (const nlohmann::json::exception &e) {
    throw DatasetError(DatasetErrorKind::kMalformedLine, e.what());
  }
  if (!obj.is_object())
    throw DatasetError(DatasetErrorKind::kMalformedLine,
                       "line is not a JSON object");
  return obj;
}

const std::string &id_of(const RawPair &p) { return p.id; }
const std::string &id_of(const TraceRecord &r) { return r.id; }

RawPair parse_record(std::string_view line, const RawPair *) {
  return raw_pair_from_json(line);
}

TraceRecord parse_record(std::string_view line, const TraceRecord *) {
  return trace_record_from_json(line);
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
  case Provenance::kPrid:
    return "prid";
  case Provenance::kResampled:
    return "resampled";
  case Provenance::kExpert:
    return "expert";
  }
  return "prid";
}

std::optional<Provenance> provenance_from_string(std::string_view s) {
  if (s == "prid")
    return Provenance::kPrid;
  if (s == "resampled")
    return Provenance::kResampled;
  if (s == "expert")
    return Provenance::kExpert;
  return std::nullopt;
}

std::string_view to_string(DatasetErrorKind kind) {
  switch (kind) {
  case DatasetErrorKind::kIo:
    return "Io";
  case DatasetErrorKind::kMalformedLine:
    return "MalformedLine";
  case DatasetErrorKind::kDuplicateId:
    return "DuplicateId";
  case DatasetErrorKind::kValidationFailure:
    return "ValidationFailure";
  case DatasetErrorKind::kSubsetTooLarge:
    return "SubsetTooLarge";
  case DatasetErrorKind::kUnknownId:
    return "UnknownId";
  }
  return "Io";
}

DatasetError::DatasetError(DatasetErrorKind kind, std::string message,
                           std::size_t line, std::string id)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind), line_(line), id_(std::move(id)) { }

std::string to_json_line(const RawPair &pair) {
  ordered_json obj;
  obj["id"] = pair.id;
  obj["caption"] = pair.caption;
  obj["smiles"] = pair.smiles;
  return obj.dump();
}

std::string to_json_line(const TraceRecord &record) {
  ordered_json obj;
  obj["id"] = record.id;
  obj["caption"] = record.caption;
  obj["smiles"] = record.smiles;
  obj["trace"] = record.trace;
  obj["iteration"] = record.iteration;
  obj["provenance"] = std::string(to_string(record.provenance));
  if (record.judge_score)
    obj["judge_score"] = *record.judge_score;
  else
    obj["judge_score"] = nullptr;
  return obj.dump();
}

RawPair raw_pair_from_json(std::string_view line) {
  ordered_json obj = parse_object(line);
  RawPair pair;
  pair.id = require_string(obj, "id");
  pair.caption = require_string(obj, "caption");
  pair.smiles = require_string(obj, "smiles");
  return pair;
}

TraceRecord trace_record_from_json(std::string_view line) {
  ordered_json obj = parse_object(line);
  TraceRecord record;
  record.id = require_string(obj, "id");
  record.caption = require_string(obj, "caption");
  record.smiles = require_string(obj, "smiles");
  record.trace = require_string(obj, "trace");

  const ordered_json &iteration = require(obj, "iteration");
  if (!iteration.is_number_integer())
    throw DatasetError(DatasetErrorKind::kMalformedLine,
                       "field 'iteration' must be an integer");
  record.iteration = iteration.get<int>();

  std::string prov = require_string(obj, "provenance");
  auto parsed = provenance_from_string(prov);
  if (!parsed)
    throw DatasetError(DatasetErrorKind::kMalformedLine,
                       "unknown provenance '" + prov + "'");
  record.provenance = *parsed;

  auto score = obj.find("judge_score");
  if (score != obj.end() && !score->is_null()) {
    if (!score->is_number())
      throw DatasetError(DatasetErrorKind::kMalformedLine,
                         "field 'judge_score' must be a number or null");
    record.judge_score = score->get<double>();
  }
  return record;
}

void validate(const RawPair &pair) {
  if (pair.id.empty())
    throw DatasetError(DatasetErrorKind::kValidationFailure, "empty id");
  if (!is_valid_smiles(pair.smiles))
    throw DatasetError(DatasetErrorKind::kValidationFailure,
                       "invalid smiles for id '" + pair.id + "'", 0, pair.id);
}

void validate(const TraceRecord &record) {
  auto fail = [&](const std::string &what) {
    throw DatasetError(DatasetErrorKind::kValidationFailure,
                       what + " for id '" + record.id + "'", 0, record.id);
  };
  if (record.id.empty())
    throw DatasetError(DatasetErrorKind::kValidationFailure, "empty id");
  if (record.trace.empty())
    fail("empty trace");
  if (record.iteration < 0)
    fail("negative iteration");
  if (record.judge_score
      && !(std::isfinite(*record.judge_score) && *record.judge_score >= 0.0
           && *record.judge_score <= 10.0)) {
    fail("judge_score outside [0, 10]");
  }
  if (!is_valid_smiles(record.smiles))
    fail("invalid smiles");
}

void write_file_atomic(const std::filesystem::path &path,
                       std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw DatasetError(DatasetErrorKind::kIo,
                         "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out)
      throw DatasetError(DatasetErrorKind::kIo,
                         "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DatasetError(DatasetErrorKind::kIo,
                       "cannot replace " + path.string());
  }
}

template <class Record>
JsonlStore<Record>::JsonlStore(std::filesystem::path path)
    : path_(std::move(path)) { }

template <class Record>
JsonlStore<Record>::JsonlStore(JsonlStore &&other) noexcept
    : path_(std::move(other.path_)), records_(std::move(other.records_)),
      index_(std::move(other.index_)) { }

template <class Record>
JsonlStore<Record> &
JsonlStore<Record>::operator=(JsonlStore &&other) noexcept {
  if (this != &other) {
    path_ = std::move(other.path_);
    records_ = std::move(other.records_);
    index_ = std::move(other.index_);
  }
  return *this;
}

template <class Record>
JsonlStore<Record> JsonlStore<Record>::load(const std::filesystem::path &path) {
  JsonlStore store(path);
  std::string content = read_file(path);

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos)
      end = content.size();
    std::string_view line(content.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (line.empty())
      continue;

    Record record;
    try {
      record = parse_record(line, static_cast<const Record *>(nullptr));
      validate(record);
    } catch (const DatasetError &e) {
      throw DatasetError(e.kind(),
                         path.string() + ":" + std::to_string(line_no) + ": "
                             + e.what(),
                         line_no, e.id());
    }
    if (store.index_.count(id_of(record)) != 0) {
      throw DatasetError(DatasetErrorKind::kDuplicateId,
                         path.string() + ":" + std::to_string(line_no)
                             + ": duplicate id '" + id_of(record) + "'",
                         line_no, id_of(record));
    }
    store.index_.emplace(id_of(record), store.records_.size());
    store.records_.push_back(std::move(record));
  }
  return store;
}

template <class Record>
JsonlStore<Record>
JsonlStore<Record>::open_or_create(const std::filesystem::path &path) {
  if (std::filesystem::exists(path))
    return load(path);
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, "");
  return JsonlStore(path);
}

template <class Record>
std::size_t JsonlStore<Record>::append(std::span<const Record> records) {
  std::unique_lock lock(mutex_);

  std::unordered_set<std::string> batch_ids;
  for (const Record &r: records) {
    validate(r);
    if (index_.count(id_of(r)) != 0 || !batch_ids.insert(id_of(r)).second)
      throw DatasetError(DatasetErrorKind::kDuplicateId,
                         "duplicate id '" + id_of(r) + "'", 0, id_of(r));
  }
  if (records.empty())
    return 0;

  std::string content;
  if (std::filesystem::exists(path_)) {
    content = read_file(path_);
    if (!content.empty() && content.back() != '\n')
      content += '\n';
  }
  for (const Record &r: records) {
    content += to_json_line(r);
    content += '\n';
  }
  write_file_atomic(path_, content);

  for (const Record &r: records) {
    index_.emplace(id_of(r), records_.size());
    records_.push_back(r);
  }
  return records.size();
}

template <class Record>
std::vector<Record> JsonlStore<Record>::records() const {
  std::shared_lock lock(mutex_);
  return records_;
}

template <class Record>
std::optional<Record> JsonlStore<Record>::find(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(std::string(id));
  if (it == index_.end())
    return std::nullopt;
  return records_[it->second];
}

template <class Record>
bool JsonlStore<Record>::contains(std::string_view id) const {
  std::shared_lock lock(mutex_);
  return index_.count(std::string(id)) != 0;
}

template <class Record>
std::size_t JsonlStore<Record>::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

template class JsonlStore<RawPair>;
template class JsonlStore<TraceRecord>;

std::vector<RawPair> sample_subset(const RawStore &store, std::size_t m,
                                   std::uint64_t seed) {
  std::vector<RawPair> all = store.records();
  if (m > all.size())
    throw DatasetError(DatasetErrorKind::kSubsetTooLarge,
                       "requested " + std::to_string(m) + " of "
                           + std::to_string(all.size()) + " records");
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = i + rng.uniform_index(all.size() - i);
    std::swap(all[i], all[j]);
  }
  all.resize(m);
  return all;
}

std::vector<RawPair> select_by_ids(const RawStore &store,
                                   std::span<const std::string> ids) {
  std::vector<RawPair> out;
  out.reserve(ids.size());
  for (const std::string &id: ids) {
    auto pair = store.find(id);
    if (!pair)
      throw DatasetError(DatasetErrorKind::kUnknownId,
                         "unknown id '" + id + "'", 0, id);
    out.push_back(std::move(*pair));
  }
  return out;
}

std::vector<std::string> dangling_traces(std::span<const TraceRecord> traces,
                                         const RawStore &raw) {
  std::vector<std::string> bad;
  for (const TraceRecord &t: traces) {
    auto pair = raw.find(t.id);
    if (!pair || !smiles_equal(pair->smiles, t.smiles))
      bad.push_back(t.id);
  }
  return bad;
}

}  // namespace molr
