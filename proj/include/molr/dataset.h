//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_DATASET_H_
#define MOLR_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace molr {

// Caption/SMILES training pair.
struct RawPair {
  std::string id;
  std::string caption;
  std::string smiles;

  bool operator==(const RawPair &) const = default;
};

enum class Provenance { kPrid, kResampled, kExpert };

std::string_view to_string(Provenance p);
std::optional<Provenance> provenance_from_string(std::string_view s);

// Caption, reasoning trace and answer for one pair at a given iteration.
struct TraceRecord {
  std::string id;
  std::string caption;
  std::string smiles;
  std::string trace;
  int iteration = 0;
  Provenance provenance = Provenance::kPrid;
  std::optional<double> judge_score;

  bool operator==(const TraceRecord &) const = default;
};

enum class DatasetErrorKind {
  kIo,
  kMalformedLine,
  kDuplicateId,
  kValidationFailure,
  kSubsetTooLarge,
  kUnknownId,
};

std::string_view to_string(DatasetErrorKind kind);

class DatasetError: public std::runtime_error {
public:
  DatasetError(DatasetErrorKind kind, std::string message, std::size_t line = 0,
               std::string id = {});

  DatasetErrorKind kind() const { return kind_; }
  // 1-based line number for kMalformedLine and load-time validation errors,
  // 0 otherwise.
  std::size_t line() const { return line_; }
  const std::string &id() const { return id_; }

private:
  DatasetErrorKind kind_;
  std::size_t line_;
  std::string id_;
};

// Single-line JSON encodings with fields in declaration order.
std::string to_json_line(const RawPair &pair);
std::string to_json_line(const TraceRecord &record);

// Parse one line. Throws DatasetError (kMalformedLine without a line number,
// or kValidationFailure).
RawPair raw_pair_from_json(std::string_view line);
TraceRecord trace_record_from_json(std::string_view line);

// Throws DatasetError(kValidationFailure) naming the id.
void validate(const RawPair &pair);
void validate(const TraceRecord &record);

// JSON Lines file of records keyed by id. Any number of threads may read
// concurrently; append takes an exclusive lock. Appends are all-or-nothing:
// the batch is validated first, then the new file content is written to a
// temporary sibling and renamed over the original.
template <class Record>
class JsonlStore {
public:
  // Reads an existing file. Throws DatasetError.
  static JsonlStore load(const std::filesystem::path &path);
  // Opens the file if it exists, otherwise creates an empty one.
  static JsonlStore open_or_create(const std::filesystem::path &path);

  JsonlStore(JsonlStore &&other) noexcept;
  JsonlStore &operator=(JsonlStore &&other) noexcept;

  // Returns the number of records appended.
  std::size_t append(std::span<const Record> records);

  std::vector<Record> records() const;
  std::optional<Record> find(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::size_t size() const;
  const std::filesystem::path &path() const { return path_; }

private:
  explicit JsonlStore(std::filesystem::path path);

  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::vector<Record> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

using RawStore = JsonlStore<RawPair>;
using TraceStore = JsonlStore<TraceRecord>;

// Writes a whole file atomically (temporary sibling + rename).
void write_file_atomic(const std::filesystem::path &path,
                       std::string_view content);

// Uniform sample without replacement by a partial Fisher-Yates shuffle.
// Throws DatasetError(kSubsetTooLarge) when m exceeds the store size.
std::vector<RawPair> sample_subset(const RawStore &store, std::size_t m,
                                   std::uint64_t seed);

// Explicit selection for replicating a published split. Throws
// DatasetError(kUnknownId).
std::vector<RawPair> select_by_ids(const RawStore &store,
                                   std::span<const std::string> ids);

// Ids of traces that do not reference a pair in raw with a canonically
// equal SMILES.
std::vector<std::string> dangling_traces(std::span<const TraceRecord> traces,
                                         const RawStore &raw);

}  // namespace molr

#endif  // MOLR_DATASET_H_
