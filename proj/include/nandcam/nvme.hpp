/*
 * Copyright 2026 The nandcam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file nvme.hpp
 * @brief Structural command set and controller front end over the search manager.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nandcam/ftl.hpp"

namespace nandcam {

inline constexpr std::size_t kSimpleSearchMaxKeyBits = 127;

struct ContinuationToken {
  RegionId region = 0;
  std::uint64_t next_ordinal = 0;
  std::uint64_t version = 0;
  friend bool operator==(const ContinuationToken&, const ContinuationToken&) = default;
};

struct AllocateCmd {
  std::uint32_t element_bits = 0;
  std::uint32_t entry_bytes = 0;
  std::uint64_t element_count = 0;
  std::vector<TernaryValue> elements;
  std::vector<Entry> entries;
  bool numeric_entries = false;
};
struct DeallocateCmd {
  RegionId region = 0;
};
struct AppendCmd {
  RegionId region = 0;
  std::vector<TernaryValue> elements;
  std::vector<Entry> entries;
};
/// Key carried inline in the command.
struct SimpleSearchCmd {
  RegionId region = 0;
  SearchKey key;
  std::uint64_t buffer_entries = 0;
};
/// Key (or sub-keys) carried through a data pointer.
struct SearchCmd {
  RegionId region = 0;
  std::vector<SearchKey> keys;
  Reduction reduction = Reduction::Single;
  std::uint64_t buffer_entries = 0;
};
struct SearchContinueCmd {
  RegionId region = 0;
  ContinuationToken token;
  std::uint64_t buffer_entries = 0;
};
struct DeleteCmd {
  RegionId region = 0;
  SearchKey key;
};
struct AssocUpdateCmd {
  RegionId region = 0;
  SearchKey key;
  UpdateOp op = UpdateOp::Add;
  std::int64_t immediate = 0;
};

using Command = std::variant<AllocateCmd, DeallocateCmd, AppendCmd, SimpleSearchCmd, SearchCmd,
                             SearchContinueCmd, DeleteCmd, AssocUpdateCmd>;

enum class Status : std::uint8_t {
  Success,
  MalformedCommand,
  UnknownRegion,
  StaleContinuation,
  CapacityExhausted,
  WidthMismatch,
  KeyTooWide,
  NonNumericEntries,
  InternalError,
};
std::string_view status_name(Status s) noexcept;

struct CompletionEntry {
  Status status = Status::Success;
  std::string message;
  RegionId region = 0;
  std::uint64_t returned_entry_count = 0;
  bool buffer_exceeded = false;
  std::optional<ContinuationToken> continuation;
  std::vector<std::uint64_t> ordinals;
  std::vector<Entry> entries;  // host buffer contents
  std::uint64_t affected = 0;  // delete / update counts
  LatencyReport latency;
  MovementCounters movement;

  bool ok() const noexcept { return status == Status::Success; }
};

class Controller {
 public:
  explicit Controller(SsdConfig cfg);

  CompletionEntry submit(const Command& cmd);

  SearchManager& ftl() noexcept { return ftl_; }
  const SearchManager& ftl() const noexcept { return ftl_; }
  std::uint64_t submitted() const noexcept { return submitted_; }

 private:
  CompletionEntry dispatch(const Command& cmd);
  CompletionEntry run_search(RegionId region, const SearchRequest& req,
                             std::uint64_t capacity);
  void fill_page(CompletionEntry& ce, RegionId region, SearchResult&& r,
                 std::vector<std::uint64_t>&& remaining);

  struct Pending {
    std::vector<std::uint64_t> ordinals;
    std::size_t position = 0;
    std::uint64_t version = 0;
  };

  SearchManager ftl_;
  std::map<RegionId, Pending> pending_;
  std::uint64_t submitted_ = 0;
};

/// Loops SimpleSearch / Search plus SearchContinue until the buffer flag clears.
std::vector<Entry> tcam_search(Controller& ctl, RegionId region, const SearchKey& key,
                               std::uint64_t buffer_entries, std::uint64_t* submits = nullptr);
/// Associative-update wrapper; fails if the operation moved any payload to the host.
std::uint64_t tcam_update(Controller& ctl, RegionId region, const SearchKey& key, UpdateOp op,
                          std::int64_t immediate);

}  // namespace nandcam
