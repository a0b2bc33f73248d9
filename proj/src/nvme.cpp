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

#include "nandcam/nvme.hpp"

#include <stdexcept>

#include "nandcam/error.hpp"

namespace nandcam {

namespace {

Status status_of(Errc code) {
  switch (code) {
    case Errc::UnknownRegion: return Status::UnknownRegion;
    case Errc::StaleContinuation: return Status::StaleContinuation;
    case Errc::CapacityExhausted: return Status::CapacityExhausted;
    case Errc::WidthMismatch: return Status::WidthMismatch;
    case Errc::KeyTooWide:
    case Errc::KeyTooLong: return Status::KeyTooWide;
    case Errc::NonNumericEntries: return Status::NonNumericEntries;
    case Errc::MalformedCommand:
    case Errc::InvalidArgument:
    case Errc::DontCareStored:
    case Errc::ElementWiderThanSupported: return Status::MalformedCommand;
    default: return Status::InternalError;
  }
}

Errc errc_of(Status s) {
  switch (s) {
    case Status::UnknownRegion: return Errc::UnknownRegion;
    case Status::StaleContinuation: return Errc::StaleContinuation;
    case Status::CapacityExhausted: return Errc::CapacityExhausted;
    case Status::WidthMismatch: return Errc::WidthMismatch;
    case Status::KeyTooWide: return Errc::KeyTooWide;
    case Status::NonNumericEntries: return Errc::NonNumericEntries;
    default: return Errc::MalformedCommand;
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view status_name(Status s) noexcept {
  switch (s) {
    case Status::Success: return "Success";
    case Status::MalformedCommand: return "MalformedCommand";
    case Status::UnknownRegion: return "UnknownRegion";
    case Status::StaleContinuation: return "StaleContinuation";
    case Status::CapacityExhausted: return "CapacityExhausted";
    case Status::WidthMismatch: return "WidthMismatch";
    case Status::KeyTooWide: return "KeyTooWide";
    case Status::NonNumericEntries: return "NonNumericEntries";
    case Status::InternalError: return "InternalError";
  }
  return "Unknown";
}

Controller::Controller(SsdConfig cfg) : ftl_(std::move(cfg)) {}

CompletionEntry Controller::submit(const Command& cmd) {
  ++submitted_;
  CompletionEntry ce;
  try {
    ce = dispatch(cmd);
  } catch (const Error& e) {
    ce = CompletionEntry{};
    ce.status = status_of(e.code());
    ce.message = e.what();
  }
  const Micros init = ftl_.config().t_nvme_init;
  ce.latency.total += init;
  ce.latency[Component::Nvme] += init;
  return ce;
}

void Controller::fill_page(CompletionEntry& ce, RegionId region, SearchResult&& r,
                           std::vector<std::uint64_t>&& remaining) {
  ce.region = region;
  ce.returned_entry_count = r.ordinals.size();
  ce.ordinals = std::move(r.ordinals);
  ce.entries = std::move(r.entries);
  ce.latency = r.latency;
  ce.movement = r.movement;
  if (remaining.empty()) {
    pending_.erase(region);
    return;
  }
  ce.buffer_exceeded = true;
  const std::uint64_t version = ftl_.version(region);
  ce.continuation = ContinuationToken{region, remaining.front(), version};
  pending_[region] = Pending{std::move(remaining), 0, version};
}

CompletionEntry Controller::run_search(RegionId region, const SearchRequest& req,
                                       std::uint64_t capacity) {
  if (capacity == 0) throw Error(Errc::MalformedCommand, "host buffer holds no entries");
  SearchRequest r = req;
  r.max_results = capacity;
  SearchResult res = ftl_.execute_search(region, r);
  CompletionEntry ce;
  std::vector<std::uint64_t> remaining = std::move(res.remaining);
  fill_page(ce, region, std::move(res), std::move(remaining));
  return ce;
}

CompletionEntry Controller::dispatch(const Command& cmd) {
  return std::visit(
      Overloaded{
          [&](const AllocateCmd& c) {
            CompletionEntry ce;
            RegionOptions opt;
            opt.numeric_entries = c.numeric_entries;
            const MovementCounters before = ftl_.counters();
            ce.region = ftl_.allocate_region(c.element_bits, c.entry_bytes, c.element_count,
                                             c.elements, c.entries, opt, &ce.latency);
            ce.movement = ftl_.counters() - before;
            return ce;
          },
          [&](const DeallocateCmd& c) {
            ftl_.deallocate_region(c.region);
            pending_.erase(c.region);
            CompletionEntry ce;
            ce.region = c.region;
            return ce;
          },
          [&](const AppendCmd& c) {
            MutationResult m = ftl_.append(c.region, c.elements, c.entries);
            CompletionEntry ce;
            ce.region = c.region;
            ce.affected = m.count;
            ce.latency = m.latency;
            ce.movement = m.movement;
            return ce;
          },
          [&](const SimpleSearchCmd& c) {
            if (c.key.empty() || c.key.size() > kSimpleSearchMaxKeyBits) {
              throw Error(Errc::MalformedCommand,
                          "inline keys hold 1.." + std::to_string(kSimpleSearchMaxKeyBits) +
                              " bits, got " + std::to_string(c.key.size()));
            }
            SearchRequest req;
            req.keys = {c.key};
            return run_search(c.region, req, c.buffer_entries);
          },
          [&](const SearchCmd& c) {
            if (c.keys.empty()) throw Error(Errc::MalformedCommand, "search without a key");
            SearchRequest req;
            req.keys = c.keys;
            req.reduction = c.reduction;
            return run_search(c.region, req, c.buffer_entries);
          },
          [&](const SearchContinueCmd& c) {
            if (c.buffer_entries == 0) {
              throw Error(Errc::MalformedCommand, "host buffer holds no entries");
            }
            if (c.token.region != c.region) {
              throw Error(Errc::MalformedCommand, "token belongs to another region");
            }
            const std::uint64_t version = ftl_.version(c.region);
            auto it = pending_.find(c.region);
            if (it == pending_.end()) {
              throw Error(Errc::MalformedCommand, "no search pending on this region");
            }
            if (c.token.version != version || it->second.version != version) {
              pending_.erase(it);
              throw Error(Errc::StaleContinuation, "region changed since the search");
            }
            Pending& p = it->second;
            if (p.position >= p.ordinals.size() ||
                p.ordinals[p.position] != c.token.next_ordinal) {
              throw Error(Errc::StaleContinuation, "token does not match the pending position");
            }
            const std::size_t n = static_cast<std::size_t>(
                std::min<std::uint64_t>(c.buffer_entries, p.ordinals.size() - p.position));
            std::vector<std::uint64_t> page(p.ordinals.begin() + p.position,
                                            p.ordinals.begin() + p.position + n);
            std::vector<std::uint64_t> rest(p.ordinals.begin() + p.position + n,
                                            p.ordinals.end());
            SearchResult r = ftl_.fetch(c.region, page);
            CompletionEntry ce;
            fill_page(ce, c.region, std::move(r), std::move(rest));
            return ce;
          },
          [&](const DeleteCmd& c) {
            MutationResult m = ftl_.delete_matching(c.region, c.key);
            pending_.erase(c.region);
            CompletionEntry ce;
            ce.region = c.region;
            ce.affected = m.count;
            ce.latency = m.latency;
            ce.movement = m.movement;
            return ce;
          },
          [&](const AssocUpdateCmd& c) {
            MutationResult m = ftl_.associative_update(c.region, c.key, c.op, c.immediate);
            CompletionEntry ce;
            ce.region = c.region;
            ce.affected = m.count;
            ce.latency = m.latency;
            ce.movement = m.movement;
            return ce;
          },
      },
      cmd);
}

std::vector<Entry> tcam_search(Controller& ctl, RegionId region, const SearchKey& key,
                               std::uint64_t buffer_entries, std::uint64_t* submits) {
  std::vector<Entry> out;
  std::uint64_t n = 0;
  CompletionEntry ce;
  if (key.size() <= kSimpleSearchMaxKeyBits) {
    ce = ctl.submit(SimpleSearchCmd{region, key, buffer_entries});
  } else {
    ce = ctl.submit(SearchCmd{region, {key}, Reduction::Single, buffer_entries});
  }
  ++n;
  while (true) {
    if (!ce.ok()) throw Error(errc_of(ce.status), ce.message);
    for (auto& e : ce.entries) out.push_back(std::move(e));
    if (!ce.buffer_exceeded) break;
    ce = ctl.submit(SearchContinueCmd{region, *ce.continuation, buffer_entries});
    ++n;
  }
  if (submits) *submits = n;
  return out;
}

std::uint64_t tcam_update(Controller& ctl, RegionId region, const SearchKey& key, UpdateOp op,
                          std::int64_t immediate) {
  const CompletionEntry ce = ctl.submit(AssocUpdateCmd{region, key, op, immediate});
  if (!ce.ok()) throw Error(errc_of(ce.status), ce.message);
  if (ce.movement.cpu_fe_bytes != 0) {
    throw std::logic_error("associative update moved payload to the host");
  }
  return ce.affected;
}

}  // namespace nandcam
