// Copyright 2026 The Tiernet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The demand store: the single mediator for demand migration between tiers.
// Deposits are memoized by signature, grabs are exclusive, and a tier that
// goes out of service has its processing demands put back to pending.

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tiernet/demand.h"

namespace tiernet {

enum class HistoryEvent : std::uint8_t { kDeposit = 0, kGrab = 1, kComplete = 2, kRequeue = 3 };
std::string_view HistoryEventName(HistoryEvent event);

struct HistoryRecord {
  HistoryEvent event = HistoryEvent::kDeposit;
  std::int64_t at_ms = 0;
  TierId actor;
  bool operator==(const HistoryRecord &) const = default;
};

struct StoreEntry {
  Demand demand;
  std::vector<HistoryRecord> history;
};

// Which pending demands a grab may select.
struct GrabFilter {
  std::uint8_t kind_mask = 0;
  std::optional<std::string> identifier;
  std::optional<ContextEntry> context;

  static GrabFilter Kinds(std::initializer_list<DemandKind> kinds);
  GrabFilter &WithIdentifier(std::string id);
  GrabFilter &WithContext(std::string dimension, std::int64_t tag);

  bool Admits(DemandKind kind) const {
    return (kind_mask >> static_cast<unsigned>(kind)) & 1u;
  }
  bool Matches(const Demand &demand) const;
};

enum class DepositOutcome : std::uint8_t { kAccepted = 0, kAlreadyComputed = 1 };

struct DepositReply {
  DepositOutcome outcome = DepositOutcome::kAccepted;
  Bytes result;
};

struct StoreStats {
  // counts[state][kind]
  std::array<std::array<std::uint64_t, 3>, 3> counts{};
  std::uint64_t total_deposits = 0;
  std::uint64_t cache_hits = 0;

  std::uint64_t Count(StateTag state) const;
  std::uint64_t Count(StateTag state, DemandKind kind) const {
    return counts[static_cast<int>(state)][static_cast<int>(kind)];
  }
  std::uint64_t Entries() const;

  bool operator==(const StoreStats &) const = default;
};

class DemandStore {
 public:
  struct Options {
    // Append-only journal of history events, replayed on construction.
    std::optional<std::filesystem::path> journal;
  };

  DemandStore();
  explicit DemandStore(Options options);
  ~DemandStore();

  DemandStore(const DemandStore &) = delete;
  DemandStore &operator=(const DemandStore &) = delete;

  // A tier must be attached before it may grab; attachments are counted.
  void Attach(TierId tier);
  void Detach(TierId tier);
  bool IsAttached(TierId tier) const;

  // Throws Error(kProtocol) unless the demand is Pending.
  DepositReply Deposit(const Demand &demand);

  // Oldest matching pending demand (by deposit time, then signature hash),
  // now Processing with holder == tier. Throws Error(kProtocol) for an
  // unattached tier.
  std::optional<Demand> Grab(TierId tier, const GrabFilter &filter);

  // Throws Error(kNotFound) for an unknown signature and Error(kOwnership)
  // unless the entry is Processing and held by tier.
  void ReturnResult(TierId tier, const DemandSignature &signature, Bytes result);

  std::size_t RequeueTier(TierId tier);

  std::optional<Bytes> Lookup(const DemandSignature &signature) const;
  std::optional<StoreEntry> Get(const DemandSignature &signature) const;
  std::vector<Demand> Demands() const;
  StoreStats Stats() const;

 private:
  using PendingKey = std::tuple<std::int64_t, std::uint64_t, std::uint64_t>;

  struct Slot {
    StoreEntry entry;
    PendingKey order;
  };

  void Replay(const std::filesystem::path &path);
  void Record(Slot &slot, HistoryEvent event, std::int64_t at_ms, TierId actor);

  mutable std::mutex mu_;
  std::unordered_map<DemandSignature, Slot, SignatureHash> entries_;
  std::map<PendingKey, DemandSignature> pending_;
  std::map<TierId, int> attached_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t total_deposits_ = 0;
  std::uint64_t cache_hits_ = 0;
  std::FILE *journal_ = nullptr;
};

}  // namespace tiernet
