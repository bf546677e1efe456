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

#include "tiernet/demand_store.h"

#include <fstream>
#include <iterator>

#include "tiernet/error.h"

namespace tiernet {

std::string_view HistoryEventName(HistoryEvent event) {
  switch (event) {
    case HistoryEvent::kDeposit: return "deposit";
    case HistoryEvent::kGrab: return "grab";
    case HistoryEvent::kComplete: return "complete";
    case HistoryEvent::kRequeue: return "requeue";
  }
  return "?";
}

GrabFilter GrabFilter::Kinds(std::initializer_list<DemandKind> kinds) {
  GrabFilter f;
  for (auto k : kinds) f.kind_mask |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
  return f;
}

GrabFilter &GrabFilter::WithIdentifier(std::string id) {
  identifier = std::move(id);
  return *this;
}

GrabFilter &GrabFilter::WithContext(std::string dimension, std::int64_t tag) {
  context = ContextEntry{std::move(dimension), tag};
  return *this;
}

bool GrabFilter::Matches(const Demand &demand) const {
  if (!Admits(demand.kind())) return false;
  if (identifier && demand.signature().identifier != *identifier) return false;
  if (context) {
    auto tag = demand.signature().context.Get(context->first);
    if (!tag || *tag != context->second) return false;
  }
  return true;
}

std::uint64_t StoreStats::Count(StateTag state) const {
  std::uint64_t n = 0;
  for (auto c : counts[static_cast<int>(state)]) n += c;
  return n;
}

std::uint64_t StoreStats::Entries() const {
  return Count(StateTag::kPending) + Count(StateTag::kProcessing) +
         Count(StateTag::kComputed);
}

DemandStore::DemandStore() : DemandStore(Options{}) {}

DemandStore::DemandStore(Options options) {
  if (!options.journal) return;
  if (std::filesystem::exists(*options.journal)) Replay(*options.journal);
  journal_ = std::fopen(options.journal->c_str(), "ab");
  if (!journal_) {
    throw Error(ErrorCode::kStartup, "cannot open journal " + options.journal->string());
  }
  // Holders from a previous run are gone; their demands go back to pending.
  std::vector<std::pair<DemandSignature, TierId>> held;
  for (const auto &[sig, slot] : entries_) {
    if (auto holder = slot.entry.demand.holder()) held.emplace_back(sig, *holder);
  }
  for (const auto &[sig, holder] : held) {
    auto &slot = entries_.at(sig);
    slot.entry.demand = Transition(slot.entry.demand, RequeueEvent{});
    pending_.emplace(slot.order, sig);
    Record(slot, HistoryEvent::kRequeue, NowMs(), holder);
  }
}

DemandStore::~DemandStore() {
  if (journal_) std::fclose(journal_);
}

void DemandStore::Attach(TierId tier) {
  std::lock_guard lock(mu_);
  ++attached_[tier];
}

void DemandStore::Detach(TierId tier) {
  std::lock_guard lock(mu_);
  auto it = attached_.find(tier);
  if (it != attached_.end() && --it->second <= 0) attached_.erase(it);
}

bool DemandStore::IsAttached(TierId tier) const {
  std::lock_guard lock(mu_);
  return attached_.contains(tier);
}

void DemandStore::Record(Slot &slot, HistoryEvent event, std::int64_t at_ms, TierId actor) {
  HistoryRecord record{event, at_ms, actor};
  slot.entry.history.push_back(record);
  if (!journal_) return;
  ByteWriter body;
  body.U8(static_cast<std::uint8_t>(event));
  body.I64(at_ms);
  WriteTierId(body, actor);
  if (event == HistoryEvent::kDeposit) {
    WriteDemand(body, slot.entry.demand);
  } else {
    WriteSignature(body, slot.entry.demand.signature());
    if (event == HistoryEvent::kComplete) body.Blob(*slot.entry.demand.result());
  }
  ByteWriter frame;
  frame.U32(static_cast<std::uint32_t>(body.bytes().size()));
  frame.Raw(body.bytes());
  std::fwrite(frame.bytes().data(), 1, frame.bytes().size(), journal_);
  std::fflush(journal_);
}

void DemandStore::Replay(const std::filesystem::path &path) {
  std::ifstream file(path, std::ios::binary);
  Bytes data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  ByteReader in(data);
  while (in.remaining() >= 4) {
    auto len = in.U32();
    if (in.remaining() < len) break;  // torn tail from an interrupted write
    ByteReader rec(in.Raw(len));
    auto event = static_cast<HistoryEvent>(rec.U8());
    auto at_ms = rec.I64();
    auto actor = ReadTierId(rec);
    if (event == HistoryEvent::kDeposit) {
      auto demand = ReadDemand(rec);
      PendingKey order{at_ms, demand.signature().Hash(), next_seq_++};
      auto sig = demand.signature();
      auto [it, inserted] = entries_.emplace(sig, Slot{StoreEntry{std::move(demand), {}}, order});
      if (!inserted) continue;
      it->second.entry.history.push_back({event, at_ms, actor});
      pending_.emplace(order, sig);
      continue;
    }
    auto sig = ReadSignature(rec);
    auto it = entries_.find(sig);
    if (it == entries_.end()) {
      throw Error(ErrorCode::kParse, "journal references unknown demand " + sig.ToString());
    }
    auto &slot = it->second;
    switch (event) {
      case HistoryEvent::kGrab:
        slot.entry.demand = Transition(slot.entry.demand, GrabEvent{actor, at_ms});
        pending_.erase(slot.order);
        break;
      case HistoryEvent::kComplete:
        slot.entry.demand = Transition(slot.entry.demand, CompleteEvent{rec.Blob()});
        break;
      case HistoryEvent::kRequeue:
        slot.entry.demand = Transition(slot.entry.demand, RequeueEvent{});
        pending_.emplace(slot.order, sig);
        break;
      default:
        throw Error(ErrorCode::kParse, "invalid journal event");
    }
    slot.entry.history.push_back({event, at_ms, actor});
  }
}

DepositReply DemandStore::Deposit(const Demand &demand) {
  if (demand.tag() != StateTag::kPending) {
    throw Error(ErrorCode::kProtocol, "deposit of non-pending demand " +
                                          demand.signature().ToString() + " (" +
                                          std::string(StateName(demand.tag())) + ")");
  }
  std::lock_guard lock(mu_);
  ++total_deposits_;
  auto it = entries_.find(demand.signature());
  if (it != entries_.end()) {
    if (const auto *result = it->second.entry.demand.result()) {
      ++cache_hits_;
      return DepositReply{DepositOutcome::kAlreadyComputed, *result};
    }
    // Pending or in flight: the existing entry is authoritative.
    return DepositReply{};
  }
  auto now = NowMs();
  PendingKey order{now, demand.signature().Hash(), next_seq_++};
  auto [slot, inserted] =
      entries_.emplace(demand.signature(), Slot{StoreEntry{demand, {}}, order});
  pending_.emplace(order, demand.signature());
  Record(slot->second, HistoryEvent::kDeposit, now, demand.issued_by());
  return DepositReply{};
}

std::optional<Demand> DemandStore::Grab(TierId tier, const GrabFilter &filter) {
  std::lock_guard lock(mu_);
  if (!attached_.contains(tier)) {
    throw Error(ErrorCode::kProtocol, "tier " + tier.ToString() + " is not connected");
  }
  for (auto it = pending_.begin(); it != pending_.end(); ++it) {
    auto &slot = entries_.at(it->second);
    if (!filter.Matches(slot.entry.demand)) continue;
    auto now = NowMs();
    slot.entry.demand = Transition(slot.entry.demand, GrabEvent{tier, now});
    pending_.erase(it);
    Record(slot, HistoryEvent::kGrab, now, tier);
    return slot.entry.demand;
  }
  return std::nullopt;
}

void DemandStore::ReturnResult(TierId tier, const DemandSignature &signature, Bytes result) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(signature);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kNotFound, "no demand " + signature.ToString());
  }
  auto &slot = it->second;
  auto holder = slot.entry.demand.holder();
  if (!holder || *holder != tier) {
    throw Error(ErrorCode::kOwnership,
                "demand " + signature.ToString() + " is " +
                    std::string(StateName(slot.entry.demand.tag())) +
                    (holder ? " held by " + holder->ToString() : std::string()) +
                    ", not held by " + tier.ToString());
  }
  slot.entry.demand = Transition(slot.entry.demand, CompleteEvent{std::move(result)});
  Record(slot, HistoryEvent::kComplete, NowMs(), tier);
}

std::size_t DemandStore::RequeueTier(TierId tier) {
  std::lock_guard lock(mu_);
  std::size_t count = 0;
  auto now = NowMs();
  for (auto &[sig, slot] : entries_) {
    auto holder = slot.entry.demand.holder();
    if (!holder || *holder != tier) continue;
    slot.entry.demand = Transition(slot.entry.demand, RequeueEvent{});
    pending_.emplace(slot.order, sig);
    Record(slot, HistoryEvent::kRequeue, now, tier);
    ++count;
  }
  return count;
}

std::optional<Bytes> DemandStore::Lookup(const DemandSignature &signature) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(signature);
  if (it == entries_.end()) return std::nullopt;
  if (const auto *result = it->second.entry.demand.result()) return *result;
  return std::nullopt;
}

std::optional<StoreEntry> DemandStore::Get(const DemandSignature &signature) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(signature);
  if (it == entries_.end()) return std::nullopt;
  return it->second.entry;
}

std::vector<Demand> DemandStore::Demands() const {
  std::lock_guard lock(mu_);
  std::vector<Demand> out;
  out.reserve(entries_.size());
  for (const auto &[sig, slot] : entries_) out.push_back(slot.entry.demand);
  return out;
}

StoreStats DemandStore::Stats() const {
  std::lock_guard lock(mu_);
  StoreStats stats;
  for (const auto &[sig, slot] : entries_) {
    const auto &d = slot.entry.demand;
    ++stats.counts[static_cast<int>(d.tag())][static_cast<int>(d.kind())];
  }
  stats.total_deposits = total_deposits_;
  stats.cache_hits = cache_hits_;
  return stats;
}

}  // namespace tiernet
