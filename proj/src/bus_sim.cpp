#include "canids/bus_sim.hpp"

#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace canids {

std::uint64_t SimulationResult::attempts(const std::string& source) const {
  auto it = per_source.find(source);
  return it == per_source.end() ? 0 : it->second.attempts;
}

std::uint64_t SimulationResult::wins(const std::string& source) const {
  auto it = per_source.find(source);
  return it == per_source.end() ? 0 : it->second.wins;
}

namespace {

struct Pending {
  std::uint16_t id;
  std::uint64_t arrival_ns;
  const std::string* source;
  std::size_t seq;

  bool operator<(const Pending& o) const {
    return std::tie(id, arrival_ns, *source, seq) < std::tie(o.id, o.arrival_ns, *o.source, o.seq);
  }
};

}  // namespace

SimulationResult run_bus(const RequestStream& offered, std::uint32_t baud_rate, const BusOptions& options) {
  if (baud_rate == 0) throw Error("baud_rate must be positive");
  for (std::size_t i = 1; i < offered.size(); ++i)
    if (offered[i].frame.timestamp_us < offered[i - 1].frame.timestamp_us)
      throw Error("offered requests are not time-ordered at index " + std::to_string(i));

  const double bit_ns = 1e9 / baud_rate;
  const auto bits_ns = [bit_ns](int bits) { return static_cast<std::uint64_t>(std::llround(bits * bit_ns)); };
  const std::uint64_t horizon_ns =
      options.horizon_us ? *options.horizon_us * 1000 : std::numeric_limits<std::uint64_t>::max();

  SimulationResult result;
  // Per-source pending counts let every round charge one attempt per queued
  // frame without walking the whole queue.
  std::vector<std::string> names;
  std::vector<std::size_t> source_of(offered.size());
  {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < offered.size(); ++i) {
      auto [it, fresh] = index.try_emplace(offered[i].frame.source, names.size());
      if (fresh) names.push_back(offered[i].frame.source);
      source_of[i] = it->second;
    }
  }
  std::vector<SourceCounters> counters(names.size());
  std::vector<std::uint64_t> queued(names.size(), 0);

  std::set<Pending> pending;
  std::vector<Pending> one_shot;  // one-shot frames currently queued
  std::size_t next = 0;
  std::uint64_t now = 0;  // ns; earliest time the bus can start a frame

  while (true) {
    if (pending.empty()) {
      if (next == offered.size()) break;
      now = std::max(now, offered[next].frame.timestamp_us * 1000);
    }
    while (next < offered.size() && offered[next].frame.timestamp_us * 1000 <= now) {
      const Pending p{offered[next].frame.id.value(), offered[next].frame.timestamp_us * 1000,
                      &offered[next].frame.source, next};
      pending.insert(p);
      if (offered[next].one_shot) one_shot.push_back(p);
      ++queued[source_of[next]];
      ++next;
    }
    if (now >= horizon_ns) break;

    const Pending winner = *pending.begin();
    const std::uint64_t now_us = now / 1000;
    ContentionRound round{now_us, CanId(winner.id), std::nullopt, static_cast<std::uint32_t>(pending.size())};
    if (pending.size() > 1) {
      const Pending& runner_up = *std::next(pending.begin());
      round.lowest_loser = CanId(runner_up.id);
      if (runner_up.id == winner.id) ++result.same_id_collisions;
    }
    for (std::size_t k = 0; k < names.size(); ++k) counters[k].attempts += queued[k];

    if (options.record_events)
      for (auto it = std::next(pending.begin()); it != pending.end(); ++it) {
        const TxRequest& lost = offered[it->seq];
        BusEvent ev{BusEventKind::ArbitrationLost, now_us, lost.frame, lost.malicious};
        ev.frame.timestamp_us = now_us;
        result.events.push_back(std::move(ev));
      }
    for (const Pending& p : one_shot) {
      if (p.seq == winner.seq) continue;
      pending.erase(p);
      --queued[source_of[p.seq]];
      ++counters[source_of[p.seq]].dropped;
    }
    one_shot.clear();
    pending.erase(pending.begin());
    --queued[source_of[winner.seq]];

    const TxRequest& req = offered[winner.seq];
    ++counters[source_of[winner.seq]].wins;
    CanFrame sent = req.frame;
    sent.timestamp_us = now_us;
    if (options.record_events) result.events.push_back(BusEvent{BusEventKind::Transmitted, now_us, sent, req.malicious});
    if (options.record_rounds) result.rounds.push_back(round);
    result.bus_log.push_back(std::move(sent));
    result.malicious.push_back(req.malicious);

    now += bits_ns(frame_bit_length(req.frame) + kIntermissionBits);
  }
  for (std::size_t k = 0; k < names.size(); ++k) result.per_source[names[k]] = counters[k];
  result.pending_at_end = pending.size() + (offered.size() - next);
  return result;
}

double injection_rate(const SimulationResult& result, const std::string& source) {
  auto it = result.per_source.find(source);
  if (it == result.per_source.end() || it->second.attempts == 0)
    throw Error("no attempts by source '" + source + "'");
  return static_cast<double>(it->second.wins) / static_cast<double>(it->second.attempts);
}

nlohmann::json source_stats_json(const SimulationResult& result) {
  nlohmann::json sources = nlohmann::json::object();
  for (const auto& [name, c] : result.per_source)
    sources[name] = {{"attempts", c.attempts}, {"wins", c.wins}, {"dropped", c.dropped}};
  return {{"sources", sources},
          {"transmitted", result.bus_log.size()},
          {"same_id_collisions", result.same_id_collisions},
          {"pending_at_end", result.pending_at_end}};
}

}  // namespace canids
