#include "csc/session_store.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "csc/error.hpp"

namespace csc {

using nlohmann::json;

namespace {

std::filesystem::path events_path(const std::filesystem::path& dir) { return dir / "events.jsonl"; }
std::filesystem::path snapshot_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / "snapshots" / (id + ".json");
}

}  // namespace

SessionStore::SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_ / "snapshots");
  load();
}

void SessionStore::load() {
  std::map<std::string, Session> rebuilt;
  for (const auto& f : std::filesystem::directory_iterator(dir_ / "snapshots")) {
    if (f.path().extension() != ".json") continue;
    std::ifstream in(f.path());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      auto s = json::parse(ss.str()).get<Session>();
      rebuilt.emplace(s.id, std::move(s));
    } catch (const std::exception& e) {
      std::cerr << "warning: ignoring unreadable snapshot " << f.path() << ": " << e.what() << "\n";
    }
  }

  std::ifstream in(events_path(dir_));
  std::map<std::string, std::size_t> seen;  // events consumed per session
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      // A torn final line from an interrupted write is skipped; anything
      // else means the log is damaged.
      if (in.peek() == EOF) {
        std::cerr << "warning: ignoring incomplete last event record\n";
        break;
      }
      throw Error(ErrorCode::format_error, "event log line " + std::to_string(n) + " is not JSON");
    }
    ++logged_;
    const auto id = rec.at("session_id").get<std::string>();
    const auto index = seen[id]++;
    auto& s = rebuilt[id];
    if (index < s.events.size()) continue;  // already covered by a snapshot
    apply_event(s, rec.get<Event>());
  }

  for (auto& [id, s] : rebuilt) {
    auto e = std::make_shared<Entry>();
    e->session = std::move(s);
    sessions_.emplace(id, std::move(e));
  }
}

void SessionStore::add(Session session) {
  auto entry = std::make_shared<Entry>();
  entry->session = std::move(session);
  const auto id = entry->session.id;
  {
    std::unique_lock lock(map_mutex_);
    if (!sessions_.emplace(id, entry).second) throw Error(ErrorCode::internal, "duplicate session id " + id);
  }
  std::lock_guard lock(entry->mutex);
  persist(*entry, 0, SessionState::Created);
}

std::shared_ptr<SessionStore::Entry> SessionStore::find_entry(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::not_found, "unknown session " + id, id);
  return it->second;
}

void SessionStore::persist(const Entry& entry, std::size_t from, SessionState was) {
  const auto& s = entry.session;
  if (from < s.events.size()) {
    std::lock_guard lock(log_mutex_);
    std::ofstream out(events_path(dir_), std::ios::app);
    for (std::size_t i = from; i < s.events.size(); ++i) {
      json rec = s.events[i];
      rec["session_id"] = s.id;
      out << rec.dump() << '\n';
      ++logged_;
    }
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, "cannot append to " + events_path(dir_).string());
  }
  if (s.state == SessionState::Completed && was != SessionState::Completed) {
    const auto path = snapshot_path(dir_, s.id);
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << json(s).dump(2) << '\n';
      if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }
}

std::optional<Session> SessionStore::get(const std::string& id) const {
  std::shared_ptr<Entry> entry;
  {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    entry = it->second;
  }
  std::lock_guard lock(entry->mutex);
  return entry->session;
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(map_mutex_);
  return sessions_.size();
}

std::size_t SessionStore::logged_events() const {
  std::lock_guard lock(log_mutex_);
  return logged_;
}

}  // namespace csc
