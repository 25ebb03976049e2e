#pragma once

#include <filesystem>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "csc/engine.hpp"

namespace csc {

// Durable session registry. Every committed event is appended to
// `<dir>/events.jsonl` as {"ts", "session_id", "type", "payload"}; completed
// sessions are also written to `<dir>/snapshots/<id>.json`. Opening a store
// rebuilds all sessions from those files.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);

  // Registers a freshly started session and logs its events.
  void add(Session session);

  // Runs `op` on the session while holding its lock, then logs whatever
  // events `op` committed. Operations on different sessions run in parallel.
  template <typename Op>
  auto update(const std::string& id, Op&& op) {
    auto entry = find_entry(id);
    std::lock_guard lock(entry->mutex);
    const auto before = entry->session.events.size();
    const auto was = entry->session.state;
    struct Flush {
      SessionStore* store;
      Entry* entry;
      std::size_t before;
      SessionState was;
      ~Flush() noexcept(false) {
        if (std::uncaught_exceptions() == 0) store->persist(*entry, before, was);
      }
    } flush{this, entry.get(), before, was};
    return op(entry->session);
  }

  std::optional<Session> get(const std::string& id) const;
  std::size_t size() const;
  std::size_t logged_events() const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  struct Entry {
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Entry> find_entry(const std::string& id) const;
  void persist(const Entry& entry, std::size_t from, SessionState was);
  void load();

  std::filesystem::path dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  mutable std::mutex log_mutex_;
  std::size_t logged_ = 0;
};

}  // namespace csc
