#include "ips/session_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "ips/error.hpp"
#include "ips/jsonl.hpp"
#include "ips/wire.hpp"

namespace ips {

namespace fs = std::filesystem;

std::string_view session_state_name(SessionState s) noexcept {
  switch (s) {
    case SessionState::Collecting: return "Collecting";
    case SessionState::Training: return "Training";
    case SessionState::Trained: return "Trained";
    case SessionState::Failed: return "Failed";
  }
  return "Failed";
}

SessionState parse_session_state(std::string_view text) {
  if (text == "Collecting") return SessionState::Collecting;
  if (text == "Training") return SessionState::Training;
  if (text == "Trained") return SessionState::Trained;
  if (text == "Failed") return SessionState::Failed;
  throw Error(ErrorCode::MalformedRecord, "unknown session state '" + std::string(text) + "'");
}

std::optional<std::string> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [this] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  std::string event = std::move(queue_.front());
  queue_.pop_front();
  return event;
}

bool Subscription::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

void Subscription::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::push(const std::string& event) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return false;
    if (queue_.size() >= capacity_) {
      // slow consumer: drop it rather than stall the localizer
      closed_ = true;
      queue_.clear();
    } else {
      queue_.push_back(event);
    }
  }
  cv_.notify_all();
  return !closed();
}

struct SessionStore::Entry {
  std::mutex mutex;
  SessionInfo info;
  std::shared_ptr<const DenseRadioMap> radiomap;

  std::mutex stream_mutex;
  std::vector<std::shared_ptr<Subscription>> subscribers;
};

namespace {

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

void append_durably(const fs::path& path, const std::string& data) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::Io, "open " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string msg = std::strerror(errno);
      ::close(fd);
      throw Error(ErrorCode::Io, "write " + path.string() + ": " + msg);
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

std::uintmax_t committed_length(const fs::path& dir) {
  const fs::path commit = dir / "samples.commit";
  const fs::path samples = dir / "samples.jsonl";
  if (fs::exists(commit)) return std::stoull(read_text_file(commit.string()));
  if (!fs::exists(samples)) return 0;
  // no commit marker: keep whole lines only
  const std::string content = read_text_file(samples.string());
  const auto last = content.rfind('\n');
  return last == std::string::npos ? 0 : last + 1;
}

std::size_t count_lines(const fs::path& path) {
  if (!fs::exists(path)) return 0;
  const std::string content = read_text_file(path.string());
  return static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n'));
}

}  // namespace

SessionStore::SessionStore(fs::path data_dir, std::size_t stream_capacity)
    : data_dir_(std::move(data_dir)), stream_capacity_(stream_capacity) {
  fs::create_directories(data_dir_ / "sessions");
  load_existing();
}

SessionStore::~SessionStore() { close_all_streams(); }

fs::path SessionStore::session_dir(const std::string& session_id) const { return data_dir_ / "sessions" / session_id; }

void SessionStore::load_existing() {
  for (const auto& dirent : fs::directory_iterator(data_dir_ / "sessions")) {
    if (!dirent.is_directory()) continue;
    const fs::path dir = dirent.path();
    try {
      const auto j = nlohmann::json::parse(read_text_file((dir / "session.json").string()));
      auto entry = std::make_shared<Entry>();
      SessionInfo& info = entry->info;
      info.session_id = j.at("session_id").get<std::string>();
      info.area = area_from_json(j.at("area"));
      info.state = parse_session_state(j.at("state").get<std::string>());
      info.created_at = Timestamp::parse(j.at("created_at").get<std::string>());
      if (j.contains("trained_at")) info.trained_at = Timestamp::parse(j.at("trained_at").get<std::string>());

      const fs::path samples = dir / "samples.jsonl";
      const auto committed = committed_length(dir);
      if (fs::exists(samples) && fs::file_size(samples) > committed) fs::resize_file(samples, committed);
      info.sample_count = count_lines(samples);

      if (info.state == SessionState::Training) info.state = SessionState::Failed;  // interrupted job
      if (info.state == SessionState::Trained) {
        try {
          entry->radiomap = std::make_shared<const DenseRadioMap>(
              radio_map_from_json(nlohmann::json::parse(read_text_file((dir / "radiomap.json").string()))));
        } catch (const std::exception& e) {
          std::cerr << "session " << info.session_id << ": radio map unreadable, marking Failed: " << e.what() << "\n";
          info.state = SessionState::Failed;
          info.trained_at.reset();
        }
      }
      persist_info(*entry);
      sessions_.emplace(info.session_id, std::move(entry));
    } catch (const std::exception& e) {
      std::cerr << "skipping session directory " << dir << ": " << e.what() << "\n";
    }
  }
}

void SessionStore::persist_info(const Entry& entry) const {
  const SessionInfo& info = entry.info;
  nlohmann::ordered_json j;
  j["session_id"] = info.session_id;
  j["area"] = area_to_json(info.area);
  j["state"] = session_state_name(info.state);
  j["created_at"] = info.created_at.str();
  if (info.trained_at) j["trained_at"] = info.trained_at->str();
  write_text_file_atomic((session_dir(info.session_id) / "session.json").string(), j.dump(2) + "\n");
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::SessionNotFound, "no session '" + session_id + "'");
  return it->second;
}

std::string SessionStore::create_session(const SurveyArea& area) {
  validate_area(area);
  auto entry = std::make_shared<Entry>();
  entry->info.area = area;
  entry->info.created_at = Timestamp::now();
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = new_session_id();
  } while (sessions_.count(id) != 0 || fs::exists(session_dir(id)));
  entry->info.session_id = id;
  fs::create_directories(session_dir(id));
  write_text_file_atomic((session_dir(id) / "samples.commit").string(), "0");
  persist_info(*entry);
  sessions_.emplace(id, std::move(entry));
  return id;
}

std::size_t SessionStore::ingest_samples(const std::string& session_id, std::span<const FingerprintSample> batch) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  if (entry->info.state != SessionState::Collecting) {
    throw Error(ErrorCode::WrongState, "session is " + std::string(session_state_name(entry->info.state)) +
                                           ", samples are only accepted while Collecting");
  }
  std::string payload;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    try {
      validate_sample(batch[i], entry->info.area);
    } catch (const Error& e) {
      throw Error(ErrorCode::ValidationFailed, "samples[" + std::to_string(i) + "]: " + e.what());
    }
    payload += sample_to_line(batch[i]);
  }
  if (batch.empty()) return 0;
  const fs::path dir = session_dir(session_id);
  const fs::path samples = dir / "samples.jsonl";
  const std::uintmax_t before = fs::exists(samples) ? fs::file_size(samples) : 0;
  append_durably(samples, payload);
  write_text_file_atomic((dir / "samples.commit").string(), std::to_string(before + payload.size()));
  entry->info.sample_count += batch.size();
  return batch.size();
}

nlohmann::ordered_json SessionStore::train(const std::string& session_id, const TrainConfig& config) {
  validate_train_config(config);
  auto entry = find(session_id);
  SurveyArea area;
  {
    std::lock_guard lock(entry->mutex);
    const SessionState s = entry->info.state;
    if (s != SessionState::Collecting && s != SessionState::Failed) {
      throw Error(ErrorCode::WrongState, "cannot train a session that is " + std::string(session_state_name(s)));
    }
    entry->info.state = SessionState::Training;
    persist_info(*entry);
    area = entry->info.area;
  }

  const fs::path dir = session_dir(session_id);
  try {
    const fs::path samples_path = dir / "samples.jsonl";
    std::vector<FingerprintSample> samples;
    if (fs::exists(samples_path)) samples = read_jsonl_file(samples_path.string());
    TrainResult result = train_radio_map(samples, area, config);
    auto report = training_report(config, result, samples.size());
    write_text_file_atomic((dir / "sparse_map.json").string(), sparse_map_to_json(result.sparse).dump() + "\n");
    write_text_file_atomic((dir / "radiomap.json").string(), radio_map_to_json(result.dense).dump() + "\n");
    report["session_id"] = session_id;
    report["state"] = "Trained";
    write_text_file_atomic((dir / "report.json").string(), report.dump(2) + "\n");

    std::lock_guard lock(entry->mutex);
    entry->radiomap = std::make_shared<const DenseRadioMap>(std::move(result.dense));
    entry->info.state = SessionState::Trained;
    entry->info.trained_at = Timestamp::now();
    persist_info(*entry);
    return report;
  } catch (const std::exception& e) {
    nlohmann::ordered_json report;
    report["session_id"] = session_id;
    report["state"] = "Failed";
    report["cause"] = e.what();
    try {
      write_text_file_atomic((dir / "report.json").string(), report.dump(2) + "\n");
    } catch (const std::exception&) {
    }
    std::lock_guard lock(entry->mutex);
    entry->info.state = SessionState::Failed;
    persist_info(*entry);
    throw Error(ErrorCode::TrainingFailed, e.what());
  }
}

namespace {

std::shared_ptr<const DenseRadioMap> trained_map(std::mutex& m, const SessionInfo& info,
                                                 const std::shared_ptr<const DenseRadioMap>& map) {
  std::lock_guard lock(m);
  if (info.state != SessionState::Trained || !map) {
    throw Error(ErrorCode::NotTrained, "session is " + std::string(session_state_name(info.state)));
  }
  return map;
}

}  // namespace

PositionEstimate SessionStore::localize(const std::string& session_id, const Observation& obs,
                                        const LocalizerOptions& options) {
  auto entry = find(session_id);
  const auto map = trained_map(entry->mutex, entry->info, entry->radiomap);
  PositionEstimate est = ips::localize(obs, *map, options);
  publish(*entry, "estimate", estimate_to_json(est));
  return est;
}

Evaluation SessionStore::evaluate(const std::string& session_id, std::span<const TruthObservation> items,
                                  const LocalizerOptions& options) {
  auto entry = find(session_id);
  const auto map = trained_map(entry->mutex, entry->info, entry->radiomap);
  Evaluation ev = ips::evaluate(items, *map, options);
  for (const auto& rec : ev.records) publish(*entry, "accuracy", accuracy_record_to_json(rec));
  return ev;
}

std::shared_ptr<Subscription> SessionStore::subscribe(const std::string& session_id) {
  auto entry = find(session_id);
  trained_map(entry->mutex, entry->info, entry->radiomap);
  auto sub = std::make_shared<Subscription>(stream_capacity_);
  std::lock_guard lock(entry->stream_mutex);
  entry->subscribers.push_back(sub);
  return sub;
}

void SessionStore::publish(Entry& entry, const std::string& type, const nlohmann::ordered_json& payload) {
  nlohmann::ordered_json event;
  event["type"] = type;
  event["payload"] = payload;
  const std::string text = event.dump();
  std::lock_guard lock(entry.stream_mutex);
  std::erase_if(entry.subscribers, [&](const std::shared_ptr<Subscription>& s) { return !s->push(text); });
}

SessionInfo SessionStore::info(const std::string& session_id) const {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return entry->info;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, e] : sessions_) ids.push_back(id);
  return ids;
}

std::string SessionStore::radiomap_json(const std::string& session_id) const {
  auto entry = find(session_id);
  trained_map(entry->mutex, entry->info, entry->radiomap);
  return read_text_file((session_dir(session_id) / "radiomap.json").string());
}

void SessionStore::close_all_streams() {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  for (const auto& e : entries) {
    std::lock_guard lock(e->stream_mutex);
    for (const auto& s : e->subscribers) s->close();
    e->subscribers.clear();
  }
}

}  // namespace ips
