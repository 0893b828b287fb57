#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ips/fingerprint.hpp"
#include "ips/localizer.hpp"
#include "ips/pipeline.hpp"
#include "ips/radio_map.hpp"

namespace ips {

enum class SessionState { Collecting, Training, Trained, Failed };

std::string_view session_state_name(SessionState s) noexcept;
SessionState parse_session_state(std::string_view text);

struct SessionInfo {
  std::string session_id;
  SurveyArea area;
  SessionState state = SessionState::Collecting;
  std::size_t sample_count = 0;
  Timestamp created_at;
  std::optional<Timestamp> trained_at;
};

/// Live-stream subscription. Events are JSON strings {"type":..,"payload":..}.
/// The publisher never blocks on a subscriber: when the queue is full the
/// subscription is closed instead.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  /// Waits up to timeout. nullopt on timeout or once closed and drained.
  std::optional<std::string> next(std::chrono::milliseconds timeout);
  bool closed() const;
  void close();

  /// Returns false if the subscriber was (or is now) disconnected.
  bool push(const std::string& event);

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  std::size_t capacity_;
  bool closed_ = false;
};

/// Directory-backed survey sessions:
///   <data_dir>/sessions/<id>/{session.json, samples.jsonl, samples.commit,
///                             sparse_map.json, radiomap.json, report.json}
/// samples.commit holds the byte length of the last fully appended batch; on load
/// anything past it is truncated, so a crash never leaves part of a batch behind.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path data_dir, std::size_t stream_capacity = 1024);
  ~SessionStore();

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  /// Throws InvalidArea.
  std::string create_session(const SurveyArea& area);

  /// Whole batch or nothing. Throws SessionNotFound, WrongState, ValidationFailed.
  std::size_t ingest_samples(const std::string& session_id, std::span<const FingerprintSample> batch);

  /// Throws SessionNotFound, WrongState; TrainingFailed (state becomes Failed) on pipeline errors.
  nlohmann::ordered_json train(const std::string& session_id, const TrainConfig& config);

  /// Throws SessionNotFound, NotTrained, InsufficientOverlap.
  PositionEstimate localize(const std::string& session_id, const Observation& obs,
                            const LocalizerOptions& options = {});

  /// Throws SessionNotFound, NotTrained, EmptyInput.
  Evaluation evaluate(const std::string& session_id, std::span<const TruthObservation> items,
                      const LocalizerOptions& options = {});

  /// Throws SessionNotFound, NotTrained. Receives only events published after this call.
  std::shared_ptr<Subscription> subscribe(const std::string& session_id);

  SessionInfo info(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;
  std::string radiomap_json(const std::string& session_id) const;

  std::filesystem::path session_dir(const std::string& session_id) const;

  /// Closes every subscription so streaming connections can finish.
  void close_all_streams();

 private:
  struct Entry;

  std::shared_ptr<Entry> find(const std::string& session_id) const;
  void load_existing();
  void persist_info(const Entry& entry) const;
  void publish(Entry& entry, const std::string& type, const nlohmann::ordered_json& payload);

  std::filesystem::path data_dir_;
  std::size_t stream_capacity_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace ips
