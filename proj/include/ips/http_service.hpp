#pragma once

#include <memory>
#include <string>

#include "ips/error.hpp"
#include "ips/session_store.hpp"

namespace ips {

/// HTTP status for an error code: 400 validation, 404 unknown session,
/// 409 wrong state, 500 training/io failure.
int http_status_for(ErrorCode code) noexcept;

/// JSON-over-HTTP front end for a SessionStore.
///
///   POST /api/v1/sessions                    {area}                        -> {session_id}
///   GET  /api/v1/sessions/{id}                                             -> session info
///   POST /api/v1/sessions/{id}/samples       {samples:[...]}               -> {accepted}
///   POST /api/v1/sessions/{id}/train         {spacing,hyper_policy,min_presence} -> report
///   GET  /api/v1/sessions/{id}/radiomap                                    -> radiomap.json
///   POST /api/v1/sessions/{id}/localize      {observation}                 -> estimate
///   POST /api/v1/sessions/{id}/eval          {observations_with_truth:[...]} -> {summary,records,skipped}
///   GET  /api/v1/sessions/{id}/stream        server-sent events {type, payload}
///
/// Errors are {error, detail} with the status from http_status_for.
class HttpService {
 public:
  explicit HttpService(SessionStore& store, int worker_threads = 16);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound port.
  /// Throws Io when the address cannot be bound.
  int bind(const std::string& host, int port);

  /// Serves until stop(). Requires a prior bind().
  void run();
  /// run() on a background thread.
  void start();
  /// Closes live streams, stops accepting, and waits for in-flight requests.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ips
