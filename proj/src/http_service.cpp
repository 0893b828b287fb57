#include "ips/http_service.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

#include "ips/jsonl.hpp"
#include "ips/wire.hpp"

namespace ips {

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SessionNotFound: return 404;
    case ErrorCode::WrongState:
    case ErrorCode::NotTrained: return 409;
    case ErrorCode::TrainingFailed:
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void send_json(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& detail) {
  ordered_json body;
  body["error"] = to_string(code);
  body["detail"] = detail;
  send_json(res, body, http_status_for(code));
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("request body is not JSON: ") + e.what());
  }
}

/// Runs a handler, translating exceptions into JSON error responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, e.code(), e.detail());
  } catch (const json::exception& e) {
    send_error(res, ErrorCode::MalformedRecord, e.what());
  } catch (const std::exception& e) {
    send_error(res, ErrorCode::Io, e.what());
  }
}

}  // namespace

struct HttpService::Impl {
  SessionStore& store;
  httplib::Server server;
  std::jthread thread;
  std::atomic<bool> stopping{false};
  bool bound = false;

  Impl(SessionStore& s, int workers) : store(s) {
    server.new_task_queue = [workers] { return new httplib::ThreadPool(static_cast<std::size_t>(workers)); };
    // httplib's default also sets SO_REUSEPORT, which would let a second server share the port
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    routes();
  }

  void routes() {
    server.Post("/api/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        if (!body.is_object() || !body.contains("area")) throw Error(ErrorCode::InvalidArea, "body needs \"area\"");
        ordered_json out;
        out["session_id"] = store.create_session(area_from_json(body.at("area")));
        send_json(res, out, 201);
      });
    });

    server.Get(R"(/api/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const SessionInfo info = store.info(req.matches[1]);
        ordered_json out;
        out["session_id"] = info.session_id;
        out["state"] = session_state_name(info.state);
        out["sample_count"] = info.sample_count;
        out["area"] = area_to_json(info.area);
        out["created_at"] = info.created_at.str();
        if (info.trained_at) out["trained_at"] = info.trained_at->str();
        send_json(res, out);
      });
    });

    server.Post(R"(/api/v1/sessions/([^/]+)/samples)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        if (!body.is_object() || !body.contains("samples") || !body.at("samples").is_array()) {
          throw Error(ErrorCode::ValidationFailed, "body needs a \"samples\" array");
        }
        std::vector<FingerprintSample> batch;
        const auto& arr = body.at("samples");
        for (std::size_t i = 0; i < arr.size(); ++i) {
          try {
            batch.push_back(sample_from_json(arr[i]));
          } catch (const Error& e) {
            throw Error(ErrorCode::ValidationFailed, "samples[" + std::to_string(i) + "]: " + e.detail());
          }
        }
        ordered_json out;
        out["accepted"] = store.ingest_samples(req.matches[1], batch);
        send_json(res, out);
      });
    });

    server.Post(R"(/api/v1/sessions/([^/]+)/train)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = req.body.empty() ? json::object() : parse_body(req);
        TrainConfig config;
        config.spacing = body.value("spacing", config.spacing);
        config.policy = parse_hyper_policy(body.value("hyper_policy", std::string(hyper_policy_name(config.policy))));
        config.min_presence = body.value("min_presence", config.min_presence);
        send_json(res, store.train(req.matches[1], config));
      });
    });

    server.Get(R"(/api/v1/sessions/([^/]+)/radiomap)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { res.set_content(store.radiomap_json(req.matches[1]), "application/json"); });
    });

    server.Post(R"(/api/v1/sessions/([^/]+)/localize)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        if (!body.is_object() || !body.contains("observation")) {
          throw Error(ErrorCode::MalformedRecord, "body needs \"observation\"");
        }
        const Observation obs = observation_from_json(body.at("observation"));
        send_json(res, estimate_to_json(store.localize(req.matches[1], obs)));
      });
    });

    server.Post(R"(/api/v1/sessions/([^/]+)/eval)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        if (!body.is_object() || !body.contains("observations_with_truth") ||
            !body.at("observations_with_truth").is_array()) {
          throw Error(ErrorCode::MalformedRecord, "body needs an \"observations_with_truth\" array");
        }
        std::vector<TruthObservation> items;
        for (const auto& item : body.at("observations_with_truth")) items.push_back(truth_observation_from_json(item));
        const Evaluation ev = store.evaluate(req.matches[1], items);
        ordered_json out;
        out["summary"] = summary_to_json(ev.summary);
        auto records = ordered_json::array();
        for (const auto& r : ev.records) records.push_back(accuracy_record_to_json(r));
        out["records"] = std::move(records);
        out["skipped"] = ev.skipped;
        send_json(res, out);
      });
    });

    server.Get(R"(/api/v1/sessions/([^/]+)/stream)", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_ptr<Subscription> sub;
      guarded(res, [&] { sub = store.subscribe(req.matches[1]); });
      if (!sub) return;
      res.set_header("Cache-Control", "no-cache");
      auto greeted = std::make_shared<bool>(false);
      res.set_chunked_content_provider(
          "text/event-stream",
          [this, sub, greeted](std::size_t, httplib::DataSink& sink) {
            if (!*greeted) {
              // comment line so clients know the subscription is live
              *greeted = true;
              static constexpr char hello[] = ": subscribed\n\n";
              return sink.write(hello, sizeof(hello) - 1);
            }
            for (int idle = 0; !stopping; ++idle) {
              if (auto event = sub->next(std::chrono::milliseconds(100))) {
                const std::string frame = "data: " + *event + "\n\n";
                return sink.write(frame.data(), frame.size());
              }
              if (sub->closed()) break;
              if (idle >= 10) {
                static constexpr char ping[] = ": keep-alive\n\n";
                return sink.write(ping, sizeof(ping) - 1);
              }
            }
            sink.done();
            return true;
          },
          [sub](bool) { sub->close(); });
    });
  }
};

HttpService::HttpService(SessionStore& store, int worker_threads)
    : impl_(std::make_unique<Impl>(store, worker_threads)) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  int bound_port = port;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
    if (bound_port <= 0) throw Error(ErrorCode::Io, "cannot bind " + host + " on any port");
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
  }
  impl_->bound = true;
  return bound_port;
}

void HttpService::run() {
  if (!impl_->bound) throw Error(ErrorCode::Io, "run() before bind()");
  impl_->server.listen_after_bind();
}

void HttpService::start() {
  if (!impl_->bound) throw Error(ErrorCode::Io, "start() before bind()");
  impl_->thread = std::jthread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpService::stop() {
  if (impl_->stopping.exchange(true)) return;
  impl_->store.close_all_streams();
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ips
