#pragma once

// Session-based HTTP+JSON interface (/v1) for interactive labeling: upload an
// image, add scribble rounds, run the solver in the background, poll status
// and fetch results.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cvp/config.hpp"
#include "cvp/dataterm.hpp"
#include "cvp/field.hpp"
#include "cvp/tasks.hpp"

namespace httplib {
class Server;
}

namespace cvp::service {

struct Options {
  std::size_t max_pixels = 4096u * 4096u;
  std::size_t max_body_bytes = 3u * 4096u * 4096u * 2u + 4096u;
  std::chrono::seconds idle_ttl{3600};
  std::chrono::milliseconds snapshot_interval{100};
};

enum class Status { kIdle, kRunning, kDone, kFailed };
const char* to_string(Status s);

struct Stroke {
  int cls = 0;
  int round = 0;
  std::vector<std::uint32_t> pixels;
};

/// Progress published by the solver thread.
struct Snapshot {
  int k = 0;
  double objective = 0.0;
  long violations = 0;
  std::size_t belt = 0;
  std::optional<double> err;
};

class Session {
 public:
  Session(std::string id, Image image, int classes, RunConfig config);
  ~Session();

  const std::string& id() const { return id_; }

  std::mutex mutex;
  Image image;
  int classes = 2;
  RunConfig config;
  ScribbleSet scribbles;
  std::vector<Stroke> strokes;
  int round = 0;
  int job = 0;
  Status status = Status::kIdle;
  Snapshot snapshot;
  std::chrono::steady_clock::time_point last_snapshot{};
  std::chrono::steady_clock::time_point last_access;
  std::optional<SegmentResult> result;
  nlohmann::json error;
  std::atomic<bool> cancel{false};
  std::thread worker;

 private:
  std::string id_;
};

class SessionStore {
 public:
  explicit SessionStore(Options options = {});
  ~SessionStore();

  std::shared_ptr<Session> create(Image image, int classes, RunConfig config);
  std::shared_ptr<Session> find(const std::string& id);
  /// Cancels a running solve, waits for it and removes the session.
  bool erase(const std::string& id);
  /// Removes sessions that are not running and idle longer than the TTL.
  std::size_t evict_idle();
  std::size_t size();

  const Options& options() const { return options_; }

 private:
  Options options_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// Digital path through the listed (x, y) points, thickened by a disc of
/// `radius` pixels. Points outside the grid are an error.
std::vector<std::uint32_t> rasterize_stroke(const Grid2D& grid, const std::vector<std::pair<int, int>>& path,
                                            int radius);

/// Image blended with a class color per label, as P6.
std::string overlay_ppm(const Image& image, const std::vector<int>& labels);

class Service {
 public:
  explicit Service(Options options = {});
  ~Service();

  /// Registers the /v1 routes. `static_dir`, when nonempty, is served at /.
  void install(httplib::Server& server, const std::string& static_dir = {});
  SessionStore& store() { return store_; }

 private:
  void start_run(const std::shared_ptr<Session>& s, bool warm_start);

  SessionStore store_;
};

}  // namespace cvp::service
