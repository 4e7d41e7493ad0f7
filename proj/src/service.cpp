#include "cvp/service.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <random>
#include <set>

#include "httplib.h"

#include "cvp/errors.hpp"
#include "cvp/imageio.hpp"

namespace cvp::service {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

const char* to_string(Status s) {
  switch (s) {
    case Status::kIdle:
      return "idle";
    case Status::kRunning:
      return "running";
    case Status::kDone:
      return "done";
    case Status::kFailed:
      return "failed";
  }
  return "unknown";
}

Session::Session(std::string id, Image img, int cls, RunConfig cfg)
    : image(std::move(img)),
      classes(cls),
      config(std::move(cfg)),
      scribbles(image.grid(), cls),
      last_access(Clock::now()),
      id_(std::move(id)) {}

Session::~Session() {
  cancel = true;
  if (worker.joinable()) worker.join();
}

namespace {

std::string new_id() {
  static std::mutex m;
  static std::random_device rd;
  static std::mt19937_64 gen(rd());
  std::lock_guard lock(m);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(gen()),
                static_cast<unsigned long long>(gen()));
  return buf;
}

}  // namespace

SessionStore::SessionStore(Options options) : options_(options) {}

SessionStore::~SessionStore() {
  std::map<std::string, std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mutex_);
    all.swap(sessions_);
  }
  for (auto& [id, s] : all) s->cancel = true;
}

std::shared_ptr<Session> SessionStore::create(Image image, int classes, RunConfig config) {
  auto s = std::make_shared<Session>(new_id(), std::move(image), classes, std::move(config));
  std::lock_guard lock(mutex_);
  sessions_[s->id()] = s;
  return s;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  return it->second;
}

bool SessionStore::erase(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    s = it->second;
    sessions_.erase(it);
  }
  s->cancel = true;
  std::thread t;
  {
    std::lock_guard lock(s->mutex);
    t.swap(s->worker);
  }
  if (t.joinable()) t.join();
  return true;
}

std::size_t SessionStore::evict_idle() {
  const auto now = Clock::now();
  std::vector<std::string> stale;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, s] : sessions_) {
      std::unique_lock sl(s->mutex, std::try_to_lock);
      if (!sl.owns_lock() || s->status == Status::kRunning) continue;
      if (now - s->last_access > options_.idle_ttl) stale.push_back(id);
    }
  }
  for (const auto& id : stale) erase(id);
  return stale.size();
}

std::size_t SessionStore::size() {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::vector<std::uint32_t> rasterize_stroke(const Grid2D& grid, const std::vector<std::pair<int, int>>& path,
                                            int radius) {
  if (path.empty()) throw ValidationError("stroke path is empty");
  if (radius < 0 || radius > 64) throw ValidationError("stroke radius must lie in [0, 64]");
  for (const auto& [x, y] : path) {
    if (!grid.contains(y, x)) throw ValidationError("stroke point outside the image");
  }
  std::set<std::uint32_t> out;
  auto stamp = [&](int x, int y) {
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        if (dx * dx + dy * dy > radius * radius || !grid.contains(y + dy, x + dx)) continue;
        out.insert(static_cast<std::uint32_t>(grid.index(y + dy, x + dx)));
      }
    }
  };
  stamp(path[0].first, path[0].second);
  for (std::size_t i = 1; i < path.size(); ++i) {
    int x0 = path[i - 1].first, y0 = path[i - 1].second;
    const int x1 = path[i].first, y1 = path[i].second;
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int e = dx + dy;
    while (true) {
      stamp(x0, y0);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * e;
      if (e2 >= dy) {
        e += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        e += dx;
        y0 += sy;
      }
    }
  }
  return {out.begin(), out.end()};
}

std::string overlay_ppm(const Image& image, const std::vector<int>& labels) {
  static const unsigned char palette[][3] = {{230, 25, 75},  {60, 180, 75},  {0, 130, 200},  {245, 130, 48},
                                             {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {210, 245, 60}};
  const Grid2D& g = image.grid();
  std::string out = "P6\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n255\n";
  out.reserve(out.size() + 3 * g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto px = image.pixel(i);
    for (int c = 0; c < 3; ++c) {
      const double base = px[image.channels() == 3 ? c : 0] * 255.0;
      double v = base;
      if (labels[i] > 0) v = 0.5 * base + 0.5 * palette[(labels[i] - 1) % 8][c];
      out += static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L)));
    }
  }
  return out;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

json status_json(const Session& s) {
  json j = {{"id", s.id()},
            {"status", to_string(s.status)},
            {"k", s.snapshot.k},
            {"objective", s.snapshot.objective},
            {"violations", s.snapshot.violations},
            {"belt", s.snapshot.belt},
            {"err", s.snapshot.err ? json(*s.snapshot.err) : json(nullptr)},
            {"round", s.round},
            {"job", s.job},
            {"pinned", s.scribbles.total()}};
  if (s.status == Status::kFailed) j["error"] = s.error;
  return j;
}

// Config overrides from a JSON object of key: value (numbers, strings, bools
// and integer arrays for radii).
void apply_overrides(RunConfig& cfg, const json& obj) {
  if (!obj.is_object()) throw ValidationError("config must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (value.is_string()) {
      cfg.set(key, value.get<std::string>());
    } else if (value.is_boolean()) {
      cfg.set(key, value.get<bool>() ? "true" : "false");
    } else if (value.is_number_integer()) {
      cfg.set(key, std::to_string(value.get<long long>()));
    } else if (value.is_number()) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", value.get<double>());
      cfg.set(key, buf);
    } else if (value.is_array()) {
      std::string list;
      for (const auto& v : value) {
        if (!v.is_number_integer()) throw ValidationError("config list values must be integers");
        if (!list.empty()) list += ',';
        list += std::to_string(v.get<long long>());
      }
      cfg.set(key, list);
    } else {
      throw ValidationError("unsupported value for config key " + key);
    }
  }
  cfg.validate();
}

int parse_classes(const std::string& text) {
  try {
    std::size_t used = 0;
    const int c = std::stoi(text, &used);
    if (used != text.size()) throw ValidationError("classes must be an integer");
    return c;
  } catch (const std::logic_error&) {
    throw ValidationError("classes must be an integer");
  }
}

// Header-only dimension check so oversize uploads are refused before any
// pixel buffer is allocated.
bool oversize(std::string_view body, std::size_t max_pixels) {
  if (body.size() < 2 || body[0] != 'P') return false;
  std::size_t pos = 2;
  long dims[2] = {0, 0};
  for (long& d : dims) {
    while (pos < body.size()) {
      if (body[pos] == '#') {
        while (pos < body.size() && body[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(body[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= body.size() || !std::isdigit(static_cast<unsigned char>(body[pos]))) return false;
    while (pos < body.size() && std::isdigit(static_cast<unsigned char>(body[pos]))) {
      d = std::min(d * 10 + (body[pos] - '0'), 1L << 30);
      ++pos;
    }
  }
  return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) > max_pixels;
}

}  // namespace

Service::Service(Options options) : store_(options) {}

Service::~Service() = default;

void Service::start_run(const std::shared_ptr<Session>& s, bool warm_start) {
  // Caller holds s->mutex.
  if (s->worker.joinable()) s->worker.join();
  std::optional<LabelStack> warm;
  if (warm_start && s->result) warm = s->result->state.u;
  s->status = Status::kRunning;
  s->snapshot = {};
  s->error = nullptr;
  s->cancel = false;
  s->last_snapshot = Clock::time_point{};
  ++s->job;
  const Image image = s->image;
  const ScribbleSet scribbles = s->scribbles;
  const RunConfig config = s->config;
  const auto interval = store_.options().snapshot_interval;
  Session* raw = s.get();

  s->worker = std::thread([raw, image, scribbles, config, warm, interval]() {
    Session& session = *raw;
    auto progress = [&session, interval](const Progress& p) {
      const auto now = Clock::now();
      std::lock_guard lock(session.mutex);
      if (now - session.last_snapshot >= interval) {
        session.snapshot = {p.k, p.objective, p.violations, p.belt_size, p.err};
        session.last_snapshot = now;
      }
      return !session.cancel.load();
    };
    try {
      SegmentResult r = run_segment(image, scribbles, config, progress, warm ? &*warm : nullptr);
      std::lock_guard lock(session.mutex);
      const auto& st = r.state;
      session.snapshot = {st.k, st.objective_history.back(), st.violation_history.back(), st.belt_history.back(),
                          st.err_history.empty() ? std::optional<double>() : st.err_history.back()};
      session.result = std::move(r);
      session.status = Status::kDone;
    } catch (const Error& e) {
      std::lock_guard lock(session.mutex);
      session.status = Status::kFailed;
      session.error = {{"code", static_cast<int>(e.code())}, {"message", e.what()}};
    } catch (const std::exception& e) {
      std::lock_guard lock(session.mutex);
      session.status = Status::kFailed;
      session.error = {{"code", static_cast<int>(ExitCode::kValidationError)}, {"message", e.what()}};
    }
  });
}

void Service::install(httplib::Server& server, const std::string& static_dir) {
  server.set_payload_max_length(store_.options().max_body_bytes);

  server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    store_.evict_idle();
    std::string image_bytes;
    RunConfig cfg;
    int classes = 2;
    try {
      const bool is_json = req.get_header_value("Content-Type").find("application/json") != std::string::npos;
      if (is_json) {
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::parse_error&) {
          return send_error(res, 400, "malformed JSON");
        }
        if (!body.is_object() || !body.contains("image") || !body["image"].is_string()) {
          return send_error(res, 415, "expected a base64 'image' field");
        }
        image_bytes = base64_decode(body["image"].get<std::string>());
        if (body.contains("classes")) {
          if (!body["classes"].is_number_integer()) return send_error(res, 400, "classes must be an integer");
          classes = body["classes"].get<int>();
        }
        if (body.contains("config")) apply_overrides(cfg, body["config"]);
      } else {
        image_bytes = req.body;
        for (const auto& [key, value] : req.params) {
          if (key == "classes") {
            classes = parse_classes(value);
          } else {
            cfg.set(key, value);
          }
        }
        cfg.validate();
      }
    } catch (const Error& e) {
      return send_error(res, e.code() == ExitCode::kInputError ? 415 : 400, e.what());
    }
    if (image_bytes.empty()) return send_error(res, 415, "empty body; expected a P5 or P6 image");
    if (classes < 2 || classes > kMaxChannels) return send_error(res, 400, "classes must lie in [2, 16]");
    if (oversize(image_bytes, store_.options().max_pixels)) return send_error(res, 413, "image exceeds 4096x4096");
    Image image;
    try {
      image = to_image(parse_pnm(image_bytes));
    } catch (const Error& e) {
      return send_error(res, 415, e.what());
    }
    auto s = store_.create(std::move(image), classes, cfg);
    send_json(res, 201,
              {{"id", s->id()},
               {"status", "idle"},
               {"width", s->image.grid().width()},
               {"height", s->image.grid().height()},
               {"channels", s->image.channels()},
               {"classes", classes},
               {"config", config_json(s->config)}});
  });

  server.Post(R"(/v1/sessions/([0-9a-f]+)/scribbles)", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = store_.find(req.matches[1]);
    if (!s) return send_error(res, 404, "unknown session");
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      return send_error(res, 400, "malformed JSON");
    }
    if (!body.is_object() || !body.contains("strokes") || !body["strokes"].is_array()) {
      return send_error(res, 400, "expected a 'strokes' array");
    }
    std::lock_guard lock(s->mutex);
    s->last_access = Clock::now();
    if (s->status == Status::kRunning) return send_error(res, 409, "session is running");

    // Validate every stroke before touching the session.
    std::vector<Stroke> parsed;
    try {
      for (const auto& st : body["strokes"]) {
        if (!st.is_object() || !st.contains("class") || !st["class"].is_number_integer() || !st.contains("path") ||
            !st["path"].is_array()) {
          return send_error(res, 400, "each stroke needs an integer 'class' and a 'path' array");
        }
        Stroke stroke;
        stroke.cls = st["class"].get<int>();
        if (stroke.cls < 0 || stroke.cls >= s->classes) return send_error(res, 400, "stroke class out of range");
        std::vector<std::pair<int, int>> path;
        for (const auto& p : st["path"]) {
          if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
            return send_error(res, 400, "path entries must be [x, y] integer pairs");
          }
          path.emplace_back(p[0].get<int>(), p[1].get<int>());
        }
        const int radius = st.contains("radius") && st["radius"].is_number_integer() ? st["radius"].get<int>() : 0;
        stroke.pixels = rasterize_stroke(s->image.grid(), path, radius);
        parsed.push_back(std::move(stroke));
      }
    } catch (const Error& e) {
      return send_error(res, 400, e.what());
    }

    const int round = s->round + 1;
    json accepted = json::array(), rejected = json::array();
    const int w = s->image.grid().width();
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      Stroke& st = parsed[i];
      json conflicts = json::array();
      for (auto p : st.pixels) {
        const int owner = s->scribbles.label_at(p);
        if (owner >= 0 && owner != st.cls) conflicts.push_back({static_cast<int>(p % w), static_cast<int>(p / w)});
      }
      if (!conflicts.empty()) {
        rejected.push_back({{"index", i}, {"conflicts", conflicts}});
        continue;
      }
      for (auto p : st.pixels) s->scribbles.add(st.cls, p);
      st.round = round;
      s->strokes.push_back(std::move(st));
      accepted.push_back(i);
    }
    if (!accepted.empty()) s->round = round;
    send_json(res, 200,
              {{"round", accepted.empty() ? json(nullptr) : json(round)},
               {"accepted", accepted},
               {"rejected", rejected},
               {"pinned", s->scribbles.total()}});
  });

  server.Post(R"(/v1/sessions/([0-9a-f]+)/run)", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = store_.find(req.matches[1]);
    if (!s) return send_error(res, 404, "unknown session");
    bool warm = false;
    json overrides;
    if (!req.body.empty()) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error&) {
        return send_error(res, 400, "malformed JSON");
      }
      if (body.contains("warm_start")) {
        if (!body["warm_start"].is_boolean()) return send_error(res, 400, "warm_start must be a boolean");
        warm = body["warm_start"].get<bool>();
      }
      if (body.contains("config")) overrides = body["config"];
    }
    std::lock_guard lock(s->mutex);
    s->last_access = Clock::now();
    if (s->status == Status::kRunning) return send_error(res, 409, "a solve is already running");
    try {
      s->scribbles.require_all_classes();
    } catch (const MissingScribbles& e) {
      return send_json(res, 422, {{"error", e.what()}, {"missing_class", e.missing_class()}});
    }
    if (!overrides.is_null()) {
      RunConfig cfg = s->config;
      try {
        apply_overrides(cfg, overrides);
      } catch (const Error& e) {
        return send_error(res, 400, e.what());
      }
      s->config = cfg;
    }
    start_run(s, warm);
    send_json(res, 202, {{"job", s->job}, {"status", "running"}, {"warm_start", warm}});
  });

  server.Get(R"(/v1/sessions/([0-9a-f]+)/status)", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = store_.find(req.matches[1]);
    if (!s) return send_error(res, 404, "unknown session");
    std::lock_guard lock(s->mutex);
    s->last_access = Clock::now();
    send_json(res, 200, status_json(*s));
  });

  server.Get(R"(/v1/sessions/([0-9a-f]+)/result)", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = store_.find(req.matches[1]);
    if (!s) return send_error(res, 404, "unknown session");
    std::lock_guard lock(s->mutex);
    s->last_access = Clock::now();
    if (s->status != Status::kDone || !s->result) {
      json body = {{"error", "no result"}, {"status", to_string(s->status)}};
      if (s->status == Status::kFailed) body["solver_error"] = s->error;
      return send_json(res, 409, body);
    }
    const SegmentResult& r = *s->result;
    json masks = json::object();
    for (std::size_t c = 1; c < r.masks.size(); ++c) masks[std::to_string(c)] = base64_encode(encode_mask(r.masks[c]));
    json strokes = json::array();
    for (const auto& st : s->strokes) strokes.push_back({{"class", st.cls}, {"round", st.round}, {"pixels", st.pixels.size()}});
    send_json(res, 200,
              {{"id", s->id()},
               {"job", s->job},
               {"labels", base64_encode(encode_labels(s->image.grid(), r.labels))},
               {"masks", masks},
               {"overlay", base64_encode(overlay_ppm(s->image, r.labels))},
               {"strokes", strokes},
               {"wall_seconds", r.wall_seconds},
               {"report", r.report}});
  });

  server.Delete(R"(/v1/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    if (!store_.erase(req.matches[1])) return send_error(res, 404, "unknown session");
    res.status = 204;
  });

  if (!static_dir.empty()) server.set_mount_point("/", static_dir);
}

}  // namespace cvp::service
