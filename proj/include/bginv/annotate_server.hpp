#pragma once

#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "httplib.h"

#include "bginv/agreement.hpp"
#include "bginv/resample.hpp"
#include "bginv/stages.hpp"

namespace bginv {

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Append-only annotation log. Relabels append a new row; the loader keeps
/// the last row per (model, annotator).
class AnnotationStore {
 public:
  explicit AnnotationStore(std::string path) : path_(std::move(path)) {
    if (fs::exists(path_)) set_ = load_annotations_file(path_);
  }

  void record(const std::string& model, const std::string& annotator, Label label) {
    if (!valid_label(label)) throw Error("label must be 1, 2 or 3");
    if (annotator.empty()) throw Error("annotator must be non-empty");
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append to '" + path_ + "'");
    const json row{{"model_id", model}, {"annotator", annotator}, {"label", label}, {"ts", utc_timestamp()}};
    out << row.dump() << '\n';
    out.flush();
    if (!out) throw Error("write failed for '" + path_ + "'");
    set_.set(model, annotator, label);
  }

  AnnotationSet snapshot() const {
    std::lock_guard lock(mu_);
    return set_;
  }

 private:
  std::string path_;
  mutable std::mutex mu_;
  AnnotationSet set_;
};

struct ModelArtifacts {
  std::vector<std::string> matrix_urls;
  std::string scatter_url;
};

/// Models present in a rendered matrices directory, keyed by model id.
inline std::map<std::string, ModelArtifacts> scan_matrices(const std::string& dir) {
  std::map<std::string, ModelArtifacts> out;
  for (const auto& f : list_files(dir, ".json")) {
    const auto m = load_matrix_file(f);
    auto& a = out[m.model_id];
    a.matrix_urls.push_back("/matrices/" + fs::path(f).replace_extension(".ppm").filename().string());
    a.scatter_url = "/matrices/" + sanitize_filename(m.model_id) + ".scatter.ppm";
  }
  return out;
}

/// Unlabelled models first, then labelled ones; model-id order within each.
inline json annotation_queue(const std::map<std::string, ModelArtifacts>& models, const AnnotationSet& set,
                             const std::string& annotator) {
  json unlabeled = json::array(), labeled = json::array();
  for (const auto& [id, a] : models) {
    const auto cur = set.get(id, annotator);
    json item{{"model_id", id}, {"matrix_urls", a.matrix_urls}, {"scatter_url", a.scatter_url},
              {"current_label", cur ? json(*cur) : json(nullptr)}};
    (cur ? labeled : unlabeled).push_back(std::move(item));
  }
  for (auto& x : labeled) unlabeled.push_back(std::move(x));
  return unlabeled;
}

class AnnotateServer {
 public:
  AnnotateServer(std::string matrices_dir, std::string annotations_path, std::optional<std::string> static_dir = std::nullopt)
      : matrices_dir_(std::move(matrices_dir)), models_(scan_matrices(matrices_dir_)), store_(std::move(annotations_path)) {
    // No SO_REUSEPORT: a second server on a taken port must fail to bind.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    if (!server_.set_mount_point("/matrices", matrices_dir_)) throw Error("cannot serve '" + matrices_dir_ + "'");
    server_.set_file_extension_and_mimetype_mapping("ppm", "image/x-portable-pixmap");
    if (static_dir && !server_.set_mount_point("/", *static_dir)) throw Error("cannot serve '" + *static_dir + "'");

    server_.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string annotator = req.get_param_value("annotator");
      if (annotator.empty()) return reply(res, 400, {{"error", "missing annotator"}});
      reply(res, 200, annotation_queue(models_, store_.snapshot(), annotator));
    });
    server_.Post("/api/label", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
        const auto model = body.at("model_id").get<std::string>();
        const auto annotator = body.at("annotator").get<std::string>();
        if (!body.at("label").is_number_integer()) throw Error("label must be an integer");
        const auto label = body.at("label").get<Label>();
        if (!models_.count(model)) return reply(res, 404, {{"error", "unknown model '" + model + "'"}});
        store_.record(model, annotator, label);
      } catch (const json::exception& e) {
        return reply(res, 400, {{"error", e.what()}});
      } catch (const Error& e) {
        return reply(res, 400, {{"error", e.what()}});
      }
      reply(res, 200, {{"ok", true}});
    });
    server_.Get("/api/irr", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, inter_rater_report(store_.snapshot()));
    });
  }

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
    return bound;
  }

  void serve() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  std::string matrices_dir_;
  std::map<std::string, ModelArtifacts> models_;
  AnnotationStore store_;
  httplib::Server server_;
};

}  // namespace bginv
