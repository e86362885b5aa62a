#include <httplib.h>

#include "cvf/error.hpp"
#include "cvf/review.hpp"

namespace cvf {

namespace {

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>Edit review</title></head>
<body>
<h1>Edit review</h1>
<p>No UI bundle was configured. The JSON API is available under <code>/api/</code>:</p>
<ul>
<li><code>GET /api/next?user=ID</code></li>
<li><code>POST /api/label</code> with <code>{"user", "edit_id", "label"}</code></li>
<li><code>GET /api/item/EDIT_ID</code></li>
<li><code>GET /api/agreement</code></li>
</ul>
</body></html>
)";

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::parse:
    case ErrorKind::validation:
    case ErrorKind::usage: return 400;
    default: return 500;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& msg) {
  send_json(res, {{"error", std::string(kind)}, {"message", msg}}, status);
}

json progress_json(const ReviewProgress& p) { return {{"labeled", p.labeled}, {"total", p.total}}; }

template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    send_error(res, http_status(e.kind()), to_string(e.kind()), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "parse", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

struct ReviewServer::Impl {
  httplib::Server server;
};

ReviewServer::ReviewServer(ReviewService& service, std::filesystem::path images_dir,
                           std::filesystem::path ui_dir)
    : impl_(std::make_unique<Impl>()) {
  auto& svr = impl_->server;
  ReviewService* svc = &service;

  svr.Get("/api/next", [svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const NextItem next = svc->next_item(req.get_param_value("user"));
      json body = {{"progress", progress_json(next.progress)}, {"done", !next.item}};
      if (next.item) body["item"] = item_to_json(*next.item);
      send_json(res, body);
    });
  });

  svr.Post("/api/label", [svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      if (!body.is_object()) throw Error(ErrorKind::validation, "label body must be an object");
      const std::string user = get_string(body, "user", "label");
      const std::string edit = get_string(body, "edit_id", "label");
      const Label label = parse_label(get_string(body, "label", "label"));
      const ReviewProgress p = svc->submit_label(user, edit, label);
      send_json(res, {{"ok", true}, {"progress", progress_json(p)}});
    });
  });

  svr.Get("/api/agreement", [svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      const AgreementReport report = svc->agreement();
      if (report.empty()) {
        send_json(res, {{"empty", true}, {"items", 0}});
      } else {
        json body = agreement_to_json(report);
        body["empty"] = false;
        send_json(res, body);
      }
    });
  });

  svr.Get(R"(/api/item/([^/]+))", [svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, item_to_json(svc->item(req.matches[1]))); });
  });

  if (!images_dir.empty()) svr.set_mount_point("/images", images_dir.string());
  if (!ui_dir.empty()) {
    if (!svr.set_mount_point("/", ui_dir.string())) {
      throw Error(ErrorKind::not_found, "UI directory " + ui_dir.string() + " does not exist");
    }
  } else {
    svr.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ReviewServer::listen() { return impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace cvf
