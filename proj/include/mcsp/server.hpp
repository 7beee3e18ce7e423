#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "mcsp/adaptive.hpp"
#include "mcsp/color.hpp"
#include "mcsp/features.hpp"
#include "mcsp/io.hpp"
#include "mcsp/partition.hpp"

namespace mcsp {

/// Client-side problem; answered with status 400.
class RequestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// The single image session behind the HTTP API. Handlers are plain
/// functions of (request, state) so they can be exercised without sockets.
class Session {
 public:
  Session(Image image, PriorPartition prior, FeatureStack features = {}, std::optional<SaliencyMap> saliency = {});

  /// {width, height, objects: [{id, area, bbox: [x0, y0, x1, y1]}]}, bbox inclusive.
  std::string describe() const;
  Bytes image_png() const;

  /// Body {k, lambda_s?, lambda_c?, factors?: {id: r}, va_ratio?, iters?, seed?}.
  /// Response {k_realized, labels_rle: [[label, run], ...], boundaries: [[x, y], ...],
  /// per_object_counts: {id: n}} where the counts are the seed budget per object.
  std::string segment(const std::string& body, int workers = 1) const;

  /// Replaces the prior from SPL1 labels or an SPM1 mask stack.
  void replace_prior(const std::string& body);

  const PriorPartition& prior() const { return prior_; }
  const Image& image() const { return image_; }

 private:
  Image image_;
  PriorPartition prior_;
  FeatureStack features_;
  std::optional<SaliencyMap> saliency_;
};

/// Routes requests onto a session. Requests are serialized; a prior upload
/// that arrives while another request is running is refused with 409.
class Api {
 public:
  explicit Api(Session session, int workers = 1) : session_(std::move(session)), workers_(workers) {}

  Response handle(const std::string& method, const std::string& path, const std::string& body);

 private:
  Session session_;
  int workers_;
  std::mutex mutex_;
};

/// HTTP front end for an Api.
class HttpServer {
 public:
  explicit HttpServer(Api& api);
  ~HttpServer();

  /// Binds host:port; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mcsp
