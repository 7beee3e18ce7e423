#include "mcsp/server.hpp"

#include <algorithm>
#include <cstring>

#include <httplib.h>
#include <json.hpp>

#include "mcsp/aggregation.hpp"
#include "mcsp/metrics.hpp"
#include "mcsp/pipeline.hpp"

namespace mcsp {
namespace {

using Json = nlohmann::ordered_json;

double number_field(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw RequestError(std::string(key) + " must be a number");
  return j[key].get<double>();
}

int integer_field(const Json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw RequestError(std::string(key) + " must be an integer");
  const auto v = j[key].get<std::int64_t>();
  if (v < 0 || v > 1'000'000) throw RequestError(std::string(key) + " out of range");
  return static_cast<int>(v);
}

std::uint32_t parse_object_id(const std::string& key) {
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != key.size() || v >= kUncertain) throw RequestError("invalid object id: " + key);
  return static_cast<std::uint32_t>(v);
}

}  // namespace

Session::Session(Image image, PriorPartition prior, FeatureStack features, std::optional<SaliencyMap> saliency)
    : image_(std::move(image)), prior_(std::move(prior)), features_(std::move(features)), saliency_(std::move(saliency)) {
  if (prior_.size() == 0) prior_ = PriorPartition(LabelRaster::Constant(image_.height(), image_.width(), kUncertain));
  if (prior_.dims() != image_.dims()) throw std::invalid_argument("prior dimensions do not match image");
  if (saliency_ && dims_of(*saliency_) != image_.dims()) throw std::invalid_argument("saliency dimensions do not match image");
}

std::string Session::describe() const {
  const Dims d = image_.dims();
  std::map<std::uint32_t, std::array<int, 4>> boxes;
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      const std::uint32_t id = prior_.labels()(y, x);
      if (id == kUncertain) continue;
      auto [it, fresh] = boxes.try_emplace(id, std::array<int, 4>{x, y, x, y});
      if (!fresh) {
        auto& b = it->second;
        b = {std::min(b[0], x), std::min(b[1], y), std::max(b[2], x), std::max(b[3], y)};
      }
    }
  Json objects = Json::array();
  for (const auto& [id, area] : prior_.areas())
    objects.push_back({{"id", id}, {"area", area}, {"bbox", boxes.at(id)}});
  return Json{{"width", d.width}, {"height", d.height}, {"objects", objects}}.dump();
}

Bytes Session::image_png() const { return encode_png(image_); }

std::string Session::segment(const std::string& body, int workers) const {
  Json req;
  try {
    req = Json::parse(body);
  } catch (const Json::parse_error&) {
    throw RequestError("malformed JSON body");
  }
  if (!req.is_object()) throw RequestError("body must be a JSON object");
  if (!req.contains("k")) throw RequestError("k is required");

  SegmentOptions opt;
  opt.cluster.k = integer_field(req, "k", 0);
  opt.cluster.lambda_s = number_field(req, "lambda_s", opt.cluster.lambda_s);
  opt.cluster.lambda_c = number_field(req, "lambda_c", opt.cluster.lambda_c);
  opt.cluster.iterations = integer_field(req, "iters", opt.cluster.iterations);
  opt.cluster.rng_seed = static_cast<std::uint64_t>(integer_field(req, "seed", 0));
  opt.cluster.workers = workers;
  try {
    opt.cluster.validate();
  } catch (const std::invalid_argument& e) {
    throw RequestError(e.what());
  }

  FactorMap factors;
  if (req.contains("factors") && !req["factors"].is_null()) {
    if (!req["factors"].is_object()) throw RequestError("factors must be an object");
    for (const auto& [key, value] : req["factors"].items()) {
      if (!value.is_number()) throw RequestError("factor must be a number");
      const std::uint32_t id = parse_object_id(key);
      if (!prior_.areas().contains(id)) throw RequestError("unknown object id: " + key);
      const double r = value.get<double>();
      if (!(r > 0.0)) throw RequestError("factor must be positive");
      factors[id] = r;
    }
  }
  if (req.contains("va_ratio") && !req["va_ratio"].is_null()) {
    if (!factors.empty()) throw RequestError("factors and va_ratio are mutually exclusive");
    if (!saliency_) throw RequestError("no saliency map loaded");
    const double r = number_field(req, "va_ratio", 1.0);
    if (!(r >= 1.0)) throw RequestError("va_ratio must be at least 1");
    opt.allocation = AttentionAllocation{*saliency_, r};
  } else if (!factors.empty()) {
    opt.allocation = FactorAllocation{factors};
  }

  const FeatureStack deep = features_.empty() ? FeatureStack::none(image_.dims()) : features_;
  const Segmentation seg = mcsp::segment(image_, deep, prior_, opt);
  const LabelRaster& labels = seg.labeling().labels;

  Json rle = Json::array();
  for (const auto& [label, run] : rle_encode(labels)) rle.push_back({label, run});
  Json edges = Json::array();
  const BinaryRaster b = boundary_map(labels);
  for (int y = 0; y < b.rows(); ++y)
    for (int x = 0; x < b.cols(); ++x)
      if (b(y, x)) edges.push_back({x, y});
  Json counts = Json::object();
  for (const auto& [id, n] : seg.allocated) counts[std::to_string(id)] = n;

  return Json{{"k_realized", seg.k_realized()}, {"labels_rle", rle}, {"boundaries", edges}, {"per_object_counts", counts}}
      .dump();
}

void Session::replace_prior(const std::string& body) {
  const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(body.data()), body.size());
  try {
    if (body.size() >= 4 && std::memcmp(body.data(), "SPM1", 4) == 0) {
      const MaskStack stack = decode_spm1(bytes);
      if (stack.dims != image_.dims()) throw RequestError("mask dimensions do not match image");
      prior_ = aggregate(stack, image_.dims(), AggregationConfig::defaults_for(image_.dims()));
      return;
    }
    PriorPartition next(decode_spl1(bytes));
    if (next.dims() != image_.dims()) throw RequestError("prior dimensions do not match image");
    prior_ = std::move(next);
  } catch (const FormatError& e) {
    throw RequestError(e.what());
  }
}

Response Api::handle(const std::string& method, const std::string& path, const std::string& body) {
  const auto error = [](int status, const std::string& message) {
    return Response{status, "application/json", Json{{"error", message}}.dump()};
  };
  const bool mutation = method == "POST" && path == "/api/prior";
  std::unique_lock lock(mutex_, std::defer_lock);
  if (mutation) {
    if (!lock.try_lock()) return error(409, "another request is modifying the session");
  } else {
    lock.lock();
  }
  try {
    if (method == "GET" && path == "/api/session") return {200, "application/json", session_.describe()};
    if (method == "GET" && path == "/api/image") {
      const Bytes png = session_.image_png();
      return {200, "image/png", std::string(png.begin(), png.end())};
    }
    if (method == "POST" && path == "/api/segment") return {200, "application/json", session_.segment(body, workers_)};
    if (mutation) {
      session_.replace_prior(body);
      return {200, "application/json", session_.describe()};
    }
    return error(404, "no route for " + method + " " + path);
  } catch (const RequestError& e) {
    return error(400, e.what());
  } catch (const InsufficientBudget& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Api& api) : impl_(std::make_unique<Impl>()) {
  const auto route = [&api](const char* method) {
    return [&api, method](const httplib::Request& req, httplib::Response& res) {
      const Response r = api.handle(method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
  };
  for (const char* path : {"/api/session", "/api/image"}) impl_->server.Get(path, route("GET"));
  for (const char* path : {"/api/segment", "/api/prior"}) impl_->server.Post(path, route("POST"));
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace mcsp
