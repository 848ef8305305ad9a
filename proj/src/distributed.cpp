// Copyright 2026 The ES-ENAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "esenas/distributed.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <set>
#include <thread>

#include "esenas/errors.hpp"
#include "esenas/rng.hpp"

namespace esenas {
namespace {

using json = nlohmann::json;

void check_keys(const json& doc, const std::set<std::string>& required,
                const std::set<std::string>& optional = {}) {
  for (const auto& [key, value] : doc.items()) {
    if (!required.contains(key) && !optional.contains(key))
      throw SchemaViolation("unknown message key '" + key + "'");
  }
  for (const auto& key : required) {
    if (!doc.contains(key))
      throw SchemaViolation("missing message key '" + key + "'");
  }
}

std::string role_name(RequestRole role) {
  return role == RequestRole::kPerturbed ? "perturbed" : "eval";
}

RequestRole role_from_name(const std::string& name) {
  if (name == "perturbed") return RequestRole::kPerturbed;
  if (name == "eval") return RequestRole::kEval;
  throw SchemaViolation("unknown request role '" + name + "'");
}

json to_wire(const EvalRequest& m) {
  json doc;
  doc["type"] = "request";
  doc["iteration"] = m.iteration;
  doc["request_id"] = m.request_id;
  doc["genome"] = m.genome;
  doc["theta_version"] = m.theta_version;
  if (m.perturbation_seed) doc["seed"] = *m.perturbation_seed;
  doc["sign"] = m.sign;
  doc["role"] = role_name(m.role);
  return doc;
}

EvalRequest request_from_wire(const json& doc) {
  check_keys(doc,
             {"genome", "iteration", "request_id", "role", "sign",
              "theta_version", "type"},
             {"seed"});
  EvalRequest m;
  m.iteration = doc["iteration"].get<int>();
  m.request_id = doc["request_id"].get<int>();
  m.genome = doc["genome"].get<std::string>();
  m.theta_version = doc["theta_version"].get<int>();
  if (doc.contains("seed")) m.perturbation_seed = doc["seed"].get<std::uint64_t>();
  m.sign = doc["sign"].get<int>();
  m.role = role_from_name(doc["role"].get<std::string>());
  if ((m.role == RequestRole::kEval) != (m.sign == 0) ||
      (m.role == RequestRole::kEval) != !m.perturbation_seed.has_value())
    throw SchemaViolation("eval role requires sign 0 and no seed");
  return m;
}

json to_wire(const EvalResult& m) {
  json doc;
  doc["type"] = "result";
  doc["request_id"] = m.request_id;
  doc["objective"] = m.objective;
  doc["eval_objective"] = m.eval_objective;
  doc["steps"] = m.steps;
  doc["norm_count"] = m.norm_count;
  doc["norm_mean"] = m.norm_mean;
  doc["norm_m2"] = m.norm_m2;
  doc["worker_id"] = m.worker_id;
  doc["status"] = m.status == ResultStatus::kOk ? "ok" : "failed";
  if (m.status == ResultStatus::kFailed) doc["reason"] = m.reason;
  return doc;
}

EvalResult result_from_wire(const json& doc) {
  check_keys(doc,
             {"eval_objective", "norm_count", "norm_m2", "norm_mean",
              "objective", "request_id", "status", "steps", "type",
              "worker_id"},
             {"reason"});
  EvalResult m;
  m.request_id = doc["request_id"].get<int>();
  m.objective = doc["objective"].get<double>();
  m.eval_objective = doc["eval_objective"].get<double>();
  m.steps = doc["steps"].get<long long>();
  m.norm_count = doc["norm_count"].get<std::uint64_t>();
  m.norm_mean = doc["norm_mean"].get<std::vector<double>>();
  m.norm_m2 = doc["norm_m2"].get<std::vector<double>>();
  m.worker_id = doc["worker_id"].get<int>();
  const std::string status = doc["status"].get<std::string>();
  if (status == "ok") {
    m.status = ResultStatus::kOk;
  } else if (status == "failed") {
    m.status = ResultStatus::kFailed;
    m.reason = doc.value("reason", "");
  } else {
    throw SchemaViolation("unknown result status '" + status + "'");
  }
  return m;
}

}  // namespace

std::string encode_message(const Message& msg) {
  json doc = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Handshake>) {
          return {{"type", "hello"},
                  {"protocol_version", m.protocol_version},
                  {"space", m.space}};
        } else if constexpr (std::is_same_v<T, WorkerConfig>) {
          return {{"type", "config"},
                  {"worker_id", m.worker_id},
                  {"environment", m.environment},
                  {"coding", m.coding},
                  {"dims", m.dims}};
        } else if constexpr (std::is_same_v<T, ThetaUpdate>) {
          return {{"type", "theta"},      {"version", m.version},
                  {"sigma", m.sigma},     {"theta", m.theta},
                  {"norm_count", m.norm_count}, {"norm_mean", m.norm_mean},
                  {"norm_m2", m.norm_m2}};
        } else if constexpr (std::is_same_v<T, EvalRequest>) {
          return to_wire(m);
        } else if constexpr (std::is_same_v<T, EvalResult>) {
          return to_wire(m);
        } else {
          return {{"type", "shutdown"}};
        }
      },
      msg);
  return doc.dump() + "\n";
}

Message decode_message(const std::string& line) {
  json doc;
  try {
    std::string trimmed = line;
    while (!trimmed.empty() && (trimmed.back() == '\n' || trimmed.back() == '\r'))
      trimmed.pop_back();
    doc = json::parse(trimmed);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed message: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("type"))
    throw SchemaViolation("message has no type");
  const std::string type = doc["type"].get<std::string>();
  if (type == "hello") {
    check_keys(doc, {"protocol_version", "space", "type"});
    Handshake m;
    m.protocol_version = doc["protocol_version"].get<int>();
    m.space = doc["space"].get<std::string>();
    return m;
  }
  if (type == "config") {
    check_keys(doc, {"coding", "dims", "environment", "type", "worker_id"});
    WorkerConfig m;
    m.worker_id = doc["worker_id"].get<int>();
    m.environment = doc["environment"];
    m.coding = doc["coding"];
    m.dims = doc["dims"];
    return m;
  }
  if (type == "theta") {
    check_keys(doc, {"norm_count", "norm_m2", "norm_mean", "sigma", "theta",
                     "type", "version"});
    ThetaUpdate m;
    m.version = doc["version"].get<int>();
    m.sigma = doc["sigma"].get<double>();
    m.theta = doc["theta"].get<std::vector<double>>();
    m.norm_count = doc["norm_count"].get<std::uint64_t>();
    m.norm_mean = doc["norm_mean"].get<std::vector<double>>();
    m.norm_m2 = doc["norm_m2"].get<std::vector<double>>();
    return m;
  }
  if (type == "request") return request_from_wire(doc);
  if (type == "result") return result_from_wire(doc);
  if (type == "shutdown") {
    check_keys(doc, {"type"});
    return Shutdown{};
  }
  throw SchemaViolation("unknown message type '" + type + "'");
}

nlohmann::json coding_to_json(const WeightCoding& coding) {
  return {{"kind", coding_kind_name(coding.kind)},
          {"hidden_sizes", coding.hidden_sizes},
          {"num_colors", coding.num_colors},
          {"num_edges", coding.num_edges},
          {"boolean_mode", coding.boolean_mode},
          {"mask_alpha", coding.mask_alpha},
          {"nonlinearity_search", coding.nonlinearity_search}};
}

WeightCoding coding_from_json(const nlohmann::json& doc) {
  WeightCoding coding;
  coding.kind = coding_kind_from_name(doc.at("kind").get<std::string>());
  coding.hidden_sizes = doc.value("hidden_sizes", std::vector<int>{});
  coding.num_colors = doc.value("num_colors", 0);
  coding.num_edges = doc.value("num_edges", 0);
  coding.boolean_mode = doc.value("boolean_mode", false);
  coding.mask_alpha = doc.value("mask_alpha", 0.01);
  coding.nonlinearity_search = doc.value("nonlinearity_search", false);
  return coding;
}

nlohmann::json dims_to_json(const Dims& dims) {
  return {{"state_dim", dims.state_dim}, {"action_dim", dims.action_dim}};
}

Dims dims_from_json(const nlohmann::json& doc) {
  return {doc.at("state_dim").get<int>(), doc.at("action_dim").get<int>()};
}

WorkerContext::WorkerContext(std::unique_ptr<Environment> environment,
                             WeightCoding wc, Dims d)
    : env(std::move(environment)),
      coding(std::move(wc)),
      dims(d),
      spec_(make_search_space(coding, dims)) {}

WorkerContext::WorkerContext(const WorkerContext& other)
    : env(other.env->clone()),
      coding(other.coding),
      dims(other.dims),
      spec_(other.spec_),
      env_json_(other.env_json_) {}

WorkerContext WorkerContext::from_json(const nlohmann::json& env_doc,
                                       const nlohmann::json& coding_doc,
                                       const nlohmann::json& dims_doc) {
  auto env = make_environment(env_doc.at("name").get<std::string>(),
                              env_doc.value("params", nlohmann::json::object()),
                              env_doc.value("seed", std::uint64_t{0}));
  WorkerContext ctx(std::move(env), coding_from_json(coding_doc),
                    dims_from_json(dims_doc));
  ctx.set_env_json(env_doc);
  return ctx;
}

EvalResult evaluate_request(const EvalRequest& request, const WorkerContext& ctx,
                            const ThetaSnapshot& snapshot, int worker_id) {
  EvalResult result;
  result.request_id = request.request_id;
  result.worker_id = worker_id;
  try {
    if (request.theta_version != snapshot.version)
      throw Error("request theta_version does not match snapshot");

    std::vector<double> theta = snapshot.theta;
    if (request.perturbation_seed) {
      const auto g = gaussian_vector(*request.perturbation_seed, theta.size());
      for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] += request.sign * snapshot.sigma * g[i];
    }

    const Genome genome = deserialize(request.genome, ctx.spec());
    const PolicyGraph graph = materialize(genome, theta, ctx.coding, ctx.dims);
    auto env = ctx.env->clone();
    const std::uint64_t episode_seed =
        mix_seeds(static_cast<std::uint64_t>(request.iteration),
                  static_cast<std::uint64_t>(request.request_id));
    const bool training = request.role == RequestRole::kPerturbed;
    const Trajectory traj =
        rollout(*env, graph, snapshot.normalizer, training, episode_seed);

    result.objective = traj.total_training_reward;
    result.eval_objective = traj.total_eval_reward;
    result.steps = traj.steps_taken;
    result.norm_count = traj.normalizer_partial.count();
    result.norm_mean = traj.normalizer_partial.mean();
    result.norm_m2 = traj.normalizer_partial.m2();
    result.status = ResultStatus::kOk;
  } catch (const std::exception& e) {
    result = EvalResult{};
    result.request_id = request.request_id;
    result.worker_id = worker_id;
    result.status = ResultStatus::kFailed;
    result.reason = e.what();
  }
  return result;
}

ThreadBackend::ThreadBackend(WorkerContext ctx, int num_threads)
    : ctx_(std::move(ctx)), num_threads_(std::max(1, num_threads)) {}

std::vector<EvalResult> ThreadBackend::dispatch(
    const std::vector<EvalRequest>& requests, const ThetaSnapshot& snapshot) {
  std::vector<EvalResult> results(requests.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    // Results are a pure function of the request, so worker_id is fixed at 0
    // to keep the result multiset independent of scheduling.
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) break;
      results[i] = evaluate_request(requests[i], ctx_, snapshot, /*worker_id=*/0);
    }
  };
  if (num_threads_ == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(num_threads_);
    for (int t = 0; t < num_threads_; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return results;
}

// ---------------------------------------------------------------------------
// Process-separated backend.

namespace {

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(std::string("worker channel write failed: ") +
                  std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

class FdLineReader {
 public:
  explicit FdLineReader(int fd = -1) : fd_(fd) {}
  void reset(int fd) {
    fd_ = fd;
    buffer_.clear();
  }

  // Blocking read of one newline-terminated line. Throws on EOF.
  std::string read_line() {
    while (true) {
      const auto pos = buffer_.find('\n');
      if (pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos + 1);
        buffer_.erase(0, pos + 1);
        return line;
      }
      char chunk[4096];
      const ssize_t n = ::read(fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(std::string("worker channel read failed: ") +
                    std::strerror(errno));
      }
      if (n == 0) throw Error("worker channel closed");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buffer_;
};

}  // namespace

struct ProcessBackend::WorkerHandle {
  pid_t pid = -1;
  int read_fd = -1;
  int write_fd = -1;
  FdLineReader reader;
  int id = 0;

  ~WorkerHandle() {
    if (write_fd >= 0) {
      try {
        write_all(write_fd, encode_message(Shutdown{}));
      } catch (...) {
      }
      ::close(write_fd);
    }
    if (read_fd >= 0 && read_fd != write_fd) ::close(read_fd);
    if (pid > 0) {
      int status = 0;
      ::waitpid(pid, &status, 0);
    }
  }
};

void worker_loop(int in_fd, int out_fd) {
  FdLineReader reader(in_fd);
  std::optional<WorkerContext> ctx;
  ThetaSnapshot snapshot;
  int worker_id = 0;

  while (true) {
    std::string line;
    try {
      line = reader.read_line();
    } catch (const Error&) {
      return;  // channel closed
    }
    const Message msg = decode_message(line);
    if (std::holds_alternative<Shutdown>(msg)) return;
    if (const auto* hello = std::get_if<Handshake>(&msg)) {
      if (hello->protocol_version != kProtocolVersion)
        throw SchemaViolation("protocol version mismatch");
      continue;  // acknowledged after config, once the space hash is known
    }
    if (const auto* config = std::get_if<WorkerConfig>(&msg)) {
      ctx.emplace(WorkerContext::from_json(config->environment, config->coding,
                                           config->dims));
      worker_id = config->worker_id;
      Handshake ack;
      ack.space = ctx->spec().space_hash_hex();
      write_all(out_fd, encode_message(ack));
      continue;
    }
    if (const auto* theta = std::get_if<ThetaUpdate>(&msg)) {
      snapshot.version = theta->version;
      snapshot.sigma = theta->sigma;
      snapshot.theta = theta->theta;
      RunningNormalizer norm(theta->norm_mean.size());
      if (theta->norm_count > 0) {
        RunningNormalizer partial = RunningNormalizer::from_moments(
            theta->norm_count, theta->norm_mean, theta->norm_m2);
        norm.merge(partial);
      }
      snapshot.normalizer = norm;
      continue;
    }
    if (const auto* request = std::get_if<EvalRequest>(&msg)) {
      if (!ctx) throw Error("request received before worker config");
      const EvalResult result =
          evaluate_request(*request, *ctx, snapshot, worker_id);
      write_all(out_fd, encode_message(result));
      continue;
    }
  }
}

ProcessBackend::ProcessBackend(const WorkerContext& ctx, int num_workers,
                               ProcessTransport transport) {
  if (num_workers < 1) throw RangeError("need at least one worker process");

  int listen_fd = -1;
  unsigned short port = 0;
  if (transport == ProcessTransport::kTcp) {
    listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd < 0) throw Error("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
        ::listen(listen_fd, num_workers) < 0) {
      ::close(listen_fd);
      throw Error("bind/listen failed");
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
    port = addr.sin_port;
  }

  for (int w = 0; w < num_workers; ++w) {
    auto handle = std::make_unique<WorkerHandle>();
    handle->id = w;

    if (transport == ProcessTransport::kPipes) {
      int to_worker[2], from_worker[2];
      if (::pipe(to_worker) != 0 || ::pipe(from_worker) != 0)
        throw Error("pipe() failed");
      const pid_t pid = ::fork();
      if (pid < 0) throw Error("fork() failed");
      if (pid == 0) {
        ::close(to_worker[1]);
        ::close(from_worker[0]);
        if (listen_fd >= 0) ::close(listen_fd);
        worker_loop(to_worker[0], from_worker[1]);
        ::_exit(0);
      }
      ::close(to_worker[0]);
      ::close(from_worker[1]);
      handle->pid = pid;
      handle->write_fd = to_worker[1];
      handle->read_fd = from_worker[0];
    } else {
      const pid_t pid = ::fork();
      if (pid < 0) throw Error("fork() failed");
      if (pid == 0) {
        ::close(listen_fd);
        const int sock = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = port;
        if (::connect(sock, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
          ::_exit(1);
        worker_loop(sock, sock);
        ::_exit(0);
      }
      const int conn = ::accept(listen_fd, nullptr, nullptr);
      if (conn < 0) throw Error("accept() failed");
      handle->pid = pid;
      handle->write_fd = conn;
      handle->read_fd = conn;
    }
    handle->reader.reset(handle->read_fd);

    Handshake hello;
    hello.space = ctx.spec().space_hash_hex();
    write_all(handle->write_fd, encode_message(hello));
    WorkerConfig config;
    config.worker_id = w;
    config.environment = ctx.env_json();
    config.coding = coding_to_json(ctx.coding);
    config.dims = dims_to_json(ctx.dims);
    write_all(handle->write_fd, encode_message(config));

    const Message ack = decode_message(handle->reader.read_line());
    const auto* worker_hello = std::get_if<Handshake>(&ack);
    if (worker_hello == nullptr ||
        worker_hello->protocol_version != kProtocolVersion)
      throw Error("worker handshake failed");
    if (worker_hello->space != ctx.spec().space_hash_hex())
      throw SpaceMismatch("worker rebuilt a different search space");

    workers_.push_back(std::move(handle));
  }
  if (listen_fd >= 0) ::close(listen_fd);
}

ProcessBackend::~ProcessBackend() = default;

std::vector<EvalResult> ProcessBackend::dispatch(
    const std::vector<EvalRequest>& requests, const ThetaSnapshot& snapshot) {
  ThetaUpdate update;
  update.version = snapshot.version;
  update.sigma = snapshot.sigma;
  update.theta = snapshot.theta;
  update.norm_count = snapshot.normalizer.count();
  update.norm_mean = snapshot.normalizer.mean();
  update.norm_m2 = snapshot.normalizer.m2();
  const std::string update_line = encode_message(update);

  std::vector<EvalResult> results(requests.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pumps;
  std::vector<std::exception_ptr> errors(workers_.size());
  pumps.reserve(workers_.size());
  for (std::size_t w = 0; w < workers_.size(); ++w) {
    pumps.emplace_back([&, w] {
      try {
        WorkerHandle& handle = *workers_[w];
        write_all(handle.write_fd, update_line);
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= requests.size()) break;
          write_all(handle.write_fd, encode_message(requests[i]));
          const Message msg = decode_message(handle.reader.read_line());
          const auto* result = std::get_if<EvalResult>(&msg);
          if (result == nullptr) throw Error("expected a result message");
          results[i] = *result;
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pumps) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::unique_ptr<Backend> make_backend(const std::string& name,
                                      const WorkerContext& ctx,
                                      int num_workers) {
  if (name == "threads")
    return std::make_unique<ThreadBackend>(
        ctx, std::min<int>(num_workers,
                           std::max(1u, std::thread::hardware_concurrency())));
  if (name == "serial") return std::make_unique<ThreadBackend>(ctx, 1);
  if (name == "process")
    return std::make_unique<ProcessBackend>(ctx, num_workers,
                                            ProcessTransport::kPipes);
  if (name == "tcp")
    return std::make_unique<ProcessBackend>(ctx, num_workers,
                                            ProcessTransport::kTcp);
  throw ConfigError("unknown backend '" + name + "'");
}

}  // namespace esenas
