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

#ifndef ESENAS_DISTRIBUTED_HPP_
#define ESENAS_DISTRIBUTED_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "esenas/environments.hpp"
#include "esenas/normalizer.hpp"
#include "esenas/policy.hpp"
#include "esenas/search_space.hpp"

namespace esenas {

inline constexpr int kProtocolVersion = 1;

enum class RequestRole { kPerturbed, kEval };
enum class ResultStatus { kOk, kFailed };

// Aggregator -> worker: evaluate one (genome, perturbed-theta) pair. The
// perturbation travels as a seed plus sign; the worker reconstructs the
// Gaussian direction locally, so the message stays constant-size.
struct EvalRequest {
  int iteration = 0;
  int request_id = 0;
  std::string genome;  // canonical genome string
  int theta_version = 0;
  std::optional<std::uint64_t> perturbation_seed;  // absent for eval role
  int sign = 0;                                    // +1 / -1 / 0
  RequestRole role = RequestRole::kEval;

  bool operator==(const EvalRequest&) const = default;
};

// Worker -> aggregator: the scalar objective plus partial normalizer
// statistics from the rollout.
struct EvalResult {
  int request_id = 0;
  double objective = 0.0;       // training objective, alive bonus excluded
  double eval_objective = 0.0;  // alive bonus included
  long long steps = 0;
  std::uint64_t norm_count = 0;
  std::vector<double> norm_mean;
  std::vector<double> norm_m2;
  int worker_id = 0;
  ResultStatus status = ResultStatus::kOk;
  std::string reason;  // non-empty iff FAILED

  bool operator==(const EvalResult&) const = default;
};

struct Handshake {
  int protocol_version = kProtocolVersion;
  std::string space;  // 16 hex chars
  bool operator==(const Handshake&) const = default;
};

// Per-iteration broadcast of the shared weights and normalizer snapshot.
struct ThetaUpdate {
  int version = 0;
  double sigma = 0.0;
  std::vector<double> theta;
  std::uint64_t norm_count = 0;
  std::vector<double> norm_mean;
  std::vector<double> norm_m2;
  bool operator==(const ThetaUpdate&) const = default;
};

struct Shutdown {
  bool operator==(const Shutdown&) const = default;
};

// Worker startup configuration: how to rebuild env, coding and dims locally.
struct WorkerConfig {
  int worker_id = 0;
  nlohmann::json environment;  // {"name":..., "params":..., "seed":...}
  nlohmann::json coding;
  nlohmann::json dims;
  bool operator==(const WorkerConfig&) const = default;
};

using Message = std::variant<Handshake, WorkerConfig, ThetaUpdate, EvalRequest,
                             EvalResult, Shutdown>;

// Canonical wire form: UTF-8 JSON with lexicographically sorted keys, no
// insignificant whitespace, one newline-terminated message per line.
// decode_message rejects unknown keys and malformed fields.
std::string encode_message(const Message& msg);
Message decode_message(const std::string& line);

nlohmann::json coding_to_json(const WeightCoding& coding);
WeightCoding coding_from_json(const nlohmann::json& doc);
nlohmann::json dims_to_json(const Dims& dims);
Dims dims_from_json(const nlohmann::json& doc);

// Everything a worker needs to evaluate requests.
struct WorkerContext {
  std::unique_ptr<Environment> env;
  WeightCoding coding;
  Dims dims;

  WorkerContext(std::unique_ptr<Environment> environment, WeightCoding wc,
                Dims d);
  WorkerContext(const WorkerContext& other);

  const SearchSpaceSpec& spec() const { return spec_; }

  static WorkerContext from_json(const nlohmann::json& env_doc,
                                 const nlohmann::json& coding_doc,
                                 const nlohmann::json& dims_doc);
  nlohmann::json env_json() const { return env_json_; }

 private:
  SearchSpaceSpec spec_;
  nlohmann::json env_json_;  // retained for process-backend worker config
  friend struct WorkerContextAccess;
  void set_env_json(nlohmann::json doc) { env_json_ = std::move(doc); }
};

struct ThetaSnapshot {
  int version = 0;
  double sigma = 0.0;
  std::vector<double> theta;
  RunningNormalizer normalizer;
};

// Pure per-request evaluation, shared by every backend. Never throws:
// evaluation failures come back as FAILED results.
EvalResult evaluate_request(const EvalRequest& request,
                            const WorkerContext& ctx,
                            const ThetaSnapshot& snapshot, int worker_id);

// Backend contract: one result per request, matched by request_id, returned
// only when all results are in. The result multiset must not depend on
// parallelism or scheduling.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::vector<EvalResult> dispatch(
      const std::vector<EvalRequest>& requests,
      const ThetaSnapshot& snapshot) = 0;
};

class ThreadBackend : public Backend {
 public:
  ThreadBackend(WorkerContext ctx, int num_threads);
  std::vector<EvalResult> dispatch(const std::vector<EvalRequest>& requests,
                                   const ThetaSnapshot& snapshot) override;

 private:
  WorkerContext ctx_;
  int num_threads_;
};

enum class ProcessTransport { kPipes, kTcp };

// Process-separated workers speaking the newline-delimited JSON protocol,
// over stdio pipes or a loopback TCP connection per worker.
class ProcessBackend : public Backend {
 public:
  ProcessBackend(const WorkerContext& ctx, int num_workers,
                 ProcessTransport transport = ProcessTransport::kPipes);
  ~ProcessBackend() override;

  ProcessBackend(const ProcessBackend&) = delete;
  ProcessBackend& operator=(const ProcessBackend&) = delete;

  std::vector<EvalResult> dispatch(const std::vector<EvalRequest>& requests,
                                   const ThetaSnapshot& snapshot) override;

 private:
  struct WorkerHandle;
  std::vector<std::unique_ptr<WorkerHandle>> workers_;
};

// Worker side of the protocol: reads messages from in_fd, writes results to
// out_fd, returns on Shutdown or EOF.
void worker_loop(int in_fd, int out_fd);

std::unique_ptr<Backend> make_backend(const std::string& name,
                                      const WorkerContext& ctx,
                                      int num_workers);

}  // namespace esenas

#endif  // ESENAS_DISTRIBUTED_HPP_
