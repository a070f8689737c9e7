// Copyright 2026 The gencmr Authors.
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

#include "gencmr/gsv.hpp"

// After gsv.hpp: httplib brings in <resolv.h>, whose _res macro breaks Eigen.
#include <httplib.h>
#include <json.hpp>

#include "gencmr/error.hpp"

namespace gencmr {

using nlohmann::json;

HttpVerifier::HttpVerifier(std::string url, std::chrono::milliseconds timeout) : timeout_(timeout) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    throw Error(ErrorCode::kInvalidArgument, "verifier URL must be http://host[:port]/path, got '" + url + "'");
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_begin);
  path_ = path_begin == std::string::npos ? "/" : url.substr(path_begin);
}

std::vector<std::optional<double>> HttpVerifier::score(std::string_view query,
                                                       std::span<const Candidate> candidates,
                                                       Direction direction) const {
  json ids = json::array();
  for (const auto& c : candidates) ids.push_back(c.target_id);
  const json request = {{"prompt", build_prompt(query, candidates, direction)},
                        {"candidate_ids", ids},
                        {"query", std::string(query)}};

  httplib::Client client(scheme_host_port_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  const auto response = client.Post(path_, request.dump(), "application/json");
  if (!response) {
    throw Error(ErrorCode::kVerifierFailure, "request to " + scheme_host_port_ + path_ + " failed: " +
                                                 httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw Error(ErrorCode::kVerifierFailure, "HTTP status " + std::to_string(response->status));
  }
  std::vector<std::optional<double>> out;
  try {
    const json reply = json::parse(response->body);
    const json& scores = reply.at("scores");
    if (!scores.is_array() || scores.size() != candidates.size()) {
      throw Error(ErrorCode::kVerifierFailure, "reply must carry one score per candidate");
    }
    for (const auto& s : scores) {
      if (s.is_number()) {
        out.emplace_back(s.get<double>());
      } else {
        out.emplace_back(std::nullopt);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kVerifierFailure, std::string("malformed reply: ") + e.what());
  }
  return out;
}

}  // namespace gencmr
