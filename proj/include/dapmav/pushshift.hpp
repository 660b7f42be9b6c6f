// Copyright 2026 The DAPMAV Authors.
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
//
// Pushshift-compatible HTTP client. Paginates
// GET {base_url}/reddit/search/{submission|comment} by created_utc until an
// empty page, deduplicates by id, retries 429/5xx with exponential backoff,
// and delivers posts in (created_utc, id) order. Responses can be cached on
// disk (cache_dir, or the DAPMAV_CACHE_DIR environment variable).

#ifndef DAPMAV_PUSHSHIFT_HPP_
#define DAPMAV_PUSHSHIFT_HPP_

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "dapmav/ingest.hpp"

namespace dapmav {

struct FetchOptions {
  std::size_t page_size = 100;  // 1..500
  int max_retries = 5;
  int backoff_initial_ms = 100;
  int timeout_sec = 10;
  std::optional<std::filesystem::path> cache_dir;

  static FetchOptions with_env_cache() {
    FetchOptions opts;
    if (const char* dir = std::getenv("DAPMAV_CACHE_DIR"); dir && *dir)
      opts.cache_dir = std::filesystem::path(dir);
    return opts;
  }
};

struct FetchResult {
  std::vector<RawPost> posts;
  std::size_t requests = 0;  // HTTP requests issued, empty-page probe included
  std::size_t retries = 0;
  std::size_t cache_hits = 0;
};

namespace detail {

inline std::string fetch_page(httplib::Client& client,
                              const std::string& base_url,
                              const std::string& path,
                              const httplib::Params& params,
                              const FetchOptions& opts, FetchResult& result) {
  const std::string query = httplib::detail::params_to_query_str(params);
  const std::string url = base_url + path + "?" + query;

  std::filesystem::path cache_file;
  if (opts.cache_dir) {
    cache_file = *opts.cache_dir / (fnv1a64_hex(url) + ".json");
    if (std::filesystem::exists(cache_file)) {
      ++result.cache_hits;
      return read_text_file(cache_file);
    }
  }

  int backoff_ms = opts.backoff_initial_ms;
  for (int attempt = 0;; ++attempt) {
    ++result.requests;
    httplib::Result res = client.Get(path + "?" + query);
    if (res && res->status == 200) {
      if (opts.cache_dir) write_text_file(cache_file, res->body);
      return res->body;
    }
    const bool retryable =
        !res || res->status == 429 || res->status >= 500;
    if (!retryable)
      throw DataError("pushshift request failed with HTTP " +
                      std::to_string(res->status) + ": " + url);
    if (attempt >= opts.max_retries)
      throw DataError("pushshift request failed after " +
                      std::to_string(attempt) + " retries: " + url);
    ++result.retries;
    std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
    backoff_ms *= 2;
  }
}

}  // namespace detail

inline FetchResult fetch_pushshift(const std::string& base_url,
                                   const FilterCriteria& criteria,
                                   const FetchOptions& opts = {}) {
  criteria.validate();
  if (opts.page_size < 1 || opts.page_size > 500)
    throw ConfigError("pushshift page_size must be in [1, 500]");

  httplib::Client client(base_url);
  client.set_connection_timeout(opts.timeout_sec);
  client.set_read_timeout(opts.timeout_sec);

  FetchResult result;
  std::unordered_set<std::string> seen;
  for (PostKind kind : criteria.kinds) {
    const std::string path =
        kind == PostKind::submission ? "/reddit/search/submission"
                                     : "/reddit/search/comment";
    std::int64_t cursor = criteria.after.value_or(-1);
    for (;;) {
      httplib::Params params;
      if (criteria.subreddit) params.emplace("subreddit", *criteria.subreddit);
      if (cursor >= 0) params.emplace("after", std::to_string(cursor));
      if (criteria.before)
        params.emplace("before", std::to_string(*criteria.before));
      params.emplace("size", std::to_string(opts.page_size));

      const std::string body =
          detail::fetch_page(client, base_url, path, params, opts, result);
      nlohmann::json page;
      try {
        page = nlohmann::json::parse(body);
      } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("pushshift returned invalid JSON: ") +
                        e.what());
      }
      if (!page.contains("data") || !page["data"].is_array())
        throw DataError("pushshift response has no 'data' array");
      const auto& data = page["data"];
      if (data.empty()) break;

      std::int64_t page_max = cursor;
      for (const auto& obj : data) {
        auto post = detail::parse_pushshift_object(obj, kind);
        if (!post) continue;
        page_max = std::max(page_max, post->created_utc);
        if (seen.insert(post->id).second)
          result.posts.push_back(std::move(*post));
      }
      // A conforming server only returns created_utc > after; guard against
      // a non-advancing cursor anyway.
      cursor = page_max > cursor ? page_max : cursor + 1;
    }
  }

  std::sort(result.posts.begin(), result.posts.end(),
            [](const RawPost& a, const RawPost& b) {
              return std::tie(a.created_utc, a.id) <
                     std::tie(b.created_utc, b.id);
            });
  result.posts = filter_posts(result.posts, criteria);
  return result;
}

}  // namespace dapmav

#endif  // DAPMAV_PUSHSHIFT_HPP_
