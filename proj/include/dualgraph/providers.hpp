#pragma once

#include <memory>
#include <string>
#include <vector>

namespace dualgraph {

/// One chat completion request. `task` names the prompt template that produced
/// it ("create_outline", "extract_knowledge_nodes", ...) so that logs and
/// scripted providers can key on it.
struct ChatRequest {
  std::string task;
  std::string system;
  std::string user;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// Throws Error{Provider} (or a scripted-provider kind) on failure.
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct SearchResult {
  std::string url;
  std::string title;
  std::string snippet;
  int rank = 0;  // 1-based, unique within one result page
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  /// At most top_n results, ranks 1..k in order.
  virtual std::vector<SearchResult> search(const std::string& query, int top_n) = 0;
};

class FetchProvider {
 public:
  virtual ~FetchProvider() = default;
  /// Page text. Throws Error{Provider} when the page cannot be retrieved.
  virtual std::string fetch(const std::string& url) = 0;
};

using Embedding = std::vector<double>;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Unit-norm vectors, one per input text.
  virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;

  Embedding embed_one(const std::string& text) { return embed({text}).front(); }
};

struct Providers {
  std::shared_ptr<ChatProvider> chat;
  std::shared_ptr<SearchProvider> search;
  std::shared_ptr<FetchProvider> fetch;
  std::shared_ptr<EmbeddingProvider> embed;
};

}  // namespace dualgraph
