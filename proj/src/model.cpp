#include "stego/model.hpp"

#include <mutex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "stego/errors.hpp"

namespace stego::lm {

namespace {

uint64_t fnv_mix(uint64_t h, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

MarkovModel::MarkovModel(const TokenSeq& corpus_tokens, uint32_t vocab_size,
                         int order, double beta)
    : order_(order), beta_(beta), vocab_size_(vocab_size) {
  if (order < 0) throw std::invalid_argument("order must be >= 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (corpus_tokens.empty()) throw std::invalid_argument("corpus is empty");

  tables_.resize(static_cast<size_t>(order) + 1);
  for (size_t i = 0; i < corpus_tokens.size(); ++i) {
    if (corpus_tokens[i] >= vocab_size) {
      throw InvalidToken("corpus token id out of vocabulary");
    }
    for (int len = 0; len <= order; ++len) {
      if (i < static_cast<size_t>(len)) break;
      TokenSeq key(corpus_tokens.begin() + static_cast<ptrdiff_t>(i - len),
                   corpus_tokens.begin() + static_cast<ptrdiff_t>(i));
      tables_[static_cast<size_t>(len)][std::move(key)][corpus_tokens[i]] += 1;
    }
  }

  std::ostringstream id;
  id << "markov-o" << order_ << "-b" << beta_ << "/" << std::hex << table_hash();
  id_ = id.str();
}

uint64_t MarkovModel::table_hash() const {
  uint64_t h = 1469598103934665603ULL;
  for (size_t len = 0; len < tables_.size(); ++len) {
    h = fnv_mix(h, len);
    for (const auto& [key, succ] : tables_[len]) {
      h = fnv_mix(h, key.size());
      for (TokenId t : key) h = fnv_mix(h, t);
      for (const auto& [tok, cnt] : succ) {
        h = fnv_mix(h, tok);
        h = fnv_mix(h, cnt);
      }
    }
  }
  return h;
}

prob::TokenDistribution MarkovModel::next_distribution(const Context& ctx) const {
  if (ctx.tokens.empty()) throw std::invalid_argument("context is empty");

  const int longest = std::min<int>(order_, static_cast<int>(ctx.tokens.size()));
  for (int len = longest; len >= 0; --len) {
    TokenSeq key(ctx.tokens.end() - len, ctx.tokens.end());
    const auto& table = tables_[static_cast<size_t>(len)];
    auto it = table.find(key);
    if (it == table.end()) continue;

    const auto& succ = it->second;
    double total = 0.0;
    for (const auto& [tok, cnt] : succ) total += static_cast<double>(cnt);
    const double denom = total + beta_ * static_cast<double>(succ.size());

    std::vector<prob::TokenProb> raw;
    raw.reserve(succ.size());
    for (const auto& [tok, cnt] : succ) {
      raw.push_back({tok, (static_cast<double>(cnt) + beta_) / denom});
    }
    return prob::TokenDistribution::build(std::move(raw), vocab_size_);
  }
  throw std::logic_error("unigram table missing");  // unreachable: corpus non-empty
}

MarkovModel build_markov(const std::string& corpus_text, const Tokenizer& tk,
                         int order, double beta) {
  return MarkovModel(tk.corpus_tokenize(corpus_text), tk.vocab().vocab_size, order, beta);
}

UniformModel::UniformModel(uint32_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("uniform vocabulary needs >= 2 tokens");
}

prob::TokenDistribution UniformModel::next_distribution(const Context& ctx) const {
  if (ctx.tokens.empty()) throw std::invalid_argument("context is empty");
  std::vector<prob::TokenProb> raw(n_);
  const double p = 1.0 / static_cast<double>(n_);
  for (uint32_t i = 0; i < n_; ++i) raw[i] = {i, p};
  return prob::TokenDistribution::build(std::move(raw), n_);
}

std::string UniformModel::model_id() const {
  return "uniform-" + std::to_string(n_);
}

struct RemoteModel::Impl {
  std::string host;
  int port = 80;
  std::unique_ptr<httplib::Client> client;
  mutable std::mutex mu;  // one in-flight request per model instance
  uint32_t vocab_size = 0;
  std::string model_id;
  std::string version;

  nlohmann::json request(const TokenSeq& context) {
    nlohmann::json body{{"context", context}, {"top", "full"}};
    auto res = client->Post("/v1/distribution", body.dump(), "application/json");
    if (!res || res->status != 200) {
      throw SourceUnavailable("probability server unreachable or returned status " +
                              std::to_string(res ? res->status : -1));
    }
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("probs") ||
        !reply.contains("model_id") || !reply.contains("version")) {
      throw SourceUnavailable("malformed probability server response");
    }
    return reply;
  }
};

RemoteModel::RemoteModel(const std::string& endpoint) : impl_(new Impl) {
  std::string rest = endpoint;
  if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
  const auto colon = rest.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("remote endpoint must be http://host:port");
  }
  impl_->host = rest.substr(0, colon);
  impl_->port = std::stoi(rest.substr(colon + 1));
  impl_->client = std::make_unique<httplib::Client>(impl_->host, impl_->port);
  impl_->client->set_keep_alive(true);

  // Handshake probe pins vocab size and model identity for the session.
  auto reply = impl_->request({0});
  impl_->vocab_size = static_cast<uint32_t>(reply["probs"].size());
  impl_->model_id = reply["model_id"].get<std::string>();
  impl_->version = reply["version"].get<std::string>();
  if (impl_->vocab_size < 2) {
    throw SourceUnavailable("probability server reports vocabulary below 2 tokens");
  }
}

RemoteModel::~RemoteModel() = default;

prob::TokenDistribution RemoteModel::next_distribution(const Context& ctx) const {
  if (ctx.tokens.empty()) throw std::invalid_argument("context is empty");
  std::lock_guard lock(impl_->mu);
  auto reply = impl_->request(ctx.tokens);
  if (reply["model_id"].get<std::string>() != impl_->model_id ||
      reply["version"].get<std::string>() != impl_->version) {
    throw SourceUnavailable("probability server identity changed mid-session");
  }
  const auto& probs = reply["probs"];
  if (probs.size() != impl_->vocab_size) {
    throw SourceUnavailable("probability server vocabulary size changed mid-session");
  }
  std::vector<prob::TokenProb> raw;
  raw.reserve(probs.size());
  for (uint32_t i = 0; i < impl_->vocab_size; ++i) {
    raw.push_back({i, probs[i].get<double>()});
  }
  return prob::TokenDistribution::build(std::move(raw), impl_->vocab_size);
}

uint32_t RemoteModel::vocab_size() const { return impl_->vocab_size; }
std::string RemoteModel::model_id() const { return impl_->model_id; }
std::string RemoteModel::version() const { return impl_->version; }

}  // namespace stego::lm
