#pragma once

#include <map>
#include <memory>
#include <string>

#include "stego/distribution.hpp"
#include "stego/tokenizer.hpp"

namespace stego::lm {

// Prompt tokens followed by the generated continuation.
struct Context {
  TokenSeq tokens;
};

// Conditional next-token probability source. Implementations must be
// deterministic: the same context always yields a bit-identical
// distribution, or encoder and decoder desynchronize.
class TokenModel {
public:
  virtual ~TokenModel() = default;
  virtual prob::TokenDistribution next_distribution(const Context& ctx) const = 0;
  virtual uint32_t vocab_size() const = 0;
  virtual std::string model_id() const = 0;
  virtual std::string version() const = 0;
};

// Count-table n-gram model with add-beta smoothing over observed
// successors only (unseen successors stay at zero and are stripped).
// Contexts never observed at full order back off to shorter suffixes,
// ending at the unigram table, so every context has a distribution.
class MarkovModel final : public TokenModel {
public:
  MarkovModel(const TokenSeq& corpus_tokens, uint32_t vocab_size, int order,
              double beta = 0.01);

  prob::TokenDistribution next_distribution(const Context& ctx) const override;
  uint32_t vocab_size() const override { return vocab_size_; }
  std::string model_id() const override { return id_; }
  std::string version() const override { return "1"; }

  int order() const { return order_; }
  // Deterministic fingerprint of the count tables.
  uint64_t table_hash() const;

private:
  int order_;
  double beta_;
  uint32_t vocab_size_;
  std::string id_;
  // tables_[len]: context of length len -> successor counts
  std::vector<std::map<TokenSeq, std::map<TokenId, uint32_t>>> tables_;
};

// Builds a MarkovModel from corpus text through the tokenizer's
// corpus_tokenize path (which may teach non-canonical spellings).
MarkovModel build_markov(const std::string& corpus_text, const Tokenizer& tk,
                         int order, double beta = 0.01);

// Uniform distribution over a fixed vocabulary; test and demo source.
class UniformModel final : public TokenModel {
public:
  explicit UniformModel(uint32_t n);
  prob::TokenDistribution next_distribution(const Context& ctx) const override;
  uint32_t vocab_size() const override { return n_; }
  std::string model_id() const override;
  std::string version() const override { return "1"; }

private:
  uint32_t n_;
};

// HTTP client for an external probability server. One POST per token:
//   POST /v1/distribution  {"context": [int...], "top": "full"}
//   200 -> {"probs": [float; vocab_size], "model_id": str, "version": str}
// The server must return raw full-vocabulary probabilities, never samples.
// model_id/version are cached at the construction probe and any drift in a
// later response aborts the session (no silent retry).
class RemoteModel final : public TokenModel {
public:
  explicit RemoteModel(const std::string& endpoint);  // http://host:port
  ~RemoteModel() override;

  prob::TokenDistribution next_distribution(const Context& ctx) const override;
  uint32_t vocab_size() const override;
  std::string model_id() const override;
  std::string version() const override;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stego::lm
