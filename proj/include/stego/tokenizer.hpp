#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace stego::lm {

using TokenId = uint32_t;
using TokenSeq = std::vector<TokenId>;

struct VocabMeta {
  uint32_t vocab_size = 0;
  std::vector<std::string> token_text;  // total over [0, vocab_size)
};

// Text <-> token mapping. detokenize(tokenize(t)) == t holds for any text
// this toolkit emits; the reverse direction, tokenize(detokenize(seq)) ==
// seq, is NOT guaranteed in general and its failure is exactly what the
// retry prefix protects against.
class Tokenizer {
public:
  virtual ~Tokenizer() = default;
  virtual TokenSeq tokenize(const std::string& text) const = 0;
  virtual std::string detokenize(const TokenSeq& tokens) const = 0;
  // Tokenization used when ingesting a training corpus; canonical by
  // default, overridden by tokenizers that teach the model non-canonical
  // spellings.
  virtual TokenSeq corpus_tokenize(const std::string& text) const {
    return tokenize(text);
  }
  virtual const VocabMeta& vocab() const = 0;
  virtual std::string id() const = 0;
};

// Bijective word-level tokenizer: vocabulary is the corpus word set, text
// is words joined by single spaces, so tokenize(detokenize(seq)) == seq
// always holds.
class WhitespaceTokenizer final : public Tokenizer {
public:
  static WhitespaceTokenizer from_corpus(const std::string& corpus_text);

  TokenSeq tokenize(const std::string& text) const override;
  std::string detokenize(const TokenSeq& tokens) const override;
  const VocabMeta& vocab() const override { return vocab_; }
  std::string id() const override { return id_; }

private:
  VocabMeta vocab_;
  std::unordered_map<std::string, TokenId> word_to_id_;
  std::string id_;
};

// Deliberately ambiguous subword tokenizer. Every corpus word is a whole
// token; long words additionally exist as a head piece plus a "##tail"
// continuation piece. Retokenization is greedy and prefers the whole word,
// so a generated head+tail pair does not survive a text round trip --
// the merge failure mode of real subword vocabularies.
class SubwordTokenizer final : public Tokenizer {
public:
  static SubwordTokenizer from_corpus(const std::string& corpus_text);

  TokenSeq tokenize(const std::string& text) const override;
  std::string detokenize(const TokenSeq& tokens) const override;
  // Spells every third occurrence of a long word in its split form so the
  // trained model assigns probability to both paths. Deterministic.
  TokenSeq corpus_tokenize(const std::string& text) const override;
  const VocabMeta& vocab() const override { return vocab_; }
  std::string id() const override { return id_; }

  bool is_continuation(TokenId id) const;
  // Smallest word length that gets a split spelling.
  static constexpr size_t kSplitMinLen = 7;
  static constexpr size_t kTailLen = 3;

private:
  TokenId id_of(const std::string& piece) const;
  TokenSeq tokenize_word(const std::string& word) const;

  VocabMeta vocab_;
  std::unordered_map<std::string, TokenId> piece_to_id_;  // "##" prefix marks continuations
  std::string id_;
};

// Splits on any whitespace; shared by corpus loading and the tokenizers.
std::vector<std::string> split_words(const std::string& text);

}  // namespace stego::lm
