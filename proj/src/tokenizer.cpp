#include "stego/tokenizer.hpp"

#include <cctype>
#include <sstream>

#include "stego/errors.hpp"

namespace stego::lm {

namespace {

uint64_t fnv1a(const std::string& s, uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string vocab_fingerprint(const VocabMeta& v) {
  uint64_t h = 1469598103934665603ULL;
  for (const auto& t : v.token_text) h = fnv1a(t + '\n', h);
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);
}

}  // namespace

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        out.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

WhitespaceTokenizer WhitespaceTokenizer::from_corpus(const std::string& corpus_text) {
  WhitespaceTokenizer tk;
  for (const auto& w : split_words(corpus_text)) {
    if (tk.word_to_id_.emplace(w, static_cast<TokenId>(tk.vocab_.token_text.size())).second) {
      tk.vocab_.token_text.push_back(w);
    }
  }
  if (tk.vocab_.token_text.size() < 2) {
    throw std::invalid_argument("corpus must contain at least two distinct words");
  }
  tk.vocab_.vocab_size = static_cast<uint32_t>(tk.vocab_.token_text.size());
  tk.id_ = "ws/" + vocab_fingerprint(tk.vocab_);
  return tk;
}

TokenSeq WhitespaceTokenizer::tokenize(const std::string& text) const {
  TokenSeq out;
  for (const auto& w : split_words(text)) {
    auto it = word_to_id_.find(w);
    if (it == word_to_id_.end()) {
      throw InvalidToken("word not in vocabulary: " + w);
    }
    out.push_back(it->second);
  }
  return out;
}

std::string WhitespaceTokenizer::detokenize(const TokenSeq& tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (t >= vocab_.vocab_size) throw InvalidToken("token id out of vocabulary");
    if (!out.empty()) out.push_back(' ');
    out += vocab_.token_text[t];
  }
  return out;
}

SubwordTokenizer SubwordTokenizer::from_corpus(const std::string& corpus_text) {
  SubwordTokenizer tk;
  auto add = [&tk](const std::string& piece) {
    if (tk.piece_to_id_.emplace(piece, static_cast<TokenId>(tk.vocab_.token_text.size())).second) {
      tk.vocab_.token_text.push_back(piece);
    }
  };
  for (const auto& w : split_words(corpus_text)) {
    add(w);
    if (w.size() >= kSplitMinLen) {
      add(w.substr(0, w.size() - kTailLen));
      add("##" + w.substr(w.size() - kTailLen));
    }
  }
  if (tk.vocab_.token_text.size() < 2) {
    throw std::invalid_argument("corpus must contain at least two distinct words");
  }
  tk.vocab_.vocab_size = static_cast<uint32_t>(tk.vocab_.token_text.size());
  tk.id_ = "subword/" + vocab_fingerprint(tk.vocab_);
  return tk;
}

bool SubwordTokenizer::is_continuation(TokenId id) const {
  const std::string& t = vocab_.token_text.at(id);
  return t.size() > 2 && t[0] == '#' && t[1] == '#';
}

TokenId SubwordTokenizer::id_of(const std::string& piece) const {
  auto it = piece_to_id_.find(piece);
  if (it == piece_to_id_.end()) {
    throw InvalidToken("piece not in vocabulary: " + piece);
  }
  return it->second;
}

TokenSeq SubwordTokenizer::tokenize_word(const std::string& word) const {
  // Whole word wins; otherwise greedy longest head piece, then greedy
  // longest continuation pieces until the word is consumed.
  if (piece_to_id_.count(word)) return {id_of(word)};

  for (size_t head_len = word.size(); head_len >= 1; --head_len) {
    auto head = piece_to_id_.find(word.substr(0, head_len));
    if (head == piece_to_id_.end()) continue;
    TokenSeq parts{head->second};
    size_t pos = head_len;
    bool ok = true;
    while (pos < word.size()) {
      size_t best = 0;
      for (size_t len = word.size() - pos; len >= 1; --len) {
        if (piece_to_id_.count("##" + word.substr(pos, len))) {
          best = len;
          break;
        }
      }
      if (best == 0) {
        ok = false;
        break;
      }
      parts.push_back(id_of("##" + word.substr(pos, best)));
      pos += best;
    }
    if (ok) return parts;
  }
  throw InvalidToken("cannot tokenize word: " + word);
}

TokenSeq SubwordTokenizer::tokenize(const std::string& text) const {
  TokenSeq out;
  for (const auto& w : split_words(text)) {
    auto parts = tokenize_word(w);
    out.insert(out.end(), parts.begin(), parts.end());
  }
  return out;
}

TokenSeq SubwordTokenizer::corpus_tokenize(const std::string& text) const {
  TokenSeq out;
  std::unordered_map<std::string, uint32_t> seen;
  for (const auto& w : split_words(text)) {
    const uint32_t occurrence = seen[w]++;
    if (w.size() >= kSplitMinLen && occurrence % 3 == 1) {
      out.push_back(id_of(w.substr(0, w.size() - kTailLen)));
      out.push_back(id_of("##" + w.substr(w.size() - kTailLen)));
    } else {
      auto parts = tokenize_word(w);
      out.insert(out.end(), parts.begin(), parts.end());
    }
  }
  return out;
}

std::string SubwordTokenizer::detokenize(const TokenSeq& tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (t >= vocab_.vocab_size) throw InvalidToken("token id out of vocabulary");
    const std::string& text = vocab_.token_text[t];
    if (is_continuation(t)) {
      out += text.substr(2);
    } else {
      if (!out.empty()) out.push_back(' ');
      out += text;
    }
  }
  return out;
}

}  // namespace stego::lm
