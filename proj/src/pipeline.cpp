#include "stego/pipeline.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "stego/coder.hpp"
#include "stego/errors.hpp"

namespace stego::pipeline {

using nlohmann::json;

std::string SessionMeta::to_json() const {
  json j{{"model_id", model_id},
         {"version", version},
         {"tokenizer_id", tokenizer_id},
         {"policy",
          {{"C", budget_scale},
           {"alpha", entropy_floor},
           {"epsilon", cutoff_eps},
           {"k", quant_bits}}},
         {"payload_len", payload_len},
         {"prefix_len", prefix_len}};
  return j.dump(2);
}

SessionMeta SessionMeta::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("metadata sidecar is not valid JSON");
  try {
    SessionMeta m;
    m.model_id = j.at("model_id").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.tokenizer_id = j.at("tokenizer_id").get<std::string>();
    const auto& p = j.at("policy");
    m.budget_scale = p.at("C").get<double>();
    m.entropy_floor = p.at("alpha").get<double>();
    m.cutoff_eps = p.at("epsilon").get<double>();
    m.quant_bits = p.at("k").get<int>();
    m.payload_len = j.at("payload_len").get<uint64_t>();
    m.prefix_len = j.at("prefix_len").get<int>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("metadata sidecar missing field: ") + e.what());
  }
}

SessionMeta make_meta(const lm::TokenModel& model, const lm::Tokenizer& tk,
                      const opt::EmbedPolicy& policy, uint64_t payload_len) {
  SessionMeta m;
  m.model_id = model.model_id();
  m.version = model.version();
  m.tokenizer_id = tk.id();
  m.budget_scale = policy.budget_scale;
  m.entropy_floor = policy.entropy_floor;
  m.cutoff_eps = policy.cutoff_eps;
  m.quant_bits = policy.quant_bits;
  m.payload_len = payload_len;
  m.prefix_len = policy.prefix_bits;
  return m;
}

void verify_metadata(const SessionMeta& local, const SessionMeta& sidecar) {
  auto fail = [](const char* field) {
    throw MetadataMismatch(std::string("session metadata mismatch: ") + field);
  };
  if (local.model_id != sidecar.model_id) fail("model_id");
  if (local.version != sidecar.version) fail("version");
  if (local.tokenizer_id != sidecar.tokenizer_id) fail("tokenizer_id");
  if (local.budget_scale != sidecar.budget_scale) fail("policy.C");
  if (local.entropy_floor != sidecar.entropy_floor) fail("policy.alpha");
  if (local.cutoff_eps != sidecar.cutoff_eps) fail("policy.epsilon");
  if (local.quant_bits != sidecar.quant_bits) fail("policy.k");
  if (local.payload_len != sidecar.payload_len) fail("payload_len");
  if (local.prefix_len != sidecar.prefix_len) fail("prefix_len");
}

namespace {

// One truncate/optimize/quantize pass plus its metrics row; shared by the
// embed and extract directions so both derive bit-identical intervals.
struct TokenPlan {
  opt::TwoStageResult stage;
  PerTokenMetrics metrics;
};

TokenPlan plan_token(const prob::TokenDistribution& full,
                     const opt::EmbedPolicy& policy) {
  TokenPlan plan;
  const double h = prob::entropy_bits(full);
  const double budget = opt::adaptive_budget(h, policy);
  plan.stage = opt::two_stage_optimize(full, budget, policy.cutoff_eps,
                                       policy.quant_bits, policy.bisect_tol,
                                       policy.bisect_max_iter);

  PerTokenMetrics& m = plan.metrics;
  m.entropy_full = h;
  m.delta_i = budget;
  m.cutoff_cost = plan.stage.cutoff_kl;
  m.optimization_kl = plan.stage.opt.achieved_kl;
  m.total_kl = m.cutoff_cost + m.optimization_kl;
  m.budget_clamped = plan.stage.budget_clamped;

  const auto& q = plan.stage.opt.dist;
  const auto& qd = plan.stage.quantized;
  const double total = static_cast<double>(qd.total());
  double dev = 0.0;
  for (size_t s = 0; s < qd.slots(); ++s) {
    dev = std::max(dev, std::fabs(static_cast<double>(qd.count(s)) / total - q.prob(s)));
  }
  m.quant_deviation = dev;
  return plan;
}

}  // namespace

SessionOutcome run_embed_session(const lm::TokenSeq& prompt_tokens,
                                 const BitString& payload,
                                 const opt::EmbedPolicy& policy,
                                 const lm::TokenModel& model, size_t max_tokens,
                                 bool stop_when_complete) {
  if (prompt_tokens.empty()) {
    throw std::invalid_argument("prompt must tokenize to at least one token");
  }
  ac::Embedder coder{ac::MessageWindow(payload)};
  lm::Context ctx{prompt_tokens};

  SessionOutcome out;
  while (out.tokens.size() < max_tokens) {
    if (stop_when_complete && coder.complete()) break;
    auto plan = plan_token(model.next_distribution(ctx), policy);
    const uint64_t before = coder.state().bits_emitted;
    const uint32_t tok = coder.step(plan.stage.quantized);
    plan.metrics.bits_resolved =
        static_cast<uint32_t>(coder.state().bits_emitted - before);

    ctx.tokens.push_back(tok);
    out.tokens.push_back(tok);
    out.metrics.push_back(plan.metrics);
  }
  out.completed = coder.complete();
  out.bits_resolved = std::min<uint64_t>(coder.state().bits_emitted, payload.size());
  return out;
}

StegoResult encode(const std::string& prompt_text, const BitString& secret,
                   const opt::EmbedPolicy& policy, const lm::TokenModel& model,
                   const lm::Tokenizer& tk) {
  policy.validate();
  if (secret.empty()) throw EmptyMessage("secret bit string is empty");
  const lm::TokenSeq prompt_tokens = tk.tokenize(prompt_text);
  if (prompt_tokens.empty()) {
    throw std::invalid_argument("prompt must tokenize to at least one token");
  }

  const uint64_t candidates = uint64_t{1} << policy.prefix_bits;
  const uint64_t payload_len = secret.size() + static_cast<uint64_t>(policy.prefix_bits);

  for (uint64_t v = 0; v < candidates; ++v) {
    BitString payload = BitString::from_uint(v, policy.prefix_bits);
    payload.append(secret);

    auto session = run_embed_session(prompt_tokens, payload, policy, model,
                                     static_cast<size_t>(policy.max_tokens));
    if (!session.completed) continue;  // stalled attempt

    const std::string text = tk.detokenize(session.tokens);
    try {
      // Verify against the receiver's view: the retokenized text.
      BitString recovered = decode(prompt_text, text, payload_len, policy, model, tk);
      if (recovered == secret) {
        StegoResult res;
        res.tokens = std::move(session.tokens);
        res.text = text;
        res.metrics = std::move(session.metrics);
        res.prefix_used = BitString::from_uint(v, policy.prefix_bits);
        res.attempts = static_cast<uint32_t>(v + 1);
        res.meta = make_meta(model, tk, policy, payload_len);
        return res;
      }
    } catch (const DesyncError&) {
    } catch (const InvalidToken&) {
    }
  }
  throw UnembeddableMessage("no retry prefix produced a decodable stego text; "
                            "raise prefix bits or change the prompt");
}

BitString decode(const std::string& prompt_text, const std::string& stego_text,
                 uint64_t payload_len, const opt::EmbedPolicy& policy,
                 const lm::TokenModel& model, const lm::Tokenizer& tk) {
  policy.validate();
  if (payload_len == 0) throw EmptyMessage("payload length is zero");
  if (static_cast<uint64_t>(policy.prefix_bits) >= payload_len) {
    throw std::invalid_argument("payload length does not exceed the prefix");
  }
  const lm::TokenSeq prompt_tokens = tk.tokenize(prompt_text);
  if (prompt_tokens.empty()) {
    throw std::invalid_argument("prompt must tokenize to at least one token");
  }
  const lm::TokenSeq stego_tokens = tk.tokenize(stego_text);

  ac::Extractor coder;
  lm::Context ctx{prompt_tokens};
  for (lm::TokenId tok : stego_tokens) {
    if (coder.bits().size() >= payload_len) break;
    auto plan = plan_token(model.next_distribution(ctx), policy);
    try {
      coder.step(tok, plan.stage.quantized);
    } catch (const TokenNotInDistribution& e) {
      throw DesyncError(std::string("replay diverged: ") + e.what());
    }
    ctx.tokens.push_back(tok);
  }
  if (coder.bits().size() < payload_len) {
    throw DesyncError("stego text ended before the payload was recovered");
  }
  return coder.bits().prefix(payload_len).without_prefix(
      static_cast<size_t>(policy.prefix_bits));
}

int choose_prefix_length(uint64_t secret_len_bits, double per_bit_error_rate) {
  if (secret_len_bits < 1) throw std::invalid_argument("secret length must be >= 1");
  if (!(per_bit_error_rate > 0.0) || per_bit_error_rate >= 1.0) {
    throw std::invalid_argument("per-bit error rate must lie in (0, 1)");
  }
  if (per_bit_error_rate * static_cast<double>(secret_len_bits) >= 1.0) {
    throw TargetUnreachable("message too long for the given mismatch rate");
  }
  // Overall failure (rate*(|B|+|S|))^(2^|B|) must drop below 1e-8; one
  // attempt fails with probability rate*(payload bits), attempts are
  // independent across prefixes.
  constexpr double kLog10Target = -8.0;
  for (int b = 1; b <= 64; ++b) {
    const double p =
        per_bit_error_rate * static_cast<double>(secret_len_bits + static_cast<uint64_t>(b));
    if (p >= 1.0) continue;
    if (std::exp2(static_cast<double>(b)) * std::log10(p) <= kLog10Target) {
      return b;
    }
  }
  throw TargetUnreachable("no prefix length up to 64 reaches the success target");
}

std::string metrics_to_json(const StegoResult& result) {
  json tokens = json::array();
  uint64_t total_bits = 0;
  double max_dev = 0.0;
  uint32_t clamped = 0;
  for (size_t i = 0; i < result.metrics.size(); ++i) {
    const PerTokenMetrics& m = result.metrics[i];
    total_bits += m.bits_resolved;
    max_dev = std::max(max_dev, m.quant_deviation);
    clamped += m.budget_clamped ? 1u : 0u;
    tokens.push_back({{"token", result.tokens[i]},
                      {"entropy_full", m.entropy_full},
                      {"delta_i", m.delta_i},
                      {"cutoff_cost", m.cutoff_cost},
                      {"optimization_kl", m.optimization_kl},
                      {"total_kl", m.total_kl},
                      {"quant_deviation", m.quant_deviation},
                      {"bits_resolved", m.bits_resolved},
                      {"budget_clamped", m.budget_clamped}});
  }
  json j{{"meta", json::parse(result.meta.to_json())},
         {"summary",
          {{"attempts", result.attempts},
           {"prefix_bits", result.prefix_used.str()},
           {"token_count", result.tokens.size()},
           {"total_bits", total_bits},
           {"max_quant_deviation", max_dev},
           {"clamped_tokens", clamped}}},
         {"tokens", tokens}};
  return j.dump(2);
}

uint64_t mix_seed(uint64_t master, uint64_t run) {
  // splitmix64 over the pair
  uint64_t z = master + 0x9e3779b97f4a7c15ULL * (run + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MismatchCalibration measure_mismatch_rate(const lm::TokenModel& model,
                                          const lm::Tokenizer& tk,
                                          const opt::EmbedPolicy& policy,
                                          size_t secret_bits, size_t sessions,
                                          uint64_t seed) {
  // Prompt pool: word-initial vocabulary entries only, so any drawn prompt
  // is valid text for the tokenizer.
  std::vector<lm::TokenId> starters;
  const auto& vocab = tk.vocab();
  for (lm::TokenId t = 0; t < vocab.vocab_size; ++t) {
    const std::string& text = vocab.token_text[t];
    if (text.rfind("##", 0) != 0) starters.push_back(t);
  }
  if (starters.empty()) throw std::invalid_argument("vocabulary has no word-initial token");

  opt::EmbedPolicy single = policy;
  single.prefix_bits = 0;  // one candidate, no retry

  MismatchCalibration cal;
  cal.sessions = sessions;
  for (size_t s = 0; s < sessions; ++s) {
    std::mt19937_64 rng(mix_seed(seed, s));
    BitString secret;
    for (size_t i = 0; i < secret_bits; ++i) secret.push_back(static_cast<int>(rng() & 1));
    const lm::TokenId start = starters[rng() % starters.size()];
    const std::string prompt = tk.detokenize({start});

    auto session = run_embed_session(tk.tokenize(prompt), secret, single, model,
                                     static_cast<size_t>(single.max_tokens));
    if (!session.completed) {
      cal.stalls += 1;
      continue;
    }
    try {
      BitString recovered =
          decode(prompt, tk.detokenize(session.tokens), secret.size(), single, model, tk);
      if (recovered != secret) cal.failures += 1;
    } catch (const DesyncError&) {
      cal.failures += 1;
    } catch (const InvalidToken&) {
      cal.failures += 1;
    }
  }
  const auto effective = static_cast<double>(sessions - cal.stalls);
  if (effective > 0) {
    cal.per_run_rate = static_cast<double>(cal.failures) / effective;
    cal.per_bit_rate = cal.per_run_rate / static_cast<double>(secret_bits);
  }
  return cal;
}

}  // namespace stego::pipeline
