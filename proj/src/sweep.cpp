#include "stego/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "stego/errors.hpp"

namespace stego::bench {

using nlohmann::json;

SweepSpec SweepSpec::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("sweep spec is not valid JSON");
  SweepSpec s;
  try {
    if (j.contains("c_grid")) s.c_grid = j["c_grid"].get<std::vector<double>>();
    if (j.contains("alpha_grid")) s.alpha_grid = j["alpha_grid"].get<std::vector<double>>();
    if (j.contains("eps_grid")) s.eps_grid = j["eps_grid"].get<std::vector<double>>();
    if (j.contains("baseline_eps")) s.baseline_eps = j["baseline_eps"].get<std::vector<double>>();
    if (j.contains("token_budget")) s.token_budget = j["token_budget"].get<int>();
    if (j.contains("runs_per_point")) s.runs_per_point = j["runs_per_point"].get<int>();
    if (j.contains("seed")) s.seed = j["seed"].get<uint64_t>();
    if (j.contains("payload_bits")) s.payload_bits = j["payload_bits"].get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("sweep spec field error: ") + e.what());
  }
  return s;
}

SweepSpec SweepSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sweep spec: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void SweepSpec::validate(const opt::EmbedPolicy& base) const {
  if (c_grid.empty() || alpha_grid.empty() || eps_grid.empty()) {
    throw std::invalid_argument("sweep grids must be non-empty");
  }
  if (runs_per_point < 1) throw std::invalid_argument("runs_per_point must be >= 1");
  if (token_budget < 1) throw std::invalid_argument("token_budget must be >= 1");
  if (payload_bits < 8) throw std::invalid_argument("payload_bits must be >= 8");
  auto check_point = [&base](double c, double a, double e) {
    opt::EmbedPolicy p = base;
    p.budget_scale = c;
    p.entropy_floor = a;
    p.cutoff_eps = e;
    p.validate();
  };
  for (double c : c_grid)
    for (double a : alpha_grid)
      for (double e : eps_grid) check_point(c, a, e);
  for (double e : baseline_eps) check_point(0.0, 0.0, e);
}

namespace {

struct PointStats {
  double mean_bytes = 0.0;
  double mean_kl = 0.0;
  double mean_bpt = 0.0;
  double stderr_bytes = 0.0;
};

PointStats run_point(const opt::EmbedPolicy& policy, const SweepSpec& spec,
                     const lm::TokenModel& model) {
  std::vector<double> bytes(static_cast<size_t>(spec.runs_per_point));
  double kl_sum = 0.0, bpt_sum = 0.0;

  for (int r = 0; r < spec.runs_per_point; ++r) {
    std::mt19937_64 rng(pipeline::mix_seed(spec.seed, static_cast<uint64_t>(r)));
    BitString payload;
    for (int i = 0; i < spec.payload_bits; ++i) payload.push_back(static_cast<int>(rng() & 1));
    const lm::TokenSeq prompt{static_cast<lm::TokenId>(rng() % model.vocab_size())};

    auto session = pipeline::run_embed_session(
        prompt, payload, policy, model, static_cast<size_t>(spec.token_budget),
        /*stop_when_complete=*/false);

    double kl = 0.0;
    for (const auto& m : session.metrics) kl += m.total_kl;
    if (!session.metrics.empty()) kl /= static_cast<double>(session.metrics.size());

    const auto bits = static_cast<double>(session.bits_resolved);
    bytes[static_cast<size_t>(r)] = bits / 8.0;
    kl_sum += kl;
    bpt_sum += bits / static_cast<double>(spec.token_budget);
  }

  PointStats st;
  const auto n = static_cast<double>(spec.runs_per_point);
  for (double b : bytes) st.mean_bytes += b;
  st.mean_bytes /= n;
  st.mean_kl = kl_sum / n;
  st.mean_bpt = bpt_sum / n;
  if (spec.runs_per_point > 1) {
    double var = 0.0;
    for (double b : bytes) var += (b - st.mean_bytes) * (b - st.mean_bytes);
    var /= (n - 1.0);
    st.stderr_bytes = std::sqrt(var / n);
  }
  return st;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const lm::TokenModel& model,
                                const opt::EmbedPolicy& base_policy) {
  spec.validate(base_policy);

  std::vector<SweepRow> rows;
  auto add_row = [&](double c, double a, double e) {
    opt::EmbedPolicy p = base_policy;
    p.budget_scale = c;
    p.entropy_floor = a;
    p.cutoff_eps = e;
    const PointStats st = run_point(p, spec, model);
    rows.push_back({c, a, e, spec.runs_per_point, st.mean_bytes, st.mean_kl,
                    st.mean_bpt, st.stderr_bytes});
  };

  for (double c : spec.c_grid)
    for (double a : spec.alpha_grid)
      for (double e : spec.eps_grid) add_row(c, a, e);
  for (double e : spec.baseline_eps) add_row(0.0, 0.0, e);
  return rows;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "C,alpha,epsilon,runs,mean_bytes,mean_kl_bits,mean_bits_per_token,stderr_bytes\n";
  char line[256];
  for (const SweepRow& r : rows) {
    snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%d,%.6f,%.6f,%.6f,%.6f\n", r.c,
             r.alpha, r.eps, r.runs, r.mean_bytes, r.mean_kl_bits,
             r.mean_bits_per_token, r.stderr_bytes);
    out += line;
  }
  return out;
}

std::string analyze_metrics(const std::string& metrics_json) {
  json j = json::parse(metrics_json, nullptr, false);
  if (j.is_discarded() || !j.contains("tokens") || !j.contains("meta") ||
      !j.contains("summary")) {
    throw ParseError("metrics document is malformed");
  }

  std::ostringstream out;
  char line[256];
  out << "token  entropy   delta_i   cutoff    opt_kl    total_kl  bits  cum_bits  split\n";
  double sum_total = 0.0, sum_parts = 0.0;
  uint64_t cum_bits = 0;
  bool split_ok = true;
  try {
    for (const auto& t : j["tokens"]) {
      const double cutoff = t.at("cutoff_cost").get<double>();
      const double opt_kl = t.at("optimization_kl").get<double>();
      const double total = t.at("total_kl").get<double>();
      const auto bits = t.at("bits_resolved").get<uint64_t>();
      const bool row_ok = std::fabs(total - (cutoff + opt_kl)) <= 1e-9;
      split_ok = split_ok && row_ok;
      sum_total += total;
      sum_parts += cutoff + opt_kl;
      cum_bits += bits;
      snprintf(line, sizeof line,
               "%5llu  %8.4f  %8.4f  %8.4f  %8.4f  %8.4f  %4llu  %8llu  %s\n",
               static_cast<unsigned long long>(t.at("token").get<uint64_t>()),
               t.at("entropy_full").get<double>(), t.at("delta_i").get<double>(),
               cutoff, opt_kl, total, static_cast<unsigned long long>(bits),
               static_cast<unsigned long long>(cum_bits), row_ok ? "ok" : "BAD");
      out << line;
    }
    const auto payload = j["meta"].at("payload_len").get<uint64_t>();
    snprintf(line, sizeof line,
             "totals: kl %.6f (parts %.6f), bits %llu of payload %llu, split %s\n",
             sum_total, sum_parts, static_cast<unsigned long long>(cum_bits),
             static_cast<unsigned long long>(payload), split_ok ? "ok" : "BAD");
    out << line;
    snprintf(line, sizeof line, "attempts %llu, max quant deviation %.3e\n",
             static_cast<unsigned long long>(j["summary"].at("attempts").get<uint64_t>()),
             j["summary"].at("max_quant_deviation").get<double>());
    out << line;
  } catch (const json::exception& e) {
    throw ParseError(std::string("metrics document field error: ") + e.what());
  }
  return out.str();
}

}  // namespace stego::bench
