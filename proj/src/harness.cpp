#include "uramac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "uramac/aloha.hpp"
#include "uramac/asymptotic.hpp"
#include "uramac/channel.hpp"
#include "uramac/fbl.hpp"
#include "uramac/joint_decoder.hpp"
#include "uramac/ldpc.hpp"
#include "uramac/special.hpp"

#ifndef URAMAC_REVISION
#define URAMAC_REVISION "unknown"
#endif

namespace uramac::harness {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string> kKinds = {
    "simulate-slot", "simulate-frame", "bound-fbl-ach",  "bound-converse",
    "bound-asymptotic", "optimize-aloha", "ldpc-aloha", "bound-reference"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where, it.key());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  check_keys(j, {"kind", "seed", "trials", "workers", "out", "scale", "params"}, "config");
  ExperimentConfig c;
  if (!j.contains("kind")) throw ConfigError("missing 'kind'", "kind");
  c.kind = j.at("kind").get<std::string>();
  if (!kKinds.count(c.kind)) throw ConfigError("unknown kind '" + c.kind + "'", "kind");
  c.seed = j.value("seed", std::uint64_t(1));
  c.trials = j.value("trials", 100);
  c.workers = j.value("workers", 1);
  c.out = j.value("out", std::string("out/run"));
  c.scale = j.value("scale", std::string("desk"));
  if (c.scale != "desk" && c.scale != "full") throw ConfigError("scale must be desk|full", "scale");
  if (c.trials < 1) throw ConfigError("trials must be >= 1", "trials");
  if (c.workers < 1) throw ConfigError("workers must be >= 1", "workers");
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("'params' must be an object", "params");
    c.params = j.at("params");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  return json{{"kind", kind},       {"seed", seed},   {"trials", trials}, {"workers", workers},
              {"out", out},         {"scale", scale}, {"params", params}};
}

std::string ExperimentConfig::canonical_string() const {
  return to_json().dump(-1, ' ', false, json::error_handler_t::strict);
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_string()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// dat files
// ---------------------------------------------------------------------------

const char* schema_header(DatSchema s) {
  switch (s) {
    case DatSchema::ka_ebno: return "KA EBNO";
    case DatSchema::ebno_pupe: return "EBNO PUPE";
    case DatSchema::eps_mu: return "EPS MU";
    case DatSchema::ebno_fer: return "EBNO FER";
  }
  return "";
}

void emit_dat(const std::vector<Point>& points, DatSchema schema, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("emit_dat: cannot write " + file.string());
  out << schema_header(schema) << "\n";
  char buf[80];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.6g %.6g\n", p.x, p.y);
    out << buf;
  }
}

std::vector<Point> parse_dat(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("parse_dat: cannot open " + file.string());
  std::string header;
  std::getline(in, header);
  std::vector<Point> pts;
  double x, y;
  while (in >> x >> y) pts.push_back({x, y, 0.0, true, 0});
  return pts;
}

void ResultRecord::save(const fs::path& file) const {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  json j{{"kind", kind},
         {"config_hash", config_hash},
         {"revision", revision},
         {"seed", seed},
         {"wall_seconds", wall_seconds},
         {"data_files", data_files},
         {"points", points}};
  std::ofstream out(file, std::ios::binary);
  out << j.dump(2) << "\n";
}

std::string source_revision() { return URAMAC_REVISION; }

double mean(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / double(values.size());
}

double batch_mean_se(const std::vector<double>& values, int min_batches) {
  const int n = int(values.size());
  if (n < 2) return 0.0;
  const int batches = std::min(n, std::max(min_batches, 30));
  std::vector<double> bm(batches, 0.0);
  std::vector<int> cnt(batches, 0);
  for (int i = 0; i < n; ++i) {
    const int b = int((long(i) * batches) / n);
    bm[b] += values[i];
    ++cnt[b];
  }
  for (int b = 0; b < batches; ++b) bm[b] /= std::max(1, cnt[b]);
  const double m = mean(bm);
  double var = 0.0;
  for (double v : bm) var += (v - m) * (v - m);
  var /= double(batches - 1);
  return std::sqrt(var / batches);
}

// ---------------------------------------------------------------------------
// experiment runners
// ---------------------------------------------------------------------------

namespace {

json point_json(const Point& p) {
  json j{{"x", p.x}, {"y", p.y}};
  if (p.exact)
    j["exact"] = true;
  else
    j["se"] = p.se;
  if (p.trials > 0) j["trials"] = p.trials;
  return j;
}

double pget(const json& p, const std::string& key, double def) { return p.value(key, def); }
int pgeti(const json& p, const std::string& key, int def) { return p.value(key, def); }

std::vector<double> grid_param(const json& p, const std::string& key) {
  if (!p.contains(key)) throw ConfigError("missing '" + key + "'", key);
  if (!p.at(key).is_array()) throw ConfigError("'" + key + "' must be an array", key);
  std::vector<double> g = p.at(key).get<std::vector<double>>();
  if (g.empty()) throw ConfigError("'" + key + "' must be nonempty", key);
  return g;
}

jointdec::JointDecoderConfig decoder_config(const json& p) {
  jointdec::JointDecoderConfig cfg;
  cfg.T = pgeti(p, "T", 4);
  cfg.outer_iters = pgeti(p, "outer_iters", 25);
  cfg.inner_iters = pgeti(p, "inner_iters", 50);
  cfg.attempts = pgeti(p, "attempts", 4);
  cfg.subset_size = pgeti(p, "subset_size", 32);
  cfg.gm.max_components = pgeti(p, "gm_max_components", 500);
  cfg.gm.merge_distance = pget(p, "gm_merge_distance", 1.0);
  cfg.gm.prune_cum_weight = pget(p, "gm_prune_cum_weight", 1e-3);
  cfg.gm.sample_count = pgeti(p, "gm_sample_count", 20);
  const std::string variant = p.value("variant", std::string("sum-product"));
  if (variant == "sum-product")
    cfg.variant = ldpc::BpVariant::sum_product;
  else if (variant == "min-sum")
    cfg.variant = ldpc::BpVariant::min_sum;
  else
    throw ConfigError("variant must be sum-product|min-sum", "variant");
  return cfg;
}

aloha::DecoderMode mode_param(const json& p) {
  const std::string mode = p.value("mode", std::string("blind"));
  if (mode == "blind") return aloha::DecoderMode::blind;
  if (mode == "known-k") return aloha::DecoderMode::known_count;
  if (mode == "known-h") return aloha::DecoderMode::known_fading;
  throw ConfigError("mode must be blind|known-k|known-h", "mode");
}

const std::set<std::string> kDecoderKeys = {
    "T", "outer_iters", "inner_iters", "attempts", "subset_size", "gm_max_components",
    "gm_merge_distance", "gm_prune_cum_weight", "gm_sample_count", "variant", "mode"};

std::set<std::string> with_decoder_keys(std::set<std::string> s) {
  s.insert(kDecoderKeys.begin(), kDecoderKeys.end());
  return s;
}

struct SlotTrialOutcome {
  int misses = 0;
  int r = 0;
  int false_alarms = 0;
};

ResultRecord make_record(const ExperimentConfig& cfg) {
  ResultRecord rec;
  rec.kind = cfg.kind;
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)cfg.hash());
  rec.config_hash = buf;
  rec.revision = source_revision();
  rec.seed = cfg.seed;
  return rec;
}

void write_checkpoint(const ExperimentConfig& cfg, const json& partial) {
  json j{{"config_hash", make_record(cfg).config_hash}, {"partial", partial}};
  std::ofstream out(cfg.out + ".checkpoint.json", std::ios::binary);
  out << j.dump(2) << "\n";
}

// --- simulate-slot ----------------------------------------------------------

ResultRecord run_simulate_slot(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  check_keys(p, with_decoder_keys({"code_file", "r", "ebno_db_grid"}), "params");
  if (!p.contains("code_file")) throw ConfigError("missing 'code_file'", "code_file");
  const auto h = ldpc::ParityCheckMatrix::load_alist(p.at("code_file").get<std::string>());
  const ldpc::Encoder enc(h);
  const int r = pgeti(p, "r", 2);
  const auto mode = mode_param(p);
  const auto dcfg = decoder_config(p);
  const auto grid = grid_param(p, "ebno_db_grid");

  aloha::LdpcSlotRunner runner(h, dcfg, mode);
  const int k = enc.k();
  const int n1 = h.n();

  ResultRecord rec = make_record(cfg);
  std::vector<Point> pupe_pts, fer_pts;
  long total_fa = 0;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double slot_power = channel::ebno_db_to_power(n1, grid[gi], k);
    std::function<SlotTrialOutcome(int, Rng&)> trial = [&](int t, Rng& rng) {
      (void)t;
      std::vector<aloha::Message> msgs(r);
      for (auto& m : msgs) m = aloha::draw_message(k, rng);
      auto list = runner.run_slot(msgs, slot_power, rng);
      std::sort(list.begin(), list.end());
      SlotTrialOutcome o;
      o.r = r;
      int hits = 0;
      for (const auto& m : msgs)
        if (std::binary_search(list.begin(), list.end(), m)) ++hits;
      o.misses = r - hits;
      std::vector<aloha::Message> uniq(msgs.begin(), msgs.end());
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      int dec_true = 0;
      for (const auto& m : uniq)
        if (std::binary_search(list.begin(), list.end(), m)) ++dec_true;
      o.false_alarms = int(list.size()) - dec_true;
      return o;
    };
    auto checkpoint = [&](const std::vector<SlotTrialOutcome>& res, const std::vector<char>& done) {
      long miss = 0, cnt = 0;
      for (std::size_t i = 0; i < res.size(); ++i)
        if (done[i]) {
          miss += res[i].misses;
          ++cnt;
        }
      write_checkpoint(cfg, json{{"ebno_db", grid[gi]},
                                 {"completed", cnt},
                                 {"pupe_partial", cnt ? double(miss) / double(cnt * r) : 0.0}});
    };
    auto res = parallel_map<SlotTrialOutcome>(cfg.trials, cfg.workers,
                                              cfg.seed + 0x9e3779b97f4a7c15ull * gi, trial,
                                              checkpoint);
    std::vector<double> pupe_vals(res.size()), fer_vals(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) {
      pupe_vals[i] = double(res[i].misses) / double(r);
      fer_vals[i] = res[i].misses > 0 ? 1.0 : 0.0;
      total_fa += res[i].false_alarms;
    }
    pupe_pts.push_back({grid[gi], mean(pupe_vals), batch_mean_se(pupe_vals), false, cfg.trials});
    fer_pts.push_back({grid[gi], mean(fer_vals), batch_mean_se(fer_vals), false, cfg.trials});
  }
  emit_dat(pupe_pts, DatSchema::ebno_pupe, cfg.out + "_pupe.dat");
  emit_dat(fer_pts, DatSchema::ebno_fer, cfg.out + "_fer.dat");
  rec.data_files = {cfg.out + "_pupe.dat", cfg.out + "_fer.dat"};
  for (const auto& pt : pupe_pts) rec.points.push_back(point_json(pt));
  rec.points.push_back(json{{"false_alarm_total", total_fa}});
  return rec;
}

// --- simulate-frame ---------------------------------------------------------

ResultRecord run_simulate_frame(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  check_keys(p,
             with_decoder_keys({"decoder", "code_file", "n", "L", "ka", "k", "ebno_db_grid",
                                "pe_table"}),
             "params");
  const std::string decoder = p.value("decoder", std::string("ldpc"));
  const int n = pgeti(p, "n", 0);
  const int L = pgeti(p, "L", 1);
  const int ka = pgeti(p, "ka", 1);
  if (n < 1 || L < 1 || ka < 1) throw ConfigError("need n, L, ka >= 1");
  const auto grid = grid_param(p, "ebno_db_grid");

  std::unique_ptr<ldpc::ParityCheckMatrix> h;
  std::unique_ptr<aloha::SlotRunner> runner;
  int k = pgeti(p, "k", 0);
  int T = pgeti(p, "T", 4);
  if (decoder == "ldpc") {
    if (!p.contains("code_file")) throw ConfigError("missing 'code_file'", "code_file");
    h = std::make_unique<ldpc::ParityCheckMatrix>(
        ldpc::ParityCheckMatrix::load_alist(p.at("code_file").get<std::string>()));
    if (h->n() != n / L) throw ConfigError("code length != floor(n/L)", "code_file");
    k = ldpc::Encoder(*h).k();
    runner = std::make_unique<aloha::LdpcSlotRunner>(*h, decoder_config(p), mode_param(p));
  } else if (decoder == "genie-stub") {
    std::vector<double> pe = p.contains("pe_table")
                                 ? p.at("pe_table").get<std::vector<double>>()
                                 : std::vector<double>{};
    runner = std::make_unique<aloha::GenieStubRunner>(T, pe);
  } else if (decoder == "perfect-stub") {
    runner = std::make_unique<aloha::GenieStubRunner>(aloha::GenieStubRunner::perfect(T));
  } else {
    throw ConfigError("decoder must be ldpc|genie-stub|perfect-stub", "decoder");
  }
  if (k < 1 || k > 128) throw ConfigError("need payload k in [1,128]", "k");

  ResultRecord rec = make_record(cfg);
  std::vector<Point> pts;
  long fa_total = 0;
  struct FrameTrial {
    double pupe = 0.0;
    int false_alarms = 0;
  };
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    aloha::FrameConfig fc;
    fc.n = n;
    fc.L = L;
    fc.ka = ka;
    fc.T = T;
    fc.k_bits = k;
    fc.power = channel::ebno_db_to_power(n, grid[gi], k);
    std::function<FrameTrial(int, Rng&)> trial = [&](int, Rng& rng) {
      auto fr = aloha::run_frame(fc, *runner, rng);
      FrameTrial ft;
      ft.pupe = fr.pupe(ka);
      for (const auto& s : fr.slots) ft.false_alarms += s.false_alarms;
      return ft;
    };
    auto checkpoint = [&](const std::vector<FrameTrial>& res, const std::vector<char>& done) {
      double acc = 0;
      long cnt = 0;
      for (std::size_t i = 0; i < res.size(); ++i)
        if (done[i]) {
          acc += res[i].pupe;
          ++cnt;
        }
      write_checkpoint(cfg, json{{"ebno_db", grid[gi]},
                                 {"completed", cnt},
                                 {"pupe_partial", cnt ? acc / cnt : 0.0}});
    };
    auto res = parallel_map<FrameTrial>(cfg.trials, cfg.workers,
                                        cfg.seed + 0x9e3779b97f4a7c15ull * gi, trial, checkpoint);
    std::vector<double> vals(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) {
      vals[i] = res[i].pupe;
      fa_total += res[i].false_alarms;
    }
    pts.push_back({grid[gi], mean(vals), batch_mean_se(vals), false, cfg.trials});
  }
  emit_dat(pts, DatSchema::ebno_pupe, cfg.out + ".dat");
  rec.data_files = {cfg.out + ".dat"};
  for (const auto& pt : pts) rec.points.push_back(point_json(pt));
  rec.points.push_back(json{{"false_alarm_total", fa_total}});
  return rec;
}

// --- bound-fbl-ach ----------------------------------------------------------

ResultRecord run_bound_fbl_ach(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  check_keys(p, {"n1", "k", "r", "ebno_db_grid", "form", "mc_samples", "fading_samples",
                 "design_power_fraction"},
             "params");
  const int n1 = pgeti(p, "n1", 128);
  const int k = pgeti(p, "k", 64);
  const int r = pgeti(p, "r", 2);
  const std::string form = p.value("form", std::string("mc"));
  const int mc_samples = pgeti(p, "mc_samples", 2000);
  const auto grid = grid_param(p, "ebno_db_grid");

  ResultRecord rec = make_record(cfg);
  std::vector<Point> pts;
  for (double e : grid) {
    const double slot_power = channel::ebno_db_to_power(n1, e, k);
    auto eval = [&](int half, int samples) {
      Rng rng(cfg.seed + half, 0x6c62272e07bb0142ull);
      if (form == "mc") return fbl::slot_pupe_bound_mc(n1, k, r, slot_power, samples, rng);
      if (form != "analytic") throw ConfigError("form must be mc|analytic", "form");
      fbl::FblParams fp;
      fp.n = n1;
      fp.k_bits = k;
      fp.K1 = fp.K2 = r;
      fp.power = slot_power;
      fp.design_power = slot_power * pget(p, "design_power_fraction", 0.9);
      fp.kind = channel::CodebookKind::gaussian;
      fp.mc_samples = samples;
      fp.fading_samples = pgeti(p, "fading_samples", 100000);
      std::vector<double> pts_t(r);
      for (int t = 1; t <= r; ++t) pts_t[t - 1] = fbl::achievability_pt_analytic(fp, t, rng).value;
      return fbl::achievability_pupe(fp, pts_t);
    };
    const double full = eval(0, mc_samples);
    const double a = eval(1, mc_samples / 2), b = eval(2, mc_samples / 2);
    pts.push_back({e, full, std::abs(a - b) / 2.0, false, mc_samples});
  }
  emit_dat(pts, DatSchema::ebno_pupe, cfg.out + ".dat");
  rec.data_files = {cfg.out + ".dat"};
  for (const auto& pt : pts) rec.points.push_back(point_json(pt));
  return rec;
}

// --- bound-converse ---------------------------------------------------------

ResultRecord run_bound_converse(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  check_keys(p, {"curve", "n", "n1", "k", "eps", "ka_grid", "r", "ebno_db_grid", "mc_samples"},
             "params");
  const std::string curve = p.value("curve", std::string("ka"));
  const int k = pgeti(p, "k", 100);
  const int mc = pgeti(p, "mc_samples", 100000);
  ResultRecord rec = make_record(cfg);
  std::vector<Point> pts;
  if (curve == "ka") {
    const int n = pgeti(p, "n", 30000);
    const double eps = pget(p, "eps", 0.1);
    for (double ka : grid_param(p, "ka_grid")) {
      const auto full = fbl::converse_theorem1(n, k, int(ka), eps, mc, cfg.seed);
      const auto a = fbl::converse_theorem1(n, k, int(ka), eps, mc / 2, cfg.seed + 101);
      const auto b = fbl::converse_theorem1(n, k, int(ka), eps, mc / 2, cfg.seed + 202);
      pts.push_back({ka, full.min_ebno_db, std::abs(a.min_ebno_db - b.min_ebno_db) / 2.0, false,
                     mc});
    }
    emit_dat(pts, DatSchema::ka_ebno, cfg.out + ".dat");
  } else if (curve == "pupe") {
    const int n1 = pgeti(p, "n1", 128);
    const int r = pgeti(p, "r", 2);
    for (double e : grid_param(p, "ebno_db_grid")) {
      const double power = channel::ebno_db_to_power(n1, e, k);
      const double eps = fbl::converse_eps_at_power(n1, k, r, power, mc, cfg.seed);
      pts.push_back({e, eps, 0.0, false, mc});
    }
    emit_dat(pts, DatSchema::ebno_pupe, cfg.out + ".dat");
  } else {
    throw ConfigError("curve must be ka|pupe", "curve");
  }
  rec.data_files = {cfg.out + ".dat"};
  for (const auto& pt : pts) rec.points.push_back(point_json(pt));
  return rec;
}

// --- bound-asymptotic -------------------------------------------------------

ResultRecord run_bound_asymptotic(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  check_keys(p, {"k", "eps", "mu_grid", "curves"}, "params");
  const int k = pgeti(p, "k", 100);
  const double eps = pget(p, "eps", 0.1);
  const auto mu_grid = grid_param(p, "mu_grid");
  std::vector<std::string> curves =
      p.contains("curves") ? p.at("curves").get<std::vector<std::string>>()
                           : std::vector<std::string>{"conv", "conv-iid", "replica", "ach"};
  ResultRecord rec = make_record(cfg);
  for (const auto& curve : curves) {
    std::vector<Point> pts;
    for (double mu : mu_grid) {
      asymp::AsymptoticParams ap{mu, k, eps};
      asymp::BoundResult r;
      if (curve == "conv")
        r = asymp::conv(ap);
      else if (curve == "conv-iid")
        r = asymp::conv_iid(ap);
      else if (curve == "replica")
        r = asymp::replica_optimal(ap);
      else if (curve == "ach")
        r = asymp::ach_theorem4(ap);
      else
        throw ConfigError("unknown curve '" + curve + "'", "curves");
      if (!r.feasible) throw InfeasibleError("bound infeasible at mu=" + std::to_string(mu));
      pts.push_back({r.energy_db, mu, 0.0, true, 0});
    }
    const std::string file = cfg.out + "_" + curve + ".dat";
    emit_dat(pts, DatSchema::eps_mu, file);
    rec.data_files.push_back(file);
    for (const auto& pt : pts) rec.points.push_back(point_json(pt));
  }
  return rec;
}

// --- optimize-aloha ---------------------------------------------------------

ResultRecord run_optimize_aloha(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  check_keys(p, {"n", "k", "T", "eps", "ka_grid", "genie", "mc_samples"}, "params");
  const int n = pgeti(p, "n", 30000);
  const int k = pgeti(p, "k", 100);
  const int T = pgeti(p, "T", 4);
  const double eps = pget(p, "eps", 0.1);
  const bool genie = p.value("genie", true);
  const int mc = pgeti(p, "mc_samples", 20000);
  ResultRecord rec = make_record(cfg);
  std::vector<Point> pts;
  for (double ka : grid_param(p, "ka_grid")) {
    const auto op = aloha::optimize_operating_point(n, k, int(ka), T, eps, genie, mc, cfg.seed);
    if (!op.feasible) throw InfeasibleError("operating point infeasible at ka=" + std::to_string(ka));
    pts.push_back({ka, op.ebno_db, 0.0, false, mc});
  }
  emit_dat(pts, DatSchema::ka_ebno, cfg.out + ".dat");
  rec.data_files = {cfg.out + ".dat"};
  for (const auto& pt : pts) rec.points.push_back(point_json(pt));
  return rec;
}

// --- ldpc-aloha (Ka -> min EbN0 by frame simulation) -------------------------

ResultRecord run_ldpc_aloha(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  check_keys(p, with_decoder_keys({"code_file", "n", "eps", "ka_grid", "ebno_db_start",
                                   "ebno_db_stop", "ebno_db_step"}),
             "params");
  if (!p.contains("code_file")) throw ConfigError("missing 'code_file'", "code_file");
  const auto h = ldpc::ParityCheckMatrix::load_alist(p.at("code_file").get<std::string>());
  const int n = pgeti(p, "n", 0);
  const double eps = pget(p, "eps", 0.1);
  if (n < h.n()) throw ConfigError("n must be >= code length", "n");
  const int L = n / h.n();
  const int k = ldpc::Encoder(h).k();
  const double e0 = pget(p, "ebno_db_start", 6.0);
  const double e1 = pget(p, "ebno_db_stop", 24.0);
  const double de = pget(p, "ebno_db_step", 1.0);
  aloha::LdpcSlotRunner runner(h, decoder_config(p), mode_param(p));

  ResultRecord rec = make_record(cfg);
  std::vector<Point> pts;
  for (double ka : grid_param(p, "ka_grid")) {
    aloha::FrameConfig fc;
    fc.n = n;
    fc.L = L;
    fc.ka = int(ka);
    fc.T = pgeti(p, "T", 4);
    fc.k_bits = k;
    double found = std::numeric_limits<double>::quiet_NaN();
    for (double e = e0; e <= e1 + 1e-9; e += de) {
      fc.power = channel::ebno_db_to_power(n, e, k);
      std::function<double(int, Rng&)> trial = [&](int, Rng& rng) {
        return aloha::run_frame(fc, runner, rng).pupe(fc.ka);
      };
      auto vals = parallel_map<double>(cfg.trials, cfg.workers,
                                       cfg.seed + std::uint64_t(e * 64) + std::uint64_t(ka), trial);
      if (mean(vals) <= eps) {
        found = e;
        break;
      }
    }
    if (std::isnan(found)) throw InfeasibleError("ldpc-aloha: grid exhausted at ka=" + std::to_string(ka));
    pts.push_back({ka, found, de, false, cfg.trials});
  }
  emit_dat(pts, DatSchema::ka_ebno, cfg.out + ".dat");
  rec.data_files = {cfg.out + ".dat"};
  for (const auto& pt : pts) rec.points.push_back(point_json(pt));
  return rec;
}

// --- bound-reference (tin, shamai-bettesh, replica at finite n) --------------

ResultRecord run_bound_reference(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  check_keys(p, {"curve", "n", "k", "eps", "ka_grid", "mc_samples"}, "params");
  const std::string curve = p.value("curve", std::string("tin"));
  const int n = pgeti(p, "n", 30000);
  const int k = pgeti(p, "k", 100);
  const double eps = pget(p, "eps", 0.1);
  const int mc = pgeti(p, "mc_samples", 100000);
  ResultRecord rec = make_record(cfg);
  std::vector<Point> pts;
  for (double ka : grid_param(p, "ka_grid")) {
    double ebno = std::numeric_limits<double>::quiet_NaN();
    if (curve == "tin") {
      for (double e = -2.0; e <= 40.0; e += 0.1) {
        Rng rng(cfg.seed, 0x14057b7ef767814full ^ std::uint64_t(ka));
        const double pe =
            fbl::tin_pe(n, k, channel::ebno_db_to_power(n, e, k), int(ka), mc, rng);
        if (pe <= eps) {
          ebno = e;
          break;
        }
      }
    } else if (curve == "shamai-bettesh") {
      ebno = fbl::shamai_bettesh_min_ebno_db(int(ka), n, k, eps);
    } else if (curve == "replica-finite") {
      asymp::AsymptoticParams ap{ka / double(n), k, eps};
      const auto r = asymp::replica_optimal(ap);
      if (!r.feasible) throw InfeasibleError("replica infeasible");
      ebno = r.energy_db;
    } else {
      throw ConfigError("curve must be tin|shamai-bettesh|replica-finite", "curve");
    }
    if (std::isnan(ebno)) throw InfeasibleError(curve + " infeasible at ka=" + std::to_string(ka));
    pts.push_back({ka, ebno, 0.0, curve != "tin", curve == "tin" ? mc : 0});
  }
  emit_dat(pts, DatSchema::ka_ebno, cfg.out + ".dat");
  rec.data_files = {cfg.out + ".dat"};
  for (const auto& pt : pts) rec.points.push_back(point_json(pt));
  return rec;
}

}  // namespace

ResultRecord run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ResultRecord rec;
  if (cfg.kind == "simulate-slot")
    rec = run_simulate_slot(cfg);
  else if (cfg.kind == "simulate-frame")
    rec = run_simulate_frame(cfg);
  else if (cfg.kind == "bound-fbl-ach")
    rec = run_bound_fbl_ach(cfg);
  else if (cfg.kind == "bound-converse")
    rec = run_bound_converse(cfg);
  else if (cfg.kind == "bound-asymptotic")
    rec = run_bound_asymptotic(cfg);
  else if (cfg.kind == "optimize-aloha")
    rec = run_optimize_aloha(cfg);
  else if (cfg.kind == "ldpc-aloha")
    rec = run_ldpc_aloha(cfg);
  else if (cfg.kind == "bound-reference")
    rec = run_bound_reference(cfg);
  else
    throw ConfigError("unknown kind '" + cfg.kind + "'", "kind");
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.save(cfg.out + ".json");
  return rec;
}

// ---------------------------------------------------------------------------
// figures
// ---------------------------------------------------------------------------

namespace {

ExperimentConfig base_cfg(const std::string& kind, const std::string& out, std::uint64_t seed,
                          int trials, const std::string& scale) {
  ExperimentConfig c;
  c.kind = kind;
  c.out = out;
  c.seed = seed;
  c.trials = trials;
  c.workers = int(std::max(1u, std::thread::hardware_concurrency()));
  c.scale = scale;
  return c;
}

json mu_grid_json(int points, double lo, double hi) {
  json g = json::array();
  for (int i = 0; i < points; ++i) g.push_back(lo + (hi - lo) * double(i) / double(points - 1));
  return g;
}

}  // namespace

FigurePlan reproduce_figure(const std::string& name, const std::string& scale,
                            const std::string& out_dir, const std::string& codes_dir) {
  if (scale != "desk" && scale != "full") throw ConfigError("scale must be desk|full", "scale");
  const bool full = scale == "full";
  FigurePlan plan;
  plan.figure = name;
  plan.scale = scale;
  const std::string od = out_dir + "/" + name + "_" + scale;
  auto code = [&](const std::string& f) { return codes_dir + "/" + f; };

  if (name == "fig_asymp1" || name == "fig_asymp2") {
    const double eps = name == "fig_asymp1" ? 1e-3 : 0.1;
    ExperimentConfig c = base_cfg("bound-asymptotic", od + "/asymp", 1, 1, scale);
    c.params = json{{"k", 100},
                    {"eps", eps},
                    {"mu_grid", mu_grid_json(full ? 20 : 10, 0.02, 0.2)},
                    {"curves", json::array({"conv", "conv-iid", "replica", "ach"})}};
    plan.jobs.push_back({"asymptotic", c});
    return plan;
  }

  if (name == "figK2" || name == "figK3" || name == "figK4") {
    const int r = name == "figK2" ? 2 : (name == "figK3" ? 3 : 4);
    const std::string cf = full ? code("ldpc_400_100.alist") : code("ldpc_128_64.alist");
    const int n1 = full ? 400 : 128;
    const int k = full ? 100 : 64;
    json grid = json::array();
    if (full)
      for (double e = 6.0; e <= 22.01; e += 2.0) grid.push_back(e);
    else
      for (double e = 9.0; e <= 18.01; e += 3.0) grid.push_back(e);
    const int trials = full ? 2000 : 200;
    struct ModeSpec {
      const char* curve;
      const char* mode;
    };
    for (ModeSpec ms : {ModeSpec{"blind", "blind"}, ModeSpec{"known_k", "known-k"},
                        ModeSpec{"known_kh", "known-h"}}) {
      ExperimentConfig c = base_cfg("simulate-slot", od + "/" + ms.curve, 7, trials, scale);
      c.params = json{{"code_file", cf}, {"r", r}, {"mode", ms.mode}, {"ebno_db_grid", grid}};
      plan.jobs.push_back({ms.curve, c});
    }
    ExperimentConfig fblc = base_cfg("bound-fbl-ach", od + "/fbl", 7, 1, scale);
    fblc.params = json{{"n1", n1}, {"k", k}, {"r", r}, {"ebno_db_grid", grid},
                       {"form", "mc"}, {"mc_samples", full ? 2000 : 1000}};
    plan.jobs.push_back({"fbl", fblc});
    ExperimentConfig conv = base_cfg("bound-converse", od + "/converse", 7, 1, scale);
    conv.params = json{{"curve", "pupe"}, {"n1", n1}, {"k", k}, {"r", r},
                       {"ebno_db_grid", grid}, {"mc_samples", full ? 100000 : 40000}};
    plan.jobs.push_back({"converse", conv});
    return plan;
  }

  if (name == "fig_hard_decision") {
    const std::string cf = full ? code("ldpc_400_100.alist") : code("ldpc_128_64.alist");
    json grid = json::array();
    if (full)
      for (double e = 11.0; e <= 25.01; e += 2.0) grid.push_back(e);
    else
      for (double e = 12.0; e <= 21.01; e += 3.0) grid.push_back(e);
    const int trials = full ? 2000 : 150;
    ExperimentConfig multi = base_cfg("simulate-slot", od + "/gm_full", 11, trials, scale);
    multi.params = json{{"code_file", cf}, {"r", 4}, {"T", 4}, {"mode", "blind"},
                        {"ebno_db_grid", grid}};
    plan.jobs.push_back({"gm_full", multi});
    ExperimentConfig single = base_cfg("simulate-slot", od + "/gm_simple", 11, trials, scale);
    single.params = json{{"code_file", cf}, {"r", 4}, {"T", 4}, {"mode", "blind"},
                         {"ebno_db_grid", grid}, {"gm_max_components", 1},
                         {"gm_merge_distance", 0.0}};
    plan.jobs.push_back({"gm_simple", single});
    return plan;
  }

  if (name == "fig1") {
    const int n = full ? 30000 : 2560;
    const int k = full ? 100 : 64;
    json ka;
    if (full)
      ka = json::array({1, 10, 25, 50, 75, 100, 125, 150, 175, 200, 225, 250});
    else
      ka = json::array({2, 4, 8});
    for (int T : {1, 4}) {
      ExperimentConfig c = base_cfg("optimize-aloha",
                                    od + "/aloha" + std::to_string(T) + "_fbl", 3, 1, scale);
      c.params = json{{"n", n}, {"k", k}, {"T", T}, {"eps", 0.1}, {"ka_grid", ka},
                      {"genie", true}, {"mc_samples", full ? 100000 : 20000}};
      plan.jobs.push_back({"aloha" + std::to_string(T) + "_fbl", c});
    }
    for (int T : {1, 4}) {
      ExperimentConfig c =
          base_cfg("ldpc-aloha", od + "/aloha" + std::to_string(T) + "_ldpc", 3,
                   full ? 400 : 40, scale);
      c.params = json{{"code_file", full ? code("ldpc_400_100.alist") : code("ldpc_128_64.alist")},
                      {"n", n}, {"T", T}, {"eps", 0.1}, {"ka_grid", ka},
                      {"ebno_db_start", 8.0}, {"ebno_db_stop", 26.0},
                      {"ebno_db_step", full ? 0.5 : 1.0}};
      plan.jobs.push_back({"aloha" + std::to_string(T) + "_ldpc", c});
    }
    for (const char* curve : {"tin", "shamai-bettesh", "replica-finite"}) {
      ExperimentConfig c = base_cfg("bound-reference", od + "/" + std::string(curve), 3, 1, scale);
      c.params = json{{"curve", curve}, {"n", n}, {"k", k}, {"eps", 0.1}, {"ka_grid", ka},
                      {"mc_samples", full ? 100000 : 20000}};
      plan.jobs.push_back({curve, c});
    }
    ExperimentConfig conv = base_cfg("bound-converse", od + "/converse", 3, 1, scale);
    conv.params = json{{"curve", "ka"}, {"n", n}, {"k", k}, {"eps", 0.1}, {"ka_grid", ka},
                       {"mc_samples", full ? 100000 : 40000}};
    plan.jobs.push_back({"converse", conv});
    return plan;
  }

  if (name == "fig2") {
    const int n = full ? 30000 : 2560;
    const std::string cf = full ? code("ldpc_400_100.alist") : code("ldpc_128_64.alist");
    const int n1 = full ? 400 : 128;
    json grid = json::array();
    for (double e = full ? 7.0 : 10.0; e <= (full ? 22.01 : 20.01); e += full ? 1.0 : 2.0)
      grid.push_back(e);
    const std::vector<int> kas = full ? std::vector<int>{50, 150, 250} : std::vector<int>{4, 8};
    for (int ka : kas) {
      ExperimentConfig c =
          base_cfg("simulate-frame", od + "/ka_" + std::to_string(ka), 5, full ? 500 : 50, scale);
      c.params = json{{"decoder", "ldpc"}, {"code_file", cf}, {"n", n}, {"L", n / n1},
                      {"ka", ka}, {"T", 4}, {"mode", "blind"}, {"ebno_db_grid", grid}};
      plan.jobs.push_back({"ka_" + std::to_string(ka), c});
    }
    return plan;
  }

  throw ConfigError("unknown figure '" + name + "'");
}

std::vector<ResultRecord> run_figure(const FigurePlan& plan) {
  std::vector<ResultRecord> out;
  out.reserve(plan.jobs.size());
  for (const auto& job : plan.jobs) out.push_back(run(job.config));
  return out;
}

}  // namespace uramac::harness
