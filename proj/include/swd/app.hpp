#pragma once

// Command implementations behind the `swd` executable. Exit codes: 0 success,
// 1 verification/assertion failure, 2 usage, config or input error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swd/bench.hpp"
#include "swd/dropout.hpp"
#include "swd/pgm.hpp"
#include "swd/train.hpp"
#include "swd/verify.hpp"
#include "swd/wavelet.hpp"

namespace swd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace fs = std::filesystem;
using nlohmann::json;

namespace detail {

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw FormatError("cannot create output directory " + dir.string());
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw FormatError("cannot write " + path.string());
}

inline double energy(std::span<const double> v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

/// A 1D band laid out row-major in strips of the source image width; the tail is padded.
inline Matrix strip(std::span<const double> v, std::size_t width, double pad) {
  const std::size_t w = std::min(width, v.size());
  const std::size_t rows = (v.size() + w - 1) / w;
  Matrix m(rows, w, pad);
  std::copy(v.begin(), v.end(), m.data().begin());
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// decompose / reconstruct

struct DecomposeArgs {
  std::string input;
  std::string out;
  std::string wavelet = "db3";
  std::string mode = "2d";  // "2d" (one level, ll/lh/hl/hh) or "1d" (row-major flatten, J=3, ap/l1/l2/l3)
};

/// Per band: a display PGM, the exact coefficients as a tensor file, and a manifest entry.
inline int cmd_decompose(const DecomposeArgs& a, std::ostream& log) {
  const auto f = filter_by_name(a.wavelet);
  if (a.mode != "1d" && a.mode != "2d") throw ConfigError("--mode must be 1d or 2d");
  const auto img = load_pgm(a.input);
  const Matrix m = pgm_to_matrix(img);
  const fs::path dir(a.out);
  detail::ensure_dir(dir);

  json man{{"wavelet", f.name}, {"mode", a.mode}, {"height", img.height}, {"width", img.width}, {"maxval", img.maxval}};
  man["bands"] = json::array();
  auto emit = [&](const std::string& name, const Matrix& coeffs, const Matrix& display, bool signed_band) {
    save_pgm((dir / (name + ".pgm")).string(), band_to_pgm(display, signed_band));
    save_tensor((dir / (name + ".bin")).string(), Tensor4({1, 1, coeffs.rows(), coeffs.cols()}, coeffs.values()));
    man["bands"].push_back({{"name", name},
                            {"rows", coeffs.rows()},
                            {"cols", coeffs.cols()},
                            {"energy", detail::energy(coeffs.data())},
                            {"image", name + ".pgm"},
                            {"tensor", name + ".bin"}});
    log << name << ": " << coeffs.rows() << "x" << coeffs.cols() << '\n';
  };

  if (a.mode == "2d") {
    const auto b = dwt2d(m, f);
    emit("ll", b.ll, b.ll, false);
    emit("lh", b.lh, b.lh, true);
    emit("hl", b.hl, b.hl, true);
    emit("hh", b.hh, b.hh, true);
  } else {
    const auto p = dwt1d(m.data(), f, 3);
    man["lens"] = p.lens;
    auto emit1d = [&](const std::string& name, const std::vector<double>& v, bool signed_band) {
      const double pad = signed_band ? 0.0 : *std::min_element(v.begin(), v.end());
      emit(name, Matrix(1, v.size(), v), detail::strip(v, img.width, pad), signed_band);
    };
    emit1d("ap", p.ap, false);
    for (std::size_t j = 0; j < 3; ++j) emit1d("l" + std::to_string(j + 1), p.details[j], true);
  }
  detail::write_text_file(dir / "manifest.json", man.dump(2) + "\n");
  return kExitOk;
}

struct ReconstructArgs {
  std::string dir;  // output directory of decompose
  std::string out;  // PGM path
};

inline int cmd_reconstruct(const ReconstructArgs& a, std::ostream& log) {
  const fs::path dir(a.dir);
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError("cannot open " + (dir / "manifest.json").string());
  json man;
  try {
    man = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  }
  try {
    const auto f = filter_by_name(man.at("wavelet").get<std::string>());
    const auto mode = man.at("mode").get<std::string>();
    const auto H = man.at("height").get<std::size_t>(), W = man.at("width").get<std::size_t>();
    std::map<std::string, std::vector<double>> bands;
    for (const auto& b : man.at("bands")) {
      auto t = load_tensor((dir / b.at("tensor").get<std::string>()).string());
      bands[b.at("name").get<std::string>()] = std::move(t).values();
    }
    auto band = [&](const std::string& n) -> std::vector<double>& {
      auto it = bands.find(n);
      if (it == bands.end()) throw FormatError("manifest lacks band " + n);
      return it->second;
    };
    Matrix rec;
    if (mode == "2d") {
      const std::size_t kh = coeff_length(H, f.length()), kw = coeff_length(W, f.length());
      Bands2D b{Matrix(kh, kw, band("ll")), Matrix(kh, kw, band("lh")), Matrix(kh, kw, band("hl")),
                Matrix(kh, kw, band("hh")), H, W};
      rec = idwt2d(b, f);
    } else if (mode == "1d") {
      Pyramid1D p{band("ap"), {band("l1"), band("l2"), band("l3")}, man.at("lens").get<std::vector<std::size_t>>()};
      rec = Matrix(H, W, idwt1d(p, f));
    } else {
      throw FormatError("manifest mode must be 1d or 2d");
    }
    std::size_t clamped = 0;
    save_pgm(a.out, matrix_to_pgm(rec, man.at("maxval").get<std::uint32_t>(), &clamped));
    log << "wrote " << a.out << " (" << W << "x" << H << ", " << clamped << " clamped)\n";
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// dropout

struct DropoutArgs {
  std::string input;
  std::string out;
  std::string variant = "swd1d";
  double p = 0.1;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::string wavelet = "db3";
  std::vector<std::string> bands;       // restrict masking to these bands
  std::vector<std::string> force_drop;  // SWD only: drop exactly these bands instead of sampling
};

/// Writes dropout.pgm, dropout.bin (unquantized), mask.swdm and summary.json.
inline int cmd_dropout(const DropoutArgs& a, std::ostream& log) {
  SpectralDropoutConfig cfg;
  cfg.variant = parse_variant(a.variant);
  cfg.p = a.p;
  cfg.eta = a.eta;
  cfg.wavelet = a.wavelet;
  cfg.levels = cfg.variant == Variant::swd1d ? 3 : cfg.variant == Variant::swd2d ? 1 : 0;
  if (!a.bands.empty()) {
    BandSet sel;
    for (const auto& n : a.bands) sel = sel.with(parse_band(cfg.variant, n));
    cfg.band_select = sel;
    cfg.allow_approx_drop = sel.contains(BandSet::approx);
  }
  cfg.validate();

  const auto img = load_pgm(a.input);
  const Tensor4 x({1, 1, img.height, img.width}, pgm_to_matrix(img).values());
  SeededRng rng(a.seed);
  DropoutResult res;
  if (!a.force_drop.empty()) {
    if (!is_wavelet_variant(cfg.variant)) throw ConfigError("--force-drop applies to swd1d/swd2d only");
    BitVector bits(detail::swd_bit_count(cfg), 1);
    for (const auto& n : a.force_drop) {
      const auto slot = parse_band(cfg.variant, n);
      if (!cfg.selected_bands().contains(slot)) throw ConfigError("--force-drop band " + n + " is not selected");
      bits[slot == 0 ? 3 : slot - 1] = 0;
    }
    auto rec = forced_band_record(cfg, std::move(bits));
    rec.seed = a.seed;
    res = {replay(x, rec, cfg), rec};
  } else {
    res = spectral_dropout_forward(x, cfg, rng, Mode::train);
  }

  const fs::path dir(a.out);
  detail::ensure_dir(dir);
  std::size_t clamped = 0;
  save_pgm((dir / "dropout.pgm").string(),
           matrix_to_pgm(Matrix(img.height, img.width, res.output.values()), img.maxval, &clamped));
  save_tensor((dir / "dropout.bin").string(), res.output);
  {
    std::ofstream mf(dir / "mask.swdm", std::ios::binary);
    if (!mf) throw FormatError("cannot write mask record");
    write_mask_record(mf, res.record);
  }

  json s{{"variant", to_string(cfg.variant)}, {"p", cfg.p},           {"eta", cfg.eta},
         {"seed", a.seed},                    {"forced", !a.force_drop.empty()},
         {"energy_before", detail::energy(x.data())}, {"energy_after", detail::energy(res.output.data())},
         {"clamped_pixels", clamped}};
  if (is_wavelet_variant(cfg.variant)) {
    s["wavelet"] = cfg.wavelet;
    json dropped = json::array();
    const auto sel = cfg.selected_bands();
    for (std::size_t slot = 0; slot < 4; ++slot)
      if (sel.contains(slot) && !res.record.bits[slot == 0 ? 3 : slot - 1]) dropped.push_back(band_name(cfg.variant, slot));
    s["bands_dropped"] = dropped;
  } else {
    std::size_t zeros = 0;
    for (auto b : res.record.bits) zeros += b ? 0 : 1;
    s["coefficients_dropped"] = zeros;
    s["coefficients_total"] = res.record.bits.size();
  }
  detail::write_text_file(dir / "summary.json", s.dump(2) + "\n");
  log << s.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string suite = "all";
  std::string json_out;
  std::optional<std::size_t> perturb_tap;  // mutation smoke test: nudge one db3 tap by 1e-3
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& log) {
  VerifyOptions o;
  if (a.perturb_tap) {
    if (*a.perturb_tap >= 6) throw ConfigError("--perturb-tap must be in 0..5");
    o.filters = {perturbed_db3(*a.perturb_tap, 1e-3)};
  }
  const auto rep = run_verify(a.suite, o);
  rep.write_text(log);
  if (!a.json_out.empty()) detail::write_text_file(a.json_out, rep.to_json().dump(2) + "\n");
  return rep.all_pass() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// train / sweep configuration

/// JSON object reader that reports errors with the dotted path of the field.
class ConfigReader {
 public:
  ConfigReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  /// Marks an optional key as known (it may be absent or null).
  void allow(const std::string& key) { seen_.push_back(key); }

  const json& raw(const std::string& key) {
    seen_.push_back(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return allow(key), def;
    const auto& v = raw(key);
    if (!v.is_number()) fail(where(key), "expected a number");
    return v.get<double>();
  }

  std::uint64_t count(const std::string& key, std::uint64_t def) {
    if (!has(key)) return allow(key), def;
    return as_count(raw(key), where(key));
  }

  bool flag(const std::string& key, bool def) {
    if (!has(key)) return allow(key), def;
    const auto& v = raw(key);
    if (!v.is_boolean()) fail(where(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, std::string def) {
    if (!has(key)) return allow(key), def;
    const auto& v = raw(key);
    if (!v.is_string()) fail(where(key), "expected a string");
    return v.get<std::string>();
  }

  const json& array(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(where(key), "expected an array");
    return v;
  }

  /// Rejects keys that no accessor asked for.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) fail(where(k), "unknown field");
  }

  static std::uint64_t as_count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(where, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

struct SweepSpec {
  std::string kind;  // positions | bands | hparams
  std::vector<NetPosition> positions;
  std::vector<BandSet> band_sets;
  Variant variant = Variant::swd1d;
  std::vector<double> p_grid = default_p_grid();
  std::vector<double> eta_grid = default_eta_grid();
};

struct TrainConfig {
  DatasetOptions dataset;
  ToyNetSpec net = ToyNetSpec::standard();
  std::optional<SpectralDropoutConfig> dropout;
  TrainOptions optimizer = [] {
    TrainOptions o;
    o.record_timing = false;  // keeps metric CSVs byte-identical across reruns
    return o;
  }();
  std::vector<std::uint64_t> seeds{0};
  std::optional<SweepSpec> sweep;
};

namespace detail {

inline SpectralDropoutConfig parse_dropout(const json& j, const std::string& path) {
  ConfigReader r(j, path);
  SpectralDropoutConfig c;
  try {
    c.variant = parse_variant(r.text("variant", "swd1d"));
  } catch (const ConfigError& e) {
    ConfigReader::fail(r.where("variant"), e.what());
  }
  c.p = r.number("p", 0.1);
  c.eta = r.number("eta", 0.0);
  c.wavelet = r.text("wavelet", "db3");
  c.levels = c.variant == Variant::swd1d ? 3 : c.variant == Variant::swd2d ? 1 : 0;
  if (r.has("bands")) {
    BandSet sel;
    const auto& arr = r.array("bands");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto w = r.where("bands") + "[" + std::to_string(i) + "]";
      if (!arr[i].is_string()) ConfigReader::fail(w, "expected a band name");
      try {
        sel = sel.with(parse_band(c.variant, arr[i].get<std::string>()));
      } catch (const ConfigError& e) {
        ConfigReader::fail(w, e.what());
      }
    }
    c.band_select = sel;
  }
  c.allow_approx_drop = r.flag("allow_approx_drop", false);
  r.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    ConfigReader::fail(path, e.what());
  }
  return c;
}

inline ToyNetSpec parse_net(const json& j, const std::string& path) {
  ConfigReader r(j, path);
  ToyNetSpec spec = ToyNetSpec::standard();
  if (r.has("blocks")) {
    spec.blocks.clear();
    const auto& arr = r.array("blocks");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ConfigReader b(arr[i], r.where("blocks") + "[" + std::to_string(i) + "]");
      LayerSpec l{};
      try {
        l.kind = parse_layer_kind(b.text("kind", ""));
      } catch (const ConfigError& e) {
        ConfigReader::fail(b.where("kind"), e.what());
      }
      l.out = b.count("out", 0);
      b.finish();
      spec.blocks.push_back(l);
    }
  }
  spec.insertion_point = r.count("insertion_point", spec.insertion_point);
  try {
    spec.placement = parse_placement(r.text("placement", to_string(spec.placement)));
  } catch (const ConfigError& e) {
    ConfigReader::fail(r.where("placement"), e.what());
  }
  r.finish();
  try {
    spec.validate();
    ToyNet probe(spec, {1, 1, kImageSide, kImageSide}, 0);  // catches pool blocks on odd sizes
  } catch (const ConfigError& e) {
    ConfigReader::fail(path, e.what());
  }
  return spec;
}

inline std::vector<double> parse_grid(ConfigReader& r, const std::string& key, std::vector<double> def) {
  if (!r.has(key)) return r.allow(key), def;
  std::vector<double> out;
  const auto& arr = r.array(key);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) ConfigReader::fail(r.where(key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(arr[i].get<double>());
  }
  if (out.empty()) ConfigReader::fail(r.where(key), "must not be empty");
  return out;
}

inline SweepSpec parse_sweep(const json& j, const std::string& path, const TrainConfig& cfg) {
  ConfigReader r(j, path);
  SweepSpec s;
  s.kind = r.text("kind", "");
  if (s.kind == "positions") {
    if (!cfg.dropout) ConfigReader::fail(path, "a positions sweep needs a dropout section");
    const auto& arr = r.array("positions");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ConfigReader p(arr[i], r.where("positions") + "[" + std::to_string(i) + "]");
      NetPosition pos{p.count("insertion_point", 0), Placement::after_conv};
      try {
        pos.placement = parse_placement(p.text("placement", "after_conv"));
      } catch (const ConfigError& e) {
        ConfigReader::fail(p.where("placement"), e.what());
      }
      p.finish();
      s.positions.push_back(pos);
    }
  } else if (s.kind == "bands") {
    if (!cfg.dropout || !is_wavelet_variant(cfg.dropout->variant))
      ConfigReader::fail(path, "a bands sweep needs a swd1d or swd2d dropout section");
    const auto& arr = r.array("band_sets");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto w = r.where("band_sets") + "[" + std::to_string(i) + "]";
      if (!arr[i].is_array()) ConfigReader::fail(w, "expected an array of band names");
      BandSet set;
      for (std::size_t k = 0; k < arr[i].size(); ++k) {
        if (!arr[i][k].is_string()) ConfigReader::fail(w + "[" + std::to_string(k) + "]", "expected a band name");
        try {
          set = set.with(parse_band(cfg.dropout->variant, arr[i][k].get<std::string>()));
        } catch (const ConfigError& e) {
          ConfigReader::fail(w + "[" + std::to_string(k) + "]", e.what());
        }
      }
      s.band_sets.push_back(set);
    }
  } else if (s.kind == "hparams") {
    const std::string def = cfg.dropout ? to_string(cfg.dropout->variant) : "swd1d";
    try {
      s.variant = parse_variant(r.text("variant", def));
    } catch (const ConfigError& e) {
      ConfigReader::fail(r.where("variant"), e.what());
    }
    s.p_grid = parse_grid(r, "p_grid", default_p_grid());
    s.eta_grid = parse_grid(r, "eta_grid", default_eta_grid());
  } else {
    ConfigReader::fail(r.where("kind"), "expected positions, bands or hparams");
  }
  r.finish();
  return s;
}

}  // namespace detail

inline TrainConfig parse_train_config(const json& j) {
  ConfigReader root(j, "config");
  TrainConfig c;
  if (root.has("dataset")) {
    ConfigReader d(root.raw("dataset"), root.where("dataset"));
    c.dataset.train = d.count("train", c.dataset.train);
    c.dataset.test = d.count("test", c.dataset.test);
    c.dataset.seed = d.count("seed", c.dataset.seed);
    c.dataset.noise = d.number("noise", c.dataset.noise);
    c.dataset.center_jitter = d.number("center_jitter", c.dataset.center_jitter);
    c.dataset.contrast_min = d.number("contrast_min", c.dataset.contrast_min);
    d.finish();
  } else {
    root.allow("dataset");
  }
  if (root.has("net")) c.net = detail::parse_net(root.raw("net"), root.where("net"));
  else root.allow("net");
  if (root.has("dropout")) c.dropout = detail::parse_dropout(root.raw("dropout"), root.where("dropout"));
  else root.allow("dropout");
  if (root.has("optimizer")) {
    ConfigReader o(root.raw("optimizer"), root.where("optimizer"));
    c.optimizer.epochs = o.count("epochs", c.optimizer.epochs);
    c.optimizer.batch_size = o.count("batch_size", c.optimizer.batch_size);
    c.optimizer.lr = o.number("lr", c.optimizer.lr);
    c.optimizer.momentum = o.number("momentum", c.optimizer.momentum);
    o.finish();
    try {
      c.optimizer.validate();
    } catch (const ConfigError& e) {
      ConfigReader::fail(root.where("optimizer"), e.what());
    }
  } else {
    root.allow("optimizer");
  }
  c.optimizer.gradcheck = root.flag("gradcheck", true);
  c.optimizer.record_timing = root.flag("record_timing", false);
  if (root.has("seeds")) {
    c.seeds.clear();
    const auto& arr = root.array("seeds");
    for (std::size_t i = 0; i < arr.size(); ++i)
      c.seeds.push_back(ConfigReader::as_count(arr[i], root.where("seeds") + "[" + std::to_string(i) + "]"));
    if (c.seeds.empty()) ConfigReader::fail(root.where("seeds"), "must not be empty");
  } else {
    root.allow("seeds");
  }
  if (root.has("sweep")) c.sweep = detail::parse_sweep(root.raw("sweep"), root.where("sweep"), c);
  else root.allow("sweep");
  root.finish();
  try {
    make_synthetic_dataset({1, 1, c.dataset.seed, c.dataset.noise, c.dataset.center_jitter, c.dataset.contrast_min});
  } catch (const ConfigError& e) {
    ConfigReader::fail(root.where("dataset"), e.what());
  }
  if (c.dataset.train == 0 || c.dataset.test == 0) ConfigReader::fail(root.where("dataset"), "train and test must be positive");
  return c;
}

inline TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return parse_train_config(j);
}

namespace detail {

inline std::string file_label(const std::string& label) {
  std::string s = label;
  for (auto& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '.') ch = '_';
  return s;
}

/// runs/<label>_seed<k>.csv per run, then table.csv and summary.txt.
inline int write_table(const SweepTable& t, const fs::path& dir, std::ostream& log) {
  ensure_dir(dir / "runs");
  bool any_failed = false;
  for (const auto& row : t.rows) {
    std::ostringstream csv;
    row.metrics.write_csv(csv);
    write_text_file(dir / "runs" / (file_label(row.label) + "_seed" + std::to_string(row.seed) + ".csv"), csv.str());
    if (row.metrics.failed) {
      any_failed = true;
      log << "run " << row.label << " seed " << row.seed << " failed: " << row.metrics.failure << '\n';
    }
  }
  std::ostringstream table, summary;
  t.write_csv(table);
  t.write_summary(summary);
  write_text_file(dir / "table.csv", table.str());
  write_text_file(dir / "summary.txt", summary.str());
  log << summary.str();
  return any_failed ? kExitFailure : kExitOk;
}

}  // namespace detail

struct TrainArgs {
  std::string config;
  std::string out;
};

inline int cmd_train(const TrainArgs& a, std::ostream& log) {
  const auto c = load_train_config(a.config);
  const auto data = make_synthetic_dataset(c.dataset);
  SweepTable t;
  const std::string label = c.dropout ? to_string(c.dropout->variant) + ",p=" + [&] {
    std::ostringstream s;
    s << c.dropout->p;
    return s.str();
  }() : std::string("baseline");
  run_seeds(t, label, c.net, data, c.dropout, c.seeds, c.optimizer);
  return detail::write_table(t, a.out, log);
}

inline int cmd_sweep(const TrainArgs& a, std::ostream& log) {
  const auto c = load_train_config(a.config);
  if (!c.sweep) throw ConfigError("config.sweep: required for the sweep command");
  const auto data = make_synthetic_dataset(c.dataset);
  SweepTable t;
  const auto& s = *c.sweep;
  if (s.kind == "positions") t = sweep_positions(c.net, data, *c.dropout, s.positions, c.seeds, c.optimizer);
  else if (s.kind == "bands") t = sweep_bands(c.net, data, *c.dropout, s.band_sets, c.seeds, c.optimizer);
  else t = sweep_hparams(c.net, data, s.variant, s.p_grid, s.eta_grid, c.seeds, c.optimizer);
  const int rc = detail::write_table(t, a.out, log);
  const auto best = t.best();
  log << "best: " << best.label << " (test_acc " << best.mean_test_acc << ")\n";
  return rc;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string op = "dwt2d";
  std::vector<std::size_t> sizes{64, 128, 256, 512, 1024};
  std::size_t repeats = 9;
  std::string out;  // CSV
  std::string dat;  // gnuplot two-column file
  std::vector<double> expect_slope;  // {lo, hi}: exit 1 when the fitted slope falls outside
  std::vector<std::string> ttm;      // two train configs: baseline arm, dropout arm
};

inline int cmd_bench(const BenchArgs& a, std::ostream& log) {
  if (!a.ttm.empty()) {
    if (a.ttm.size() != 2) throw ConfigError("--ttm takes two config files");
    const auto base = load_train_config(a.ttm[0]);
    const auto arm = load_train_config(a.ttm[1]);
    const auto& d0 = base.dataset;
    const auto& d1 = arm.dataset;
    const bool same_data = d0.train == d1.train && d0.test == d1.test && d0.seed == d1.seed && d0.noise == d1.noise &&
                           d0.center_jitter == d1.center_jitter && d0.contrast_min == d1.contrast_min;
    const auto& o0 = base.optimizer;
    const auto& o1 = arm.optimizer;
    const bool same_opt = o0.epochs == o1.epochs && o0.batch_size == o1.batch_size && o0.lr == o1.lr && o0.momentum == o1.momentum;
    auto blocks_equal = [](const ToyNetSpec& x, const ToyNetSpec& y) {
      if (x.blocks.size() != y.blocks.size()) return false;
      for (std::size_t i = 0; i < x.blocks.size(); ++i)
        if (x.blocks[i].kind != y.blocks[i].kind || x.blocks[i].out != y.blocks[i].out) return false;
      return x.insertion_point == y.insertion_point && x.placement == y.placement;
    };
    if (!same_data || !same_opt || base.seeds != arm.seeds || !blocks_equal(base.net, arm.net))
      throw ConfigError("--ttm arms must share dataset, net, optimizer and seeds");
    auto opt = base.optimizer;
    opt.gradcheck = false;
    const auto r = ttm(base.net, make_synthetic_dataset(base.dataset), base.dropout, arm.dropout, opt, base.seeds);
    json j{{"baseline_epoch_seconds", r.baseline_seconds}, {"dropout_epoch_seconds", r.dropout_seconds}, {"ttm", r.ratio}};
    log << "TTM " << std::fixed << std::setprecision(3) << r.ratio << std::defaultfloat << '\n';
    if (!a.out.empty()) detail::write_text_file(a.out, j.dump(2) + "\n");
    return kExitOk;
  }
  const auto& names = bench_op_names();
  if (std::find(names.begin(), names.end(), a.op) == names.end()) throw ConfigError("unknown --op " + a.op);
  if (a.sizes.empty()) throw ConfigError("--sizes must not be empty");
  const auto rep = time_op(a.op, bench_op(a.op), a.sizes, {a.repeats, 2e-3});
  std::ostringstream csv;
  rep.write_csv(csv);
  if (!a.out.empty()) detail::write_text_file(a.out, csv.str());
  if (!a.dat.empty()) {
    std::ostringstream dat;
    rep.write_dat(dat);
    detail::write_text_file(a.dat, dat.str());
  }
  log << csv.str();
  if (!a.expect_slope.empty()) {
    if (a.expect_slope.size() != 2 || a.sizes.size() < 2) throw ConfigError("--expect-slope needs lo hi and two or more sizes");
    const bool ok = rep.fit.slope >= a.expect_slope[0] && rep.fit.slope <= a.expect_slope[1];
    log << (ok ? "slope within " : "slope outside ") << '[' << a.expect_slope[0] << ", " << a.expect_slope[1] << "]\n";
    return ok ? kExitOk : kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

/// Parses argv and dispatches; never throws.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral wavelet / Fourier dropout toolkit", "swd"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "Wavelet sub-band images and coefficients of a PGM");
  c_dec->add_option("input", dec.input, "input PGM")->required();
  c_dec->add_option("--out", dec.out, "output directory")->required();
  c_dec->add_option("--wavelet", dec.wavelet)->check(CLI::IsMember({"db3", "haar"}));
  c_dec->add_option("--mode", dec.mode, "2d: one level; 1d: flattened, three levels")->check(CLI::IsMember({"1d", "2d"}));

  ReconstructArgs rec;
  auto* c_rec = app.add_subcommand("reconstruct", "Invert a decompose directory");
  c_rec->add_option("dir", rec.dir, "decompose output directory")->required();
  c_rec->add_option("--out", rec.out, "output PGM")->required();

  DropoutArgs drop;
  auto* c_drop = app.add_subcommand("dropout", "Apply one seeded spectral dropout draw to a PGM");
  c_drop->add_option("input", drop.input)->required();
  c_drop->add_option("--out", drop.out, "output directory")->required();
  c_drop->add_option("--variant", drop.variant)->check(CLI::IsMember({"swd1d", "swd2d", "sfd1d", "sfd2d"}));
  c_drop->add_option("--p", drop.p, "drop probability");
  c_drop->add_option("--eta", drop.eta, "pruning fraction (SFD)");
  c_drop->add_option("--seed", drop.seed);
  c_drop->add_option("--wavelet", drop.wavelet)->check(CLI::IsMember({"db3", "haar"}));
  c_drop->add_option("--bands", drop.bands, "bands subject to masking, e.g. L3 or HL")->delimiter(',');
  c_drop->add_option("--force-drop", drop.force_drop, "drop exactly these bands (SWD)")->delimiter(',');

  VerifyArgs ver;
  auto* c_ver = app.add_subcommand("verify", "Run the property suites");
  c_ver->add_option("--suite", ver.suite, "wavelet, dct, dropout, grad or all");
  c_ver->add_option("--json", ver.json_out, "write a JSON report here");
  c_ver->add_option("--perturb-tap", ver.perturb_tap, "replace the filters with db3 nudged at this tap")->group("");

  BenchArgs ben;
  auto* c_ben = app.add_subcommand("bench", "Time an operator over square sizes, or compare training time");
  c_ben->add_option("--op", ben.op, "dwt2d, dct2d, dct2d_direct, swd1d, swd2d, sfd1d or sfd2d");
  c_ben->add_option("--sizes", ben.sizes)->delimiter(',');
  c_ben->add_option("--repeats", ben.repeats)->check(CLI::Range(5, 1000));
  c_ben->add_option("--out", ben.out, "CSV output (JSON with --ttm)");
  c_ben->add_option("--dat", ben.dat, "gnuplot data output");
  c_ben->add_option("--expect-slope", ben.expect_slope, "lo hi")->expected(2);
  c_ben->add_option("--ttm", ben.ttm, "baseline.json dropout.json")->expected(2);

  TrainArgs tr, sw;
  auto* c_tr = app.add_subcommand("train", "Train the toy net per seed from a JSON config");
  c_tr->add_option("--config", tr.config)->required();
  c_tr->add_option("--out", tr.out, "output directory")->required();
  auto* c_sw = app.add_subcommand("sweep", "Run the sweep described in a JSON config");
  c_sw->add_option("--config", sw.config)->required();
  c_sw->add_option("--out", sw.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (*c_dec) return cmd_decompose(dec, out);
    if (*c_rec) return cmd_reconstruct(rec, out);
    if (*c_drop) return cmd_dropout(drop, out);
    if (*c_ver) return cmd_verify(ver, out);
    if (*c_ben) return cmd_bench(ben, out);
    if (*c_tr) return cmd_train(tr, out);
    if (*c_sw) return cmd_sweep(sw, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace swd
