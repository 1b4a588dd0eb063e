#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "specan/baselines.hpp"
#include "specan/dataset.hpp"
#include "specan/errors.hpp"
#include "specan/evaluation.hpp"
#include "specan/scoring.hpp"
#include "specan/vae.hpp"

namespace specan {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

// Shortest round-trippable decimal form of a double; all text outputs use
// this so reruns are byte-identical.
inline std::string fmt_g17(double v) {
  char buf[46];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

template <typename T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw format_error(std::string("truncated file while reading ") + what);
  return v;
}

inline void write_magic(std::ostream& os, const char m[4]) { os.write(m, 4); }

inline void expect_magic(std::istream& is, const char m[4], const char* what) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, m, 4) != 0)
    throw format_error(std::string("bad magic, not a ") + what + " file");
}

}  // namespace detail

inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::uint16_t kModelVersion = 1;

// Dataset container: "SPGD", version u16, count u32, height u16, width u16,
// epsilon f64, then per sample a label byte (0 normal, 1 abnormal) followed
// by height*width float32 pixels, row-major, little-endian throughout.
inline void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds) {
  ds.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot open for write: " + path.string());
  detail::write_magic(os, "SPGD");
  detail::write_raw<std::uint16_t>(os, kDatasetVersion);
  detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(ds.size()));
  detail::write_raw<std::uint16_t>(os, kImageSize);
  detail::write_raw<std::uint16_t>(os, kImageSize);
  detail::write_raw<double>(os, ds.epsilon);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    detail::write_raw<std::uint8_t>(os, static_cast<std::uint8_t>(ds.labels[i]));
    const double* row = ds.pixels.row(i);
    for (std::size_t j = 0; j < ds.pixels.cols; ++j)
      detail::write_raw<float>(os, static_cast<float>(row[j]));
  }
  if (!os) throw format_error("write failed: " + path.string());
}

inline LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("cannot open: " + path.string());
  detail::expect_magic(is, "SPGD", "dataset");
  const auto version = detail::read_raw<std::uint16_t>(is, "version");
  if (version != kDatasetVersion)
    throw format_error("unsupported dataset version " + std::to_string(version));
  const auto count = detail::read_raw<std::uint32_t>(is, "sample count");
  const auto h = detail::read_raw<std::uint16_t>(is, "height");
  const auto w = detail::read_raw<std::uint16_t>(is, "width");
  if (h != kImageSize || w != kImageSize)
    throw format_error("unsupported image shape " + std::to_string(h) + "x" + std::to_string(w));
  LabeledDataset ds;
  ds.epsilon = detail::read_raw<double>(is, "epsilon");
  ds.pixels = Mat(count, static_cast<std::size_t>(h) * w);
  ds.labels.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto lab = detail::read_raw<std::uint8_t>(is, "label");
    if (lab > 1) throw format_error("bad label byte " + std::to_string(lab));
    ds.labels[i] = static_cast<Label>(lab);
    double* row = ds.pixels.row(i);
    for (std::size_t j = 0; j < ds.pixels.cols; ++j)
      row[j] = static_cast<double>(detail::read_raw<float>(is, "pixel"));
  }
  ds.validate();
  return ds;
}

// Model container: "VAEM", version u16, layer count u32, then per layer
// rows u32 (fan-in), cols u32 (fan-out), activation tag u8, rows*cols f64
// weights row-major, cols f64 biases. A VAE stores
// [encoder..., mu head, sigma head, decoder...]; the two parallel heads are
// recognized structurally on load (identical shape, identity+softplus tags).
inline void save_layers(std::ostream& os, const std::vector<const DenseLayer*>& layers) {
  detail::write_magic(os, "VAEM");
  detail::write_raw<std::uint16_t>(os, kModelVersion);
  detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(layers.size()));
  for (const DenseLayer* l : layers) {
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(l->fan_in()));
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(l->fan_out()));
    detail::write_raw<std::uint8_t>(os, static_cast<std::uint8_t>(l->act));
    os.write(reinterpret_cast<const char*>(l->w.a.data()),
             static_cast<std::streamsize>(l->w.a.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(l->b.data()),
             static_cast<std::streamsize>(l->b.size() * sizeof(double)));
  }
}

inline std::vector<DenseLayer> load_layers(std::istream& is, const std::string& what) {
  detail::expect_magic(is, "VAEM", "model");
  const auto version = detail::read_raw<std::uint16_t>(is, "version");
  if (version != kModelVersion)
    throw format_error("unsupported model version " + std::to_string(version));
  const auto count = detail::read_raw<std::uint32_t>(is, "layer count");
  if (count == 0 || count > 64) throw format_error("implausible layer count");
  std::vector<DenseLayer> layers(count);
  for (auto& l : layers) {
    const auto rows = detail::read_raw<std::uint32_t>(is, "rows");
    const auto cols = detail::read_raw<std::uint32_t>(is, "cols");
    const auto tag = detail::read_raw<std::uint8_t>(is, "activation");
    if (rows == 0 || cols == 0) throw format_error(what + ": zero layer dimension");
    if (tag > static_cast<std::uint8_t>(Activation::tanh01))
      throw format_error(what + ": unknown activation tag " + std::to_string(tag));
    l.act = static_cast<Activation>(tag);
    l.w = Mat(rows, cols);
    is.read(reinterpret_cast<char*>(l.w.a.data()),
            static_cast<std::streamsize>(l.w.a.size() * sizeof(double)));
    l.b.resize(cols);
    is.read(reinterpret_cast<char*>(l.b.data()),
            static_cast<std::streamsize>(l.b.size() * sizeof(double)));
    if (!is) throw format_error(what + ": truncated layer data");
  }
  return layers;
}

inline void save_model(const std::filesystem::path& path, const MlpVae& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot open for write: " + path.string());
  std::vector<const DenseLayer*> layers;
  for (const auto& l : m.encoder) layers.push_back(&l);
  layers.push_back(&m.mu_head);
  layers.push_back(&m.sigma_head);
  for (const auto& l : m.decoder) layers.push_back(&l);
  save_layers(os, layers);
  if (!os) throw format_error("write failed: " + path.string());
}

inline void save_model(const std::filesystem::path& path, const MlpAutoencoder& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot open for write: " + path.string());
  std::vector<const DenseLayer*> layers;
  for (const auto& l : m.layers) layers.push_back(&l);
  save_layers(os, layers);
  if (!os) throw format_error("write failed: " + path.string());
}

namespace detail {

// The two VAE heads sit side by side with identical shapes and the
// identity/softplus tag pair; a plain autoencoder chain never contains that.
inline std::optional<std::size_t> find_vae_heads(const std::vector<DenseLayer>& layers) {
  for (std::size_t p = 0; p + 1 < layers.size(); ++p) {
    if (layers[p].fan_in() == layers[p + 1].fan_in() &&
        layers[p].fan_out() == layers[p + 1].fan_out() &&
        layers[p].act == Activation::identity && layers[p + 1].act == Activation::softplus)
      return p;
  }
  return std::nullopt;
}

inline void check_chain(const std::vector<DenseLayer>& layers, std::size_t from, std::size_t to,
                        const std::string& what) {
  for (std::size_t i = from + 1; i < to; ++i)
    if (layers[i].fan_in() != layers[i - 1].fan_out())
      throw format_error(what + ": layer widths do not chain");
}

}  // namespace detail

using AnyModel = std::variant<MlpVae, MlpAutoencoder>;

inline AnyModel load_any_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("cannot open: " + path.string());
  std::vector<DenseLayer> layers = load_layers(is, path.string());

  if (auto heads = detail::find_vae_heads(layers)) {
    const std::size_t p = *heads;
    if (p == 0 || p + 2 >= layers.size()) throw format_error("model: heads at chain boundary");
    detail::check_chain(layers, 0, p, "encoder");
    detail::check_chain(layers, p + 2, layers.size(), "decoder");
    MlpVae m;
    m.encoder.assign(layers.begin(), layers.begin() + static_cast<std::ptrdiff_t>(p));
    m.mu_head = layers[p];
    m.sigma_head = layers[p + 1];
    m.decoder.assign(layers.begin() + static_cast<std::ptrdiff_t>(p) + 2, layers.end());
    m.latent_dim = m.mu_head.fan_out();
    if (m.mu_head.fan_in() != m.encoder.back().fan_out())
      throw format_error("model: head width does not match encoder output");
    if (m.decoder.front().fan_in() != m.latent_dim)
      throw format_error("model: decoder input does not match latent width");
    if (m.decoder.back().fan_out() != m.encoder.front().fan_in())
      throw format_error("model: decoder output does not match encoder input");
    return m;
  }

  detail::check_chain(layers, 0, layers.size(), "autoencoder");
  if (layers.front().fan_in() != layers.back().fan_out())
    throw format_error("autoencoder: output width does not match input");
  MlpAutoencoder m;
  m.layers = std::move(layers);
  return m;
}

inline MlpVae load_model(const std::filesystem::path& path) {
  AnyModel m = load_any_model(path);
  if (!std::holds_alternative<MlpVae>(m))
    throw format_error(path.string() + ": not a VAE model file");
  return std::move(std::get<MlpVae>(m));
}

// --- CSV -------------------------------------------------------------------

// One scores.csv row. Detectors without a reconstruction leave the noise
// floor fields empty.
struct ScoreCsvRow {
  std::uint32_t sample_id = 0;
  Label label = Label::unlabeled;
  std::string detector;
  std::string score_name;
  double score = 0;
  std::optional<double> noise_floor_in;
  std::optional<double> noise_floor_out;
};

inline constexpr const char* kScoresHeader =
    "sample_id,label,detector,score_name,score,noise_floor_in,noise_floor_out";

inline void write_scores_csv(const std::filesystem::path& path,
                             const std::vector<ScoreCsvRow>& rows) {
  std::ofstream os(path);
  if (!os) throw format_error("cannot open for write: " + path.string());
  os << kScoresHeader << "\n";
  for (const auto& r : rows) {
    os << r.sample_id << ',' << label_name(r.label) << ',' << r.detector << ',' << r.score_name
       << ',' << fmt_g17(r.score) << ',' << (r.noise_floor_in ? fmt_g17(*r.noise_floor_in) : "")
       << ',' << (r.noise_floor_out ? fmt_g17(*r.noise_floor_out) : "") << "\n";
  }
  if (!os) throw format_error("write failed: " + path.string());
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw format_error(std::string("bad number in ") + what + ": '" + s + "'");
  return v;
}

}  // namespace detail

inline std::vector<ScoreCsvRow> read_scores_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw format_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kScoresHeader)
    throw format_error(path.string() + ": missing or wrong scores header");
  std::vector<ScoreCsvRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) throw format_error(path.string() + ": wrong field count");
    ScoreCsvRow r;
    r.sample_id = static_cast<std::uint32_t>(std::stoul(f[0]));
    if (f[1] == "normal")
      r.label = Label::normal;
    else if (f[1] == "abnormal")
      r.label = Label::abnormal;
    else if (f[1] == "unlabeled")
      r.label = Label::unlabeled;
    else
      throw format_error(path.string() + ": bad label '" + f[1] + "'");
    r.detector = f[2];
    r.score_name = f[3];
    r.score = detail::parse_double(f[4], "score");
    if (!f[5].empty()) r.noise_floor_in = detail::parse_double(f[5], "noise_floor_in");
    if (!f[6].empty()) r.noise_floor_out = detail::parse_double(f[6], "noise_floor_out");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
  std::ofstream os(path);
  if (!os) throw format_error("cannot open for write: " + path.string());
  os << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points)
    os << fmt_g17(p.threshold) << ',' << fmt_g17(p.fpr) << ',' << fmt_g17(p.tpr) << "\n";
  if (!os) throw format_error("write failed: " + path.string());
}

inline RocCurve read_roc_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw format_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "threshold,fpr,tpr")
    throw format_error(path.string() + ": missing or wrong roc header");
  RocCurve c;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 3) throw format_error(path.string() + ": wrong field count");
    RocPoint p;
    p.threshold = detail::parse_double(f[0], "threshold");
    p.fpr = detail::parse_double(f[1], "fpr");
    p.tpr = detail::parse_double(f[2], "tpr");
    c.points.push_back(p);
  }
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    c.auc += (c.points[i].fpr - c.points[i - 1].fpr) *
             (c.points[i].tpr + c.points[i - 1].tpr) * 0.5;
  }
  return c;
}

inline void write_vae_loss_csv(const std::filesystem::path& path,
                               const std::vector<LossBreakdown>& history) {
  std::ofstream os(path);
  if (!os) throw format_error("cannot open for write: " + path.string());
  os << "epoch,kl,recon,total\n";
  for (std::size_t e = 0; e < history.size(); ++e)
    os << e << ',' << fmt_g17(history[e].kl_term) << ',' << fmt_g17(history[e].recon_term) << ','
       << fmt_g17(history[e].total) << "\n";
  if (!os) throw format_error("write failed: " + path.string());
}

inline void write_ae_loss_csv(const std::filesystem::path& path,
                              const std::vector<double>& history) {
  std::ofstream os(path);
  if (!os) throw format_error("cannot open for write: " + path.string());
  os << "epoch,recon\n";
  for (std::size_t e = 0; e < history.size(); ++e) os << e << ',' << fmt_g17(history[e]) << "\n";
  if (!os) throw format_error("write failed: " + path.string());
}

// Fixed-bin score histogram per class, for offline plotting.
inline void write_histogram_csv(const std::filesystem::path& path,
                                const std::vector<double>& scores,
                                const std::vector<Label>& labels, std::size_t bins = 40) {
  require(scores.size() == labels.size() && !scores.empty(), "histogram: bad input");
  require(bins > 0, "histogram: zero bins");
  const auto [mn_it, mx_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *mn_it, hi = *mx_it;
  const double span = hi - lo;
  std::vector<std::size_t> cnt_n(bins, 0), cnt_a(bins, 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::size_t b = 0;
    if (span > 0) {
      b = static_cast<std::size_t>((scores[i] - lo) / span * static_cast<double>(bins));
      if (b >= bins) b = bins - 1;
    }
    if (labels[i] == Label::abnormal)
      ++cnt_a[b];
    else
      ++cnt_n[b];
  }
  std::ofstream os(path);
  if (!os) throw format_error("cannot open for write: " + path.string());
  os << "bin_lo,bin_hi,count_normal,count_abnormal\n";
  for (std::size_t b = 0; b < bins; ++b) {
    const double blo = lo + span * static_cast<double>(b) / static_cast<double>(bins);
    const double bhi = lo + span * static_cast<double>(b + 1) / static_cast<double>(bins);
    os << fmt_g17(blo) << ',' << fmt_g17(bhi) << ',' << cnt_n[b] << ',' << cnt_a[b] << "\n";
  }
  if (!os) throw format_error("write failed: " + path.string());
}

// Debug extra: dump one flattened 64x64 image as an 8-bit PGM.
inline void write_pgm(const std::filesystem::path& path, const std::vector<double>& img,
                      double lo = 0.0, double hi = 1.0) {
  require(img.size() == kImageSize * kImageSize, "write_pgm: wrong shape");
  require(hi > lo, "write_pgm: bad range");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("cannot open for write: " + path.string());
  os << "P5\n" << kImageSize << " " << kImageSize << "\n255\n";
  // Row 0 of the image is the lowest frequency; PGM rows run top-down, so
  // flip vertically to match the usual low-frequency-at-bottom rendering.
  for (std::size_t r = kImageSize; r-- > 0;) {
    for (std::size_t c = 0; c < kImageSize; ++c) {
      double v = (img[r * kImageSize + c] - lo) / (hi - lo);
      v = std::clamp(v, 0.0, 1.0);
      os.put(static_cast<char>(static_cast<int>(v * 255.0 + 0.5)));
    }
  }
  if (!os) throw format_error("write failed: " + path.string());
}

}  // namespace specan
