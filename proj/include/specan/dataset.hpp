#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "specan/errors.hpp"
#include "specan/mat.hpp"
#include "specan/spectrogram.hpp"

namespace specan {

enum class Label : std::uint8_t { normal = 0, abnormal = 1, unlabeled = 2 };

inline const char* label_name(Label l) {
  switch (l) {
    case Label::normal: return "normal";
    case Label::abnormal: return "abnormal";
    case Label::unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

// Spectrogram collection with one label per sample. Pixel rows are flattened
// 64x64 images; values are snapped to the 32-bit grid the on-disk format
// uses, so in-memory data and a save/load round trip are bit-identical.
struct LabeledDataset {
  Mat pixels;  // n x 4096
  std::vector<Label> labels;
  double epsilon = kEpsilonDefault;

  std::size_t size() const { return pixels.rows; }

  void validate() const {
    require(pixels.cols == kImageSize * kImageSize, "LabeledDataset: wrong sample width");
    require(labels.size() == pixels.rows, "LabeledDataset: label count mismatch");
    for (double p : pixels.a)
      require(std::isfinite(p) && p >= epsilon && p <= 1.0,
              "LabeledDataset: pixel outside [epsilon, 1]");
  }
};

// Snap a pixel to its float32 representation without leaving [eps, 1]: the
// nearest float can land half an ulp below eps, and the stored file must
// satisfy the same bounds as the in-memory data.
inline float quantize_pixel(double v, double eps) {
  auto f = static_cast<float>(v);
  if (static_cast<double>(f) < eps) f = std::nextafterf(f, 2.0f);
  if (static_cast<double>(f) > 1.0) f = std::nextafterf(f, 0.0f);
  return f;
}

inline void append_sample(LabeledDataset& ds, const Spectrogram& sp, Label label) {
  require(sp.pixels.size() == kImageSize * kImageSize, "append_sample: wrong pixel count");
  const std::size_t w = kImageSize * kImageSize;
  if (ds.pixels.cols == 0) ds.pixels.cols = w;
  ds.pixels.a.reserve(ds.pixels.a.size() + w);
  for (double p : sp.pixels)
    ds.pixels.a.push_back(static_cast<double>(quantize_pixel(p, ds.epsilon)));
  ds.pixels.rows += 1;
  ds.labels.push_back(label);
}

}  // namespace specan
