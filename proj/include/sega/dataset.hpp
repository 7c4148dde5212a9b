#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sega/tensor.hpp"

namespace sega {

enum class PatternKind { ramp, checkerboard, blobs, value_noise };
enum class DistortionKind { gaussian_noise, box_blur };

std::string to_string(PatternKind k);
std::string to_string(DistortionKind k);
PatternKind pattern_from_string(const std::string& s);
DistortionKind distortion_from_string(const std::string& s);

/// Deterministic synthetic corpus: the cross product of pattern variants,
/// distortion kinds and levels, labeled with pseudo-MOS = 100 exp(-kappa *
/// level). Pixels are snapped to the 8-bit grid so the in-memory corpus is
/// bit-identical to its PPM persistence.
struct CorpusSpec {
  int height = 32;
  int width = 32;
  int channels = 3;
  std::vector<PatternKind> patterns = {PatternKind::ramp, PatternKind::checkerboard,
                                       PatternKind::blobs, PatternKind::value_noise};
  std::vector<DistortionKind> distortions = {DistortionKind::gaussian_noise,
                                             DistortionKind::box_blur};
  std::vector<double> levels = {0.0, 1.0, 2.0, 3.0, 4.0};
  int variants_per_pattern = 8;
  double kappa_noise = 0.15;
  double kappa_blur = 0.4;
  double noise_scale = 0.03;  // noise stddev per level unit
  std::uint64_t seed = 0;
};

void validate(const CorpusSpec& spec);

struct LabeledImage {
  std::string id;
  Image image;
  double mos = 100.0;  // pseudo-MOS in [0,100]
  PatternKind pattern = PatternKind::ramp;
  DistortionKind distortion = DistortionKind::gaussian_noise;
  double level = 0.0;
  int variant = 0;
};

std::vector<LabeledImage> generate_corpus(const CorpusSpec& spec);

/// Seeded shuffle then split; the halves are disjoint and cover the corpus.
std::pair<std::vector<LabeledImage>, std::vector<LabeledImage>> split_corpus(
    const std::vector<LabeledImage>& corpus, double train_fraction, std::uint64_t seed);

}  // namespace sega
