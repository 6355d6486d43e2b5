// Copyright 2026 The GeoAgent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geoagent/llm/gateway.hpp"
#include "geoagent/sandbox/repair.hpp"

namespace geoagent::qc {

using nlohmann::json;

inline constexpr int kDefaultThreshold = 8;
inline constexpr int kMaxIterations = 5;
inline constexpr const char* kCritiqueMarker = "Stage: critique";

inline constexpr std::array<const char*, 5> kDimensions = {
    "axes_units", "legend", "domain_conventions", "overlap", "readability"};

struct DimensionResult {
  std::string name;
  bool pass = false;
  std::string note;

  friend bool operator==(const DimensionResult&, const DimensionResult&) = default;
};

struct Critique {
  int composite = 0;
  std::vector<DimensionResult> dimensions;  // in kDimensions order
  std::vector<std::string> feedback;

  friend bool operator==(const Critique&, const Critique&) = default;
};

const json& critique_schema();
json to_json(const Critique& c);
/// Missing feedback below the threshold is filled from the notes of failed
/// dimensions; SchemaViolation when that leaves it empty.
Critique critique_from_json(const json& value, int threshold = kDefaultThreshold);

struct Image {
  std::vector<std::uint8_t> bytes;
  std::string media_type;
};

/// Throws NotAnImage for empty bytes, a non-image media type, or content
/// whose magic bytes do not match the media type.
void check_image(const Image& image);
Image load_image(const std::string& path);

std::string default_rubric();

/// Schema-constrained vision call.
Critique critique(const Image& image, const std::string& rubric, llm::Backend& vlm,
                  const std::string& model_tag, int threshold = kDefaultThreshold);

struct QcIteration {
  std::string artifact_path;
  Critique critique;
};

struct QcRecord {
  std::vector<QcIteration> iterations;
  bool accepted = false;
  std::optional<std::string> failure;  // generation failure that ended the loop
};

struct QcConfig {
  int threshold = kDefaultThreshold;
  int max_iter = kMaxIterations;
  std::string rubric = default_rubric();
  std::string vlm_model = "vision";
};

/// Produces the figure for one iteration and returns its path. Receives
/// the feedback gathered so far, oldest first. Throws on failure.
using FigureGenerator =
    std::function<std::string(const std::vector<std::string>& feedback, int iteration)>;

/// Reads the file the generator names; `loader` defaults to load_image.
QcRecord qc_loop(const FigureGenerator& generate, llm::Backend& vlm, const QcConfig& config = {},
                 const std::function<Image(const std::string&)>& loader = {});

/// Figure task text with the accumulated feedback appended.
std::string figure_prompt(const std::string& task, const std::vector<std::string>& feedback);

/// Generation through the repair loop on the session kernel; the newest
/// image artifact of the final execution is the figure.
QcRecord qc_loop(const std::string& figure_task, sandbox::KernelHandle& kernel,
                 llm::Backend& primary, llm::Backend& secondary, llm::Backend& vlm,
                 const sandbox::RepairConfig& repair, const QcConfig& config = {});

struct Exemplar {
  std::string dimensionality;  // gridded | profile | timeseries | tabular | trajectory
  std::string intent;          // map | section | line | scatter | distribution | ...
  std::string guidance_text;
};

class ExemplarCatalog {
 public:
  /// Throws DuplicateId on a repeated tag pair.
  explicit ExemplarCatalog(std::vector<Exemplar> exemplars);

  std::optional<Exemplar> select(const std::string& dimensionality,
                                 const std::string& intent) const;
  std::size_t size() const { return exemplars_.size(); }

 private:
  std::vector<Exemplar> exemplars_;
};

const ExemplarCatalog& default_exemplars();

}  // namespace geoagent::qc
