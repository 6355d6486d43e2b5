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

#include "geoagent/qc/qc.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include "geoagent/error.hpp"
#include "geoagent/llm/schema.hpp"

namespace geoagent::qc {

const json& critique_schema() {
  static const json schema = [] {
    json names = json::array();
    for (const char* n : kDimensions) names.push_back(n);
    return json{
        {"type", "object"},
        {"required", {"composite", "dimensions"}},
        {"properties",
         {{"composite", {{"type", "integer"}, {"minimum", 0}, {"maximum", 10}}},
          {"dimensions",
           {{"type", "array"},
            {"minItems", 5},
            {"maxItems", 5},
            {"items",
             {{"type", "object"},
              {"required", {"name", "pass"}},
              {"properties",
               {{"name", {{"type", "string"}, {"enum", names}}},
                {"pass", {{"type", "boolean"}}},
                {"note", {{"type", "string"}}}}},
              {"additionalProperties", false}}}}},
          {"feedback", {{"type", "array"}, {"items", {{"type", "string"}}}}}}},
        {"additionalProperties", false}};
  }();
  return schema;
}

json to_json(const Critique& c) {
  json dims = json::array();
  for (const auto& d : c.dimensions) {
    dims.push_back({{"name", d.name}, {"pass", d.pass}, {"note", d.note}});
  }
  return {{"composite", c.composite}, {"dimensions", dims}, {"feedback", c.feedback}};
}

Critique critique_from_json(const json& v, int threshold) {
  if (auto err = llm::validate_schema(v, critique_schema())) {
    throw Error(ErrorCode::SchemaViolation, "critique: " + *err);
  }
  Critique c;
  c.composite = v.at("composite").get<int>();
  for (const char* name : kDimensions) {
    auto it = std::find_if(v.at("dimensions").begin(), v.at("dimensions").end(),
                           [&](const json& d) { return d.at("name") == name; });
    if (it == v.at("dimensions").end()) {
      throw Error(ErrorCode::SchemaViolation, std::string("critique: missing dimension ") + name);
    }
    c.dimensions.push_back({name, it->at("pass").get<bool>(), it->value("note", std::string{})});
  }
  for (const auto& f : v.value("feedback", json::array())) {
    auto s = f.get<std::string>();
    if (!s.empty()) c.feedback.push_back(std::move(s));
  }
  if (c.composite < threshold && c.feedback.empty()) {
    for (const auto& d : c.dimensions) {
      if (!d.pass && !d.note.empty()) c.feedback.push_back(d.name + ": " + d.note);
    }
    if (c.feedback.empty()) {
      throw Error(ErrorCode::SchemaViolation, "critique below threshold without feedback");
    }
  }
  return c;
}

void check_image(const Image& image) {
  if (image.bytes.empty()) throw Error(ErrorCode::NotAnImage, "empty image");
  if (!sandbox::is_image_media_type(image.media_type)) {
    throw Error(ErrorCode::NotAnImage, "media type " + image.media_type);
  }
  const auto& b = image.bytes;
  bool ok = false;
  if (image.media_type == "image/png") {
    static const std::uint8_t sig[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    ok = b.size() >= 8 && std::equal(sig, sig + 8, b.begin());
  } else if (image.media_type == "image/jpeg") {
    ok = b.size() >= 3 && b[0] == 0xff && b[1] == 0xd8 && b[2] == 0xff;
  } else {
    const std::string head(b.begin(), b.begin() + static_cast<long>(std::min<std::size_t>(b.size(), 1024)));
    ok = head.find("<svg") != std::string::npos;
  }
  if (!ok) throw Error(ErrorCode::NotAnImage, "content does not match " + image.media_type);
}

Image load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotAnImage, "cannot read " + path);
  Image img;
  img.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  img.media_type = sandbox::media_type_for(path);
  return img;
}

std::string default_rubric() {
  return "Score the figure from 0 to 10 and judge five dimensions:\n"
         "axes_units: every axis labelled, with physical units\n"
         "legend: colour bars and legends present and complete\n"
         "domain_conventions: oceanographic conventions (depth increasing downward, "
         "perceptually uniform or diverging colour maps, land masked)\n"
         "overlap: no text, legend or colour bar overlapping data or each other\n"
         "readability: font sizes, tick density and title make it readable at a glance\n"
         "List concrete, actionable fixes under feedback.";
}

Critique critique(const Image& image, const std::string& rubric, llm::Backend& vlm,
                  const std::string& model_tag, int threshold) {
  check_image(image);
  llm::ChatRequest req;
  req.model_tag = model_tag;
  req.response_schema = critique_schema();
  llm::Message user;
  user.role = llm::Role::User;
  user.parts = {std::string(kCritiqueMarker) + "\n" + rubric,
                llm::ImagePart{image.bytes, image.media_type}};
  req.messages = {llm::Message::text(llm::Role::System,
                                     "You are a strict reviewer of scientific figures."),
                  user};
  const auto reply = llm::complete(req, vlm);
  return critique_from_json(*reply.structured, threshold);
}

QcRecord qc_loop(const FigureGenerator& generate, llm::Backend& vlm, const QcConfig& config,
                 const std::function<Image(const std::string&)>& loader) {
  if (config.max_iter < 1 || config.max_iter > kMaxIterations) {
    throw Error(ErrorCode::InvalidArgument, "max_iter must be within [1, 5]");
  }
  QcRecord record;
  std::vector<std::string> feedback;
  for (int i = 0; i < config.max_iter; ++i) {
    std::string path;
    Critique c;
    try {
      path = generate(feedback, i);
      c = critique(loader ? loader(path) : load_image(path), config.rubric, vlm, config.vlm_model,
                   config.threshold);
    } catch (const Error& e) {
      record.failure = e.what();
      record.accepted = false;
      return record;
    }
    record.iterations.push_back({path, c});
    if (c.composite >= config.threshold) {
      record.accepted = true;
      return record;
    }
    for (const auto& f : c.feedback) feedback.push_back(f);
  }
  return record;
}

std::string figure_prompt(const std::string& task, const std::vector<std::string>& feedback) {
  if (feedback.empty()) return task;
  std::ostringstream out;
  out << task << "\n\nReviewer feedback on the previous figure, address every item:\n";
  for (const auto& f : feedback) out << "- " << f << "\n";
  return out.str();
}

QcRecord qc_loop(const std::string& figure_task, sandbox::KernelHandle& kernel,
                 llm::Backend& primary, llm::Backend& secondary, llm::Backend& vlm,
                 const sandbox::RepairConfig& repair, const QcConfig& config) {
  FigureGenerator gen = [&](const std::vector<std::string>& feedback, int) {
    auto out = sandbox::repair_loop(figure_prompt(figure_task, feedback), kernel, primary,
                                    secondary, repair);
    if (out.kind == sandbox::OutcomeKind::Failed || !out.result) {
      throw Error(ErrorCode::InvalidArgument,
                  "figure generation failed" + (out.error ? ": " + *out.error : std::string{}));
    }
    const auto& arts = out.result->new_artifacts;
    auto it = std::find_if(arts.rbegin(), arts.rend(), [](const sandbox::ArtifactRecord& a) {
      return sandbox::is_image_media_type(a.media_type);
    });
    if (it == arts.rend()) {
      throw Error(ErrorCode::NotAnImage, "figure code produced no image artifact");
    }
    return it->path;
  };
  return qc_loop(gen, vlm, config);
}

ExemplarCatalog::ExemplarCatalog(std::vector<Exemplar> exemplars) {
  for (auto& e : exemplars) {
    if (select(e.dimensionality, e.intent)) {
      throw Error(ErrorCode::DuplicateId,
                  "exemplar (" + e.dimensionality + ", " + e.intent + ") registered twice");
    }
    exemplars_.push_back(std::move(e));
  }
}

std::optional<Exemplar> ExemplarCatalog::select(const std::string& dimensionality,
                                                const std::string& intent) const {
  for (const auto& e : exemplars_) {
    if (e.dimensionality == dimensionality && e.intent == intent) return e;
  }
  return std::nullopt;
}

const ExemplarCatalog& default_exemplars() {
  static const ExemplarCatalog catalog({
      {"gridded", "map",
       "pcolormesh on a cartographic projection; coastlines and land mask; colour bar with "
       "units; diverging map for anomalies"},
      {"gridded", "section",
       "distance or latitude on x, depth on y increasing downward; filled contours with a "
       "labelled colour bar"},
      {"gridded", "vectors",
       "quiver or streamplot over a speed background; reference arrow with units"},
      {"profile", "vertical_profile",
       "variable on x, depth on y inverted; one line per station with a legend"},
      {"timeseries", "line",
       "time on x with date formatting; units on y; shaded spread when aggregated"},
      {"tabular", "scatter",
       "observed on x, modelled on y; 1:1 line; bias, RMSE and r in the corner"},
      {"tabular", "distribution",
       "box or violin plots per group; sample size per group in the tick labels"},
      {"tabular", "wind_rose",
       "16 compass sectors, stacked speed bins, frequency rings in percent"},
      {"trajectory", "map",
       "track line coloured by time or value on a projection; start and end markers"},
  });
  return catalog;
}

}  // namespace geoagent::qc
