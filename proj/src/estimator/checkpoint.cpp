#include <fstream>

#include <nlohmann/json.hpp>

#include "deskservo/estimator.hpp"

namespace deskservo::estimator {

using nlohmann::json;

void save_checkpoint(std::ostream& out, const Model& model) {
  const auto& s = model.shape();
  json j{{"format", "deskservo-checkpoint"},
         {"version", kCheckpointVersion},
         {"kind", to_string(model.kind())},
         {"shape",
          {{"crop_size", s.crop_size}, {"hidden", s.hidden}, {"pool", s.pool}, {"bins", s.bins}}},
         {"params", std::vector<double>(model.params().begin(), model.params().end())}};
  out << j.dump() << '\n';
}

Model load_checkpoint(std::istream& in) {
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != "deskservo-checkpoint")
      throw Error(ErrorCode::ModelLoadError, "not a checkpoint file");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw Error(ErrorCode::ModelLoadError, "unsupported checkpoint version");
    NetworkShape shape;
    const auto& js = j.at("shape");
    shape.crop_size = js.at("crop_size").get<int>();
    shape.hidden = js.at("hidden").get<int>();
    shape.pool = js.at("pool").get<int>();
    shape.bins = js.at("bins").get<int>();
    return Model(head_kind_from_string(j.at("kind").get<std::string>()), shape,
                 j.at("params").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ModelLoadError, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ModelLoadError) throw;
    throw Error(ErrorCode::ModelLoadError, e.what());
  }
}

void save_checkpoint(const std::string& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  save_checkpoint(out, model);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ModelLoadError, "cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace deskservo::estimator
