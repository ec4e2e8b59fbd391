#include "core/checkpoint.hpp"

#include <json.hpp>

namespace demandcast {

using ordered_json = nlohmann::ordered_json;

std::string Checkpoint::to_json() const {
  if (kind != "armdn" && kind != "cubist")
    fail(ErrorCode::internal, "checkpoint kind '" + kind + "' is not known");
  ordered_json j;
  j["type"] = "checkpoint";
  j["version"] = 1;
  j["kind"] = kind;
  j["seed"] = seed;
  j["schema"] = ordered_json::parse(schema.to_json());
  j["model"] = ordered_json::parse(kind == "armdn" ? armdn.to_json()
                                                   : cubist.to_json());
  return j.dump(1);
}

Checkpoint Checkpoint::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::parse, std::string("bad checkpoint JSON: ") + e.what());
  }
  try {
    if (j.at("type").get<std::string>() != "checkpoint")
      fail(ErrorCode::schema_mismatch, "not a checkpoint file");
    if (j.at("version").get<int>() != 1)
      fail(ErrorCode::schema_mismatch, "unsupported checkpoint version");
    Checkpoint c;
    c.kind = j.at("kind").get<std::string>();
    c.seed = j.at("seed").get<uint64_t>();
    c.schema = FeatureSchema::from_json(j.at("schema").dump());
    if (c.kind == "armdn")
      c.armdn = ArmdnModel::from_json(j.at("model").dump());
    else if (c.kind == "cubist")
      c.cubist = CubistModel::from_json(j.at("model").dump());
    else
      fail(ErrorCode::schema_mismatch,
           "checkpoint kind '" + c.kind + "' is not known");
    return c;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::parse,
         std::string("malformed checkpoint JSON: ") + e.what());
  }
}

Checkpoint make_armdn_checkpoint(ArmdnModel model, FeatureSchema schema,
                                 uint64_t seed) {
  Checkpoint c;
  c.kind = "armdn";
  c.seed = seed;
  c.schema = std::move(schema);
  c.armdn = std::move(model);
  return c;
}

Checkpoint make_cubist_checkpoint(CubistModel model, FeatureSchema schema,
                                  uint64_t seed) {
  Checkpoint c;
  c.kind = "cubist";
  c.seed = seed;
  c.schema = std::move(schema);
  c.cubist = std::move(model);
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  write_text_file(path, c.to_json());
}

Checkpoint load_checkpoint(const std::string& path) {
  return Checkpoint::from_json(read_text_file(path));
}

}  // namespace demandcast
