#include "isched/ripfile.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "isched/error.hpp"
#include "json.hpp"

namespace isched {

namespace {

using Json = nlohmann::ordered_json;

std::string at_field(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

const Json& require(const Json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing field '" + key + "'");
  return *it;
}

const Json& require_array(const Json& obj, const std::string& key) {
  const Json& v = require(obj, key);
  if (!v.is_array()) throw ParseError("field '" + key + "' must be an array");
  return v;
}

std::int64_t as_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where + ": expected a string");
  return v.get<std::string>();
}

Rational as_rational(const Json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_number_float()) return Rational::parse(v.dump());
    if (v.is_string()) return Rational::parse(v.get<std::string>());
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError(where + ": expected a number or a \"p/q\" string");
}

Json rational_json(const Rational& r) {
  if (r.is_integer()) return Json(r.num());
  return Json(r.to_string());
}

std::vector<Units> as_demands(const Json& v, std::size_t resources, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of demands");
  if (v.size() != resources) {
    throw ParseError(where + ": has " + std::to_string(v.size()) + " demands but Costs has " +
                     std::to_string(resources) + " entries");
  }
  std::vector<Units> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_int(v[k], at_field(where, k)));
  return out;
}

Precedence as_pair(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ParseError(where + ": expected a [pred, succ] pair");
  return {as_string(v[0], where), as_string(v[1], where)};
}

Json pair_json(const Precedence& p) { return Json::array({p.pred, p.succ}); }

Json task_fields(const Task& t) {
  Json o = Json::object();
  o["Earliest_start"] = t.earliest_start;
  o["Deadline"] = t.deadline;
  o["Duration"] = t.duration;
  o["Resources"] = t.demands;
  return o;
}

Task task_from_fields(const std::string& id, const Json& o, std::size_t resources, const std::string& where) {
  if (!o.is_object()) throw ParseError(where + ": expected an object");
  Task t;
  t.id = id;
  t.earliest_start = as_int(require(o, "Earliest_start"), where + ".Earliest_start");
  t.deadline = as_int(require(o, "Deadline"), where + ".Deadline");
  t.duration = as_int(require(o, "Duration"), where + ".Duration");
  t.demands = as_demands(require(o, "Resources"), resources, where + ".Resources");
  return t;
}

ReconfigDelta parse_delta(const Json& o, std::size_t resources) {
  if (!o.is_object()) throw ParseError("Modified_data: expected an object");
  ReconfigDelta d;
  if (auto it = o.find("Modified"); it != o.end()) {
    if (!it->is_object()) throw ParseError("Modified_data.Modified: expected an object");
    for (const auto& [id, fields] : it->items()) {
      d.modified[id] = task_from_fields(id, fields, resources, "Modified_data.Modified." + id);
    }
  }
  if (auto it = o.find("Added"); it != o.end()) {
    if (!it->is_array()) throw ParseError("Modified_data.Added: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = at_field("Modified_data.Added", i);
      std::string id = as_string(require((*it)[i], "Task"), where + ".Task");
      d.added.push_back(task_from_fields(id, (*it)[i], resources, where));
    }
  }
  if (auto it = o.find("Removed"); it != o.end()) {
    if (!it->is_array()) throw ParseError("Modified_data.Removed: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) d.removed.push_back(as_string((*it)[i], at_field("Modified_data.Removed", i)));
  }
  for (const char* key : {"Added_dependencies", "Removed_dependencies"}) {
    auto it = o.find(key);
    if (it == o.end()) continue;
    if (!it->is_array()) throw ParseError(std::string("Modified_data.") + key + ": expected an array");
    auto& target = std::string(key) == "Added_dependencies" ? d.added_precedence : d.removed_precedence;
    for (std::size_t i = 0; i < it->size(); ++i) {
      target.push_back(as_pair((*it)[i], at_field(std::string("Modified_data.") + key, i)));
    }
  }
  return d;
}

Json delta_json(const ReconfigDelta& d) {
  Json o = Json::object();
  Json modified = Json::object();
  for (const auto& [id, t] : d.modified) modified[id] = task_fields(t);
  o["Modified"] = modified;
  Json added = Json::array();
  for (const auto& t : d.added) {
    Json entry = Json::object();
    entry["Task"] = t.id;
    const Json fields = task_fields(t);
    for (const auto& [k, v] : fields.items()) entry[k] = v;
    added.push_back(entry);
  }
  o["Added"] = added;
  o["Removed"] = d.removed;
  Json ap = Json::array();
  for (const auto& p : d.added_precedence) ap.push_back(pair_json(p));
  o["Added_dependencies"] = ap;
  Json rp = Json::array();
  for (const auto& p : d.removed_precedence) rp.push_back(pair_json(p));
  o["Removed_dependencies"] = rp;
  return o;
}

}  // namespace

LoadedRip parse_instance(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("top level must be an object");

  const Json& names = require_array(root, "Tasks");
  const std::size_t n = names.size();
  auto parallel = [&](const std::string& key) -> const Json& {
    const Json& arr = require_array(root, key);
    if (arr.size() != n) {
      throw ParseError("field '" + key + "' has " + std::to_string(arr.size()) + " entries but Tasks has " +
                       std::to_string(n));
    }
    return arr;
  };
  const Json& es = parallel("Earliest_start");
  const Json& dl = parallel("Deadline");
  const Json& du = parallel("Duration");
  const Json& rs = parallel("Resources");
  const Json& costs = require_array(root, "Costs");

  std::vector<ResourceKind> resources;
  const Json* ids = nullptr;
  if (auto it = root.find("_resource_ids"); it != root.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != costs.size()) {
      throw ParseError("field '_resource_ids' must list one id per entry of Costs");
    }
    ids = &*it;
  }
  for (std::size_t k = 0; k < costs.size(); ++k) {
    ResourceKind r;
    r.id = ids ? as_string((*ids)[k], at_field("_resource_ids", k)) : "r" + std::to_string(k);
    r.unit_cost = as_rational(costs[k], at_field("Costs", k));
    resources.push_back(std::move(r));
  }

  std::vector<Task> tasks;
  std::set<std::string> known;
  for (std::size_t i = 0; i < n; ++i) {
    Task t;
    t.id = as_string(names[i], at_field("Tasks", i));
    t.earliest_start = as_int(es[i], at_field("Earliest_start", i));
    t.deadline = as_int(dl[i], at_field("Deadline", i));
    t.duration = as_int(du[i], at_field("Duration", i));
    t.demands = as_demands(rs[i], resources.size(), at_field("Resources", i));
    known.insert(t.id);
    tasks.push_back(std::move(t));
  }

  std::vector<Precedence> precedence;
  const Json& deps = require_array(root, "Dependencies");
  for (std::size_t i = 0; i < deps.size(); ++i) {
    Precedence p = as_pair(deps[i], at_field("Dependencies", i));
    for (const auto& id : {p.pred, p.succ}) {
      if (!known.count(id)) throw ParseError(at_field("Dependencies", i) + ": unknown task '" + id + "'");
    }
    precedence.push_back(std::move(p));
  }

  LoadedRip out;
  out.record.instance = Instance(tasks, std::move(resources), std::move(precedence));

  if (auto it = root.find("Task_start"); it != root.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != n) {
      throw ParseError("field 'Task_start' must be null or have one entry per task (Tasks has " +
                       std::to_string(n) + ")");
    }
    Schedule s;
    for (std::size_t i = 0; i < n; ++i) {
      if ((*it)[i].is_null()) continue;
      s.starts[tasks[i].id] = as_int((*it)[i], at_field("Task_start", i));
    }
    if (!s.starts.empty()) out.record.prior = std::move(s);
  }
  auto optional_rational = [&](const char* key) -> std::optional<Rational> {
    auto it = root.find(key);
    if (it == root.end() || it->is_null()) return std::nullopt;
    return as_rational(*it, key);
  };
  out.record.meta.best_cost = optional_rational("Best_cost");
  out.record.meta.bound = optional_rational("Bound");
  if (auto it = root.find("Time"); it != root.end() && !it->is_null()) {
    if (!it->is_number()) throw ParseError("Time: expected a number");
    out.record.meta.time = it->get<double>();
  }
  if (auto it = root.find("Modified_data"); it != root.end() && !it->is_null()) {
    out.record.delta = parse_delta(*it, out.record.instance.num_resources());
  }
  if (auto it = root.find("_producer"); it != root.end() && it->is_string()) {
    out.record.meta.producer = it->get<std::string>();
  }

  if (out.record.prior) {
    try {
      out.prior_check = check_schedule(out.record.instance, *out.record.prior);
    } catch (const ConstraintError& e) {
      FeasibilityReport r;
      r.feasible = false;
      r.diagnostics.push_back(e.what());
      for (const auto& d : e.details()) r.diagnostics.push_back("  " + d);
      out.prior_check = r;
    }
  }
  return out;
}

LoadedRip load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  LoadedRip out = parse_instance(buf.str());
  auto report = validate_instance(out.record.instance);
  if (!report.ok()) throw ConstraintError("invalid instance in " + path, report.messages());
  return out;
}

std::string serialize_instance(const RipRecord& record) {
  const Instance& inst = record.instance;
  Json root = Json::object();
  Json names = Json::array();
  Json es = Json::array();
  Json dl = Json::array();
  Json du = Json::array();
  Json rs = Json::array();
  for (const auto& t : inst.tasks()) {
    names.push_back(t.id);
    es.push_back(t.earliest_start);
    dl.push_back(t.deadline);
    du.push_back(t.duration);
    rs.push_back(t.demands);
  }
  root["Tasks"] = names;
  root["Earliest_start"] = es;
  root["Deadline"] = dl;
  root["Duration"] = du;
  Json deps = Json::array();
  for (const auto& p : inst.precedence()) deps.push_back(pair_json(p));
  root["Dependencies"] = deps;
  root["Resources"] = rs;
  Json costs = Json::array();
  Json ids = Json::array();
  for (const auto& r : inst.resources()) {
    costs.push_back(rational_json(r.unit_cost));
    ids.push_back(r.id);
  }
  root["Costs"] = costs;
  if (record.prior) {
    Json starts = Json::array();
    for (const auto& t : inst.tasks()) {
      auto it = record.prior->starts.find(t.id);
      starts.push_back(it == record.prior->starts.end() ? Json(nullptr) : Json(it->second));
    }
    root["Task_start"] = starts;
  } else {
    root["Task_start"] = nullptr;
  }
  root["Best_cost"] = record.meta.best_cost ? rational_json(*record.meta.best_cost) : Json(nullptr);
  root["Time"] = record.meta.time ? Json(*record.meta.time) : Json(nullptr);
  root["Bound"] = record.meta.bound ? rational_json(*record.meta.bound) : Json(nullptr);
  root["Modified_data"] = record.delta ? delta_json(*record.delta) : Json(nullptr);
  root["_resource_ids"] = ids;
  if (!record.meta.producer.empty()) root["_producer"] = record.meta.producer;
  return root.dump(2) + "\n";
}

void save_instance(const std::string& path, const RipRecord& record) {
  std::string text = serialize_instance(record);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

}  // namespace isched
