#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "locfaults/locfaults.hpp"

namespace locfaults {

using Json = nlohmann::ordered_json;

struct RunTimings {
  double preprocess_s = 0.0;
  double localize_s = 0.0;
};

inline Json ce_to_json(const Counterexample& ce) {
  Json j = Json::object();
  for (const auto& [k, v] : ce.scalars) j[k] = v;
  for (const auto& [k, v] : ce.arrays) j[k] = v;
  return j;
}

inline Counterexample ce_from_json(const Json& j) {
  Counterexample ce;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_array())
      ce.arrays[it.key()] = it.value().get<std::vector<long long>>();
    else
      ce.scalars[it.key()] = it.value().get<long long>();
  }
  return ce;
}

inline Json report_to_json(const LocalizationReport& r,
                           const std::optional<RunTimings>& timings = std::nullopt) {
  Json j;
  j["schema"] = "locfaults-report/1";
  j["program"] = r.program_name;
  j["counterexample"] = ce_to_json(r.ce);
  j["unroll"] = r.unroll_bound;
  j["flags"] = Json{{"unroll_insufficient", r.unroll_insufficient}};
  if (timings)
    j["timings"] = Json{{"preprocess_s", timings->preprocess_s},
                        {"localize_s", timings->localize_s}};
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json je;
    Json dev = Json::array();
    for (const auto& l : e.deviation) dev.push_back(l.str());
    je["deviation"] = dev;
    je["corrected"] = e.corrected;
    je["is_dcm"] = e.is_dcm;
    Json mcss = Json::array();
    for (const auto& m : e.mcss) {
      Json one = Json::array();
      for (const auto& l : m.locs()) one.push_back(l.str());
      mcss.push_back(one);
    }
    je["mcs"] = mcss;
    entries.push_back(je);
  }
  j["entries"] = entries;
  return j;
}

inline std::string render_text(const LocalizationReport& r,
                               const std::optional<RunTimings>& timings = std::nullopt) {
  std::string out;
  out += "program: " + r.program_name + "\n";
  out += "counterexample: " + ce_to_json(r.ce).dump() + "\n";
  out += "unroll: " + std::to_string(r.unroll_bound) + "\n";
  if (r.unroll_insufficient) out += "flags: unroll_insufficient\n";
  for (const auto& e : r.entries) {
    std::string devs;
    for (size_t i = 0; i < e.deviation.size(); ++i) {
      if (i) devs += ", ";
      devs += e.deviation[i].str();
    }
    out += "deviation: {" + devs + "}";
    if (e.is_dcm) out += "  [DCM]";
    else if (e.corrected) out += "  [corrects, not minimal]";
    out += "\n";
    if (e.mcss.empty()) {
      out += "  mcs: (none)\n";
    } else {
      for (const auto& m : e.mcss) {
        std::string locs;
        auto ls = m.locs();
        for (size_t i = 0; i < ls.size(); ++i) {
          if (i) locs += ", ";
          locs += ls[i].str();
        }
        out += "  mcs: {" + locs + "}\n";
      }
    }
  }
  if (timings) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "P: %.3fs  L: %.3fs\n", timings->preprocess_s,
                  timings->localize_s);
    out += buf;
  }
  return out;
}

inline std::string render_report(const LocalizationReport& r, const std::string& format,
                                 const std::optional<RunTimings>& timings = std::nullopt) {
  if (format == "json") return report_to_json(r, timings).dump(2) + "\n";
  return render_text(r, timings);
}

// Parses "i=0,j=1" / "tab=3,2,1,0"; a value token without '=' extends the
// previous binding into an array.
inline Counterexample ce_from_cli(const std::string& spec,
                                  const ValidatedProgram* vp = nullptr) {
  Counterexample ce;
  std::string last;
  size_t pos = 0;
  while (pos <= spec.size()) {
    size_t comma = spec.find(',', pos);
    std::string tok = spec.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos);
    pos = comma == std::string::npos ? spec.size() + 1 : comma + 1;
    while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
    while (!tok.empty() && tok.back() == ' ') tok.pop_back();
    if (tok.empty()) continue;
    size_t eq = tok.find('=');
    if (eq == std::string::npos) {
      if (last.empty()) throw Error("BadCounterexample", "stray value '" + tok + "'");
      ce.arrays[last].push_back(std::stoll(tok));
      continue;
    }
    last = tok.substr(0, eq);
    long long v = std::stoll(tok.substr(eq + 1));
    bool is_array = vp && vp->symbols.count(last) && vp->symbols.at(last).is_array;
    if (is_array) ce.arrays[last].push_back(v);
    else ce.scalars[last] = v;
  }
  // scalars that later grew array tails were arrays all along
  for (auto it = ce.scalars.begin(); it != ce.scalars.end();) {
    if (ce.arrays.count(it->first)) {
      auto& arr = ce.arrays[it->first];
      arr.insert(arr.begin(), it->second);
      it = ce.scalars.erase(it);
    } else {
      ++it;
    }
  }
  return ce;
}

}  // namespace locfaults
