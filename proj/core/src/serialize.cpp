#include "chemolab/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "chemolab/error.hpp"
#include "chemolab/numfmt.hpp"
#include "json.hpp"

namespace chemolab {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string timeseries_csv(const std::vector<SeriesPoint>& series) {
  std::string out = "t,sup_u,sup_w,mass_u,mass_w\n";
  for (const auto& p : series) {
    out += fmt_double(p.t) + ',' + fmt_double(p.sup_u) + ',' + fmt_double(p.sup_w) + ',' +
           fmt_double(p.mass_u) + ',' + fmt_double(p.mass_w) + '\n';
  }
  return out;
}

std::string solver_report_json(const SolverReport& r) {
  nlohmann::ordered_json j;
  j["verdict"] = std::string(to_string(r.verdict));
  j["t_end"] = r.t_end;
  j["step_count"] = r.step_count;
  j["sup_u0"] = r.sup_u0;
  j["sup_w0"] = r.sup_w0;
  j["max_sup_u"] = r.max_sup_u;
  j["max_sup_w"] = r.max_sup_w;
  j["sup_growth"] = r.sup_growth();
  j["mass_drift"] = r.mass_drift;
  j["records"] = r.series.size();
  j["diagnostic"] = r.diagnostic;
  return j.dump();
}

std::string envelope_json(std::string_view harness, std::string_view inputs_digest, bool pass,
                          std::string_view details_json) {
  nlohmann::ordered_json j;
  j["harness"] = std::string(harness);
  j["inputs_digest"] = std::string(inputs_digest);
  j["pass"] = pass;
  try {
    j["details"] = nlohmann::ordered_json::parse(details_json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InternalConsistency, std::string("details are not JSON: ") + e.what());
  }
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorKind::Io,
                  "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw Error(ErrorKind::Io, "read failed for " + path.string());
  return ss.str();
}

}  // namespace chemolab
