#include "defcal/serialize.hpp"

#include <openssl/evp.h>

#include <iomanip>
#include <sstream>

namespace defcal {

using nlohmann::json;

json to_json(const Value& w) {
  if (w.is_int()) return w.as_int();
  if (w.is_bool()) return w.as_bool();
  return json{{"fut", w.as_fut()}};
}

json to_json(const Store& s) {
  json out = json::object();
  for (const auto& [name, value] : s) out[name] = to_json(value);
  return out;
}

json to_json(const Frame& f) {
  return json{{"fn", f.fn},
              {"locals", to_json(f.locals)},
              {"stmt", to_string(f.stmt)}};
}

json to_json(const Configuration& cn) {
  json futures = json::array();
  for (const auto& [f, state] : cn.futures) {
    json entry{{"id", f}};
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, Unresolved>) {
            entry["state"] = "unresolved";
            json frames = json::array();
            // bottom first; the last frame is the running one
            for (const auto& frame : st.frames)
              frames.push_back(to_json(frame));
            entry["frames"] = std::move(frames);
          } else if constexpr (std::is_same_v<T, Resolved>) {
            entry["state"] = "resolved";
            entry["value"] = to_json(st.value);
          } else {
            entry["state"] = "chained";
            entry["target"] = st.target;
          }
        },
        state);
    futures.push_back(std::move(entry));
  }
  return json{{"dialect", cn.dialect == Dialect::DefPlusF ? "def+f" : "def"},
              {"globals", to_json(cn.globals)},
              {"futures", std::move(futures)},
              {"next_id", cn.next_id}};
}

std::string canonical_serialization(const Configuration& cn) {
  return to_json(cn).dump();
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i)
    out << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(md[i]);
  return out.str();
}

}  // namespace defcal
