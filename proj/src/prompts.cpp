#include "prompts.hpp"

#include "contextkg/error.hpp"
#include "prompt_templates.inc"  // generated: kTemplates[] = {{name, text}, ...}

namespace ckg::prompts {

std::string_view get(std::string_view name) {
  for (const auto& [n, text] : kTemplates) {
    if (n == name) return text;
  }
  throw Error("unknown prompt template '" + std::string(name) + "'");
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(pos, open - pos));
    const std::string key(tmpl.substr(open + 2, close - open - 2));
    if (const auto it = values.find(key); it != values.end()) {
      out += it->second;
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    pos = close + 2;
  }
  out.append(tmpl.substr(pos));
  return out;
}

}  // namespace ckg::prompts
