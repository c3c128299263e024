#pragma once

#include <map>
#include <string>
#include <string_view>

namespace meteo {

// Escapes & < > " ' for XML/HTML text and attribute values.
std::string xml_escape(std::string_view text);

// Replaces every `{{key}}` with its value. Unknown placeholders are left in
// place so template drift shows up in golden tests.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

} // namespace meteo
