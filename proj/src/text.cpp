#include "meteo/text.hpp"

namespace meteo {

std::string xml_escape(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&#39;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values)
{
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out += tmpl.substr(pos);
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out += tmpl.substr(pos);
            break;
        }
        out += tmpl.substr(pos, open - pos);
        const std::string key(tmpl.substr(open + 2, close - open - 2));
        if (const auto it = values.find(key); it != values.end())
            out += it->second;
        else
            out += tmpl.substr(open, close + 2 - open);
        pos = close + 2;
    }
    return out;
}

} // namespace meteo
