#include "solidsql/templates.hpp"

#include <stdexcept>

namespace solidsql {

namespace detail {
const std::map<std::string_view, std::string_view>& embedded_templates();
}

std::string_view template_text(std::string_view name) {
    const auto& table = detail::embedded_templates();
    const auto it = table.find(name);
    if (it == table.end()) throw std::out_of_range("unknown template " + std::string(name));
    return it->second;
}

std::vector<std::string> template_names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : detail::embedded_templates()) out.emplace_back(name);
    return out;
}

std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        const auto open = tpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        const auto close = tpl.find("}}", open + 2);
        if (close == std::string_view::npos) throw std::invalid_argument("unterminated placeholder in template");
        const std::string name(tpl.substr(open + 2, close - open - 2));
        const auto it = values.find(name);
        if (it == values.end()) throw std::invalid_argument("no value for template placeholder '" + name + "'");

        out.append(tpl.substr(pos, open - pos));
        const bool line_start = open == 0 || tpl[open - 1] == '\n';
        const bool line_end = close + 2 == tpl.size() || tpl[close + 2] == '\n';
        if (it->second.empty() && line_start && line_end) {
            pos = close + 2 < tpl.size() ? close + 3 : close + 2;
            continue;
        }
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

}  // namespace solidsql
