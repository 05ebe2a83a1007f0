#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "autolaw/jury.hpp"

namespace autolaw {

enum class TemplateName {
    // Verbatim prompt texts of the framework.
    direct_scenario,
    cot_detection,
    jury_ranking,
    jury_vote,
    // Texts authored for steps that have no published wording.
    misconduct_extraction,
    adversarial_refinement,
    violation_check,
};

std::string_view to_string(TemplateName name);
TemplateName template_name_from_string(std::string_view s);

/// A prompt body with {placeholder} slots; placeholder names are
/// [A-Za-z_][A-Za-z0-9_]*.
struct PromptTemplate {
    TemplateName name;
    std::string_view body;

    std::set<std::string> placeholders() const;
};

const PromptTemplate& prompt_template(TemplateName name);
std::vector<TemplateName> all_templates();

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Byte-exact substitution of every placeholder. Substituted text is not
/// rescanned. Throws MissingBinding for an unbound placeholder and
/// UnknownPlaceholder for a binding the template does not use.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

/// One-sentence system prefix that gives a juror its legal role.
std::string_view persona_prefix(Role role);

}  // namespace autolaw
