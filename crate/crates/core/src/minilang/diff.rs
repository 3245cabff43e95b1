use similar::TextDiff;

use super::ast::Program;
use super::printer::pretty_print;

/// Unified diff of the canonical renderings of two programs.
///
/// Headers name `path` and `<path>.repaired`. Structurally equal programs
/// produce an empty string.
pub fn diff(before: &Program, after: &Program, path: &str) -> String {
    if before == after {
        return String::new();
    }
    let old = pretty_print(before);
    let new = pretty_print(after);
    TextDiff::from_lines(&old, &new)
        .unified_diff()
        .context_radius(3)
        .header(path, &format!("{path}.repaired"))
        .to_string()
}
