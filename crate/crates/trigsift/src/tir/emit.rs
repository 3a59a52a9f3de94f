use std::fmt::Write;

use super::ast::Program;

/// Print a program in canonical form: two-space indent, one statement per
/// line, a blank line between classes. The output is deterministic and
/// parses back to an identical AST.
pub fn emit_program(p: &Program) -> String {
    let mut out = String::new();
    for (ci, class) in p.classes.iter().enumerate() {
        if ci > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "class {} {{", class.name);
        for (mi, method) in class.methods.iter().enumerate() {
            if mi > 0 {
                out.push('\n');
            }
            let entry = if method.is_entry { "entry " } else { "" };
            let _ = writeln!(out, "  {entry}{}({}) {{", method.name, method.params.join(", "));
            for stmt in &method.body {
                let _ = writeln!(out, "    {stmt}");
            }
            let _ = writeln!(out, "  }}");
        }
        let _ = writeln!(out, "}}");
    }
    out
}
