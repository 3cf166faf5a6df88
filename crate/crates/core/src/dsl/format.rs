use std::fmt::Write;

use super::ast::*;

fn modes(ms: &[ModeRef]) -> String {
    let items: Vec<String> = ms.iter().map(|m| format!("{}@{}", m.path, m.bin)).collect();
    format!("({})", items.join(","))
}

fn paths(ps: &[String]) -> String {
    format!("({})", ps.join(","))
}

/// Canonical text of one statement. Floats use Rust's shortest round-trip
/// representation, so reparsing yields identical values.
pub fn format_stmt(kind: &StmtKind) -> String {
    let mut s = String::new();
    match kind {
        StmtKind::Source(src) => {
            write!(s, "source {} arms={} alt={}", src.name, modes(&src.arms), modes(&src.alt)).unwrap();
            if let Some(a) = src.alpha {
                write!(s, " alpha={a:?}").unwrap();
            }
        }
        StmtKind::Aom(a) => {
            write!(s, "aom {} in={} out={}", a.name, modes(&a.inputs), paths(&a.outputs)).unwrap();
            if let Some(v) = a.shift {
                write!(s, " shift={v}").unwrap();
            }
            if let Some(v) = a.t {
                write!(s, " t={v:?}").unwrap();
            }
            if let Some(c) = a.convention {
                write!(s, " convention={c}").unwrap();
            }
        }
        StmtKind::Filter(f) => {
            write!(s, "filter {} path={} pass={}", f.name, f.path, f.pass_bin).unwrap();
            if let Some(v) = f.sigma {
                write!(s, " sigma={v:?}").unwrap();
            }
        }
        StmtKind::Herald(h) => {
            let clauses: Vec<String> =
                h.clauses.iter().map(|c| format!("count({})=={}", c.paths.join(","), c.count)).collect();
            write!(s, "herald {}", clauses.join(" and ")).unwrap();
        }
        StmtKind::Check(c) => write!(s, "check bandwidth pump={:?}", c.pump).unwrap(),
        StmtKind::Report(ReportStmt::Entropy { split }) => write!(s, "report entropy split={}", paths(split)).unwrap(),
        StmtKind::Report(ReportStmt::Ghz { a, b }) => {
            write!(s, "report ghz a={} b={}", modes(a), modes(b)).unwrap()
        }
        StmtKind::Report(ReportStmt::Outcomes { paths: ps }) => {
            write!(s, "report outcomes paths={}", paths(ps)).unwrap()
        }
    }
    s
}

/// One statement per line, comments and blank lines dropped.
pub fn format(ast: &CircuitAst) -> String {
    let mut out = String::new();
    for st in &ast.statements {
        out.push_str(&format_stmt(&st.kind));
        out.push('\n');
    }
    out
}
