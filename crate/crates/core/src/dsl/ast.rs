use serde::Serialize;

use crate::elements::Convention;

/// `path@bin` reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRef {
    pub path: String,
    pub bin: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceStmt {
    pub name: String,
    pub arms: [ModeRef; 2],
    pub alt: [ModeRef; 2],
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AomStmt {
    pub name: String,
    pub inputs: [ModeRef; 2],
    pub outputs: [String; 2],
    pub shift: Option<i64>,
    pub t: Option<f64>,
    pub convention: Option<Convention>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterStmt {
    pub name: String,
    pub path: String,
    pub pass_bin: i64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountClause {
    pub paths: Vec<String>,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeraldStmt {
    pub clauses: Vec<CountClause>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckStmt {
    pub pump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportStmt {
    Entropy { split: Vec<String> },
    Ghz { a: Vec<ModeRef>, b: Vec<ModeRef> },
    Outcomes { paths: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "stmt", rename_all = "snake_case")]
pub enum StmtKind {
    Source(SourceStmt),
    Aom(AomStmt),
    Filter(FilterStmt),
    Herald(HeraldStmt),
    Check(CheckStmt),
    Report(ReportStmt),
}

/// A statement with the 1-based source line it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stmt {
    pub line: usize,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CircuitAst {
    pub statements: Vec<Stmt>,
}

impl CircuitAst {
    /// Statements without line provenance, for structural comparison.
    pub fn kinds(&self) -> Vec<&StmtKind> {
        self.statements.iter().map(|s| &s.kind).collect()
    }

    pub fn structurally_eq(&self, other: &CircuitAst) -> bool {
        self.kinds() == other.kinds()
    }
}
