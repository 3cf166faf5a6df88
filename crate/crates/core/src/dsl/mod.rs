//! Text format for circuits: parsing, canonical formatting, and lowering to
//! an executable pipeline.
//!
//! ```text
//! source S1 arms=(1@0,2@1) alt=(1'@1,2'@0) alpha=0.785
//! aom AOM1 in=(2@1,3@0) out=(T1,T1') shift=1 t=0.707 convention=unitary
//! filter F path=T pass=0 sigma=1.0
//! check bandwidth pump=1.0
//! herald count(T1,T1')==1 and count(T2,T2')==1
//! report entropy split=(1,1')
//! ```

pub mod ast;
mod compile;
mod format;
mod parser;

pub use ast::CircuitAst;
pub use compile::{compile, CompileError, Pipeline, PipelineRun, Report, Step};
pub use format::{format, format_stmt};
pub use parser::{parse, ParseError};
