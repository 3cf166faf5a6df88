//! Line-oriented circuit parser.
//!
//! One statement per line, `#` starts a comment, arguments are `key=value`
//! and lists are parenthesised. Whitespace inside parentheses is allowed.
//! The parser never aborts: every problem becomes a [`ParseError`] and
//! parsing resumes on the next line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::*;
use crate::elements::Convention;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub message: String,
    pub token: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {} (at `{}`)", self.line, self.column, self.message, self.token)
    }
}

impl std::error::Error for ParseError {}

/// A slice of the current line with its byte offset.
#[derive(Debug, Clone, Copy)]
struct Span<'a> {
    text: &'a str,
    offset: usize,
}

impl<'a> Span<'a> {
    fn sub(&self, start: usize, end: usize) -> Span<'a> {
        Span { text: &self.text[start..end], offset: self.offset + start }
    }

    fn trimmed(&self) -> Span<'a> {
        let start = self.text.len() - self.text.trim_start().len();
        let end = self.text.trim_end().len();
        if start >= end {
            // keep a one-char anchor so errors still point somewhere
            return Span { text: &self.text[..0], offset: self.offset + start.min(self.text.len()) };
        }
        self.sub(start, end)
    }
}

struct LineCtx<'a> {
    line_no: usize,
    line: &'a str,
}

impl LineCtx<'_> {
    fn err(&self, span: Span<'_>, message: impl Into<String>) -> ParseError {
        let column = self.line[..span.offset.min(self.line.len())].chars().count() + 1;
        let token = if span.text.is_empty() {
            self.line[span.offset.min(self.line.len())..].chars().take(1).collect()
        } else {
            span.text.to_owned()
        };
        ParseError { line: self.line_no, column, message: message.into(), token }
    }
}

type PResult<T> = Result<T, ParseError>;

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '-' | '.')
}

fn tokenize<'a>(ctx: &LineCtx<'a>, body: &'a str) -> PResult<Vec<Span<'a>>> {
    let mut tokens = Vec::new();
    let mut depth = 0usize;
    let mut start: Option<usize> = None;
    let mut open_at = 0usize;
    for (i, ch) in body.char_indices() {
        match ch {
            '(' => {
                if depth == 0 {
                    open_at = i;
                }
                depth += 1;
                start.get_or_insert(i);
            }
            ')' => {
                if depth == 0 {
                    return Err(ctx.err(Span { text: ")", offset: i }, "unbalanced `)`"));
                }
                depth -= 1;
            }
            c if c.is_whitespace() && depth == 0 => {
                if let Some(s) = start.take() {
                    tokens.push(Span { text: &body[s..i], offset: s });
                }
            }
            _ => {
                start.get_or_insert(i);
            }
        }
    }
    if depth > 0 {
        return Err(ctx.err(Span { text: &body[open_at..], offset: open_at }, "unclosed `(`"));
    }
    if let Some(s) = start {
        tokens.push(Span { text: &body[s..], offset: s });
    }
    Ok(tokens)
}

fn ident(ctx: &LineCtx<'_>, span: Span<'_>, what: &str) -> PResult<String> {
    if span.text.is_empty() || !span.text.chars().all(is_ident_char) {
        return Err(ctx.err(span, format!("invalid {what} `{}`", span.text)));
    }
    Ok(span.text.to_owned())
}

fn int(ctx: &LineCtx<'_>, span: Span<'_>) -> PResult<i64> {
    span.text
        .parse::<i64>()
        .map_err(|_| ctx.err(span, format!("malformed integer `{}`", span.text)))
}

fn float(ctx: &LineCtx<'_>, span: Span<'_>) -> PResult<f64> {
    match span.text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ctx.err(span, format!("malformed number `{}`", span.text))),
    }
}

/// Splits `(a,b,...)` into trimmed item spans.
fn list_items<'a>(ctx: &LineCtx<'_>, span: Span<'a>) -> PResult<Vec<Span<'a>>> {
    let t = span.text;
    if !(t.starts_with('(') && t.ends_with(')') && t.len() >= 2) {
        return Err(ctx.err(span, "expected a parenthesised list"));
    }
    let inner = span.sub(1, t.len() - 1);
    if inner.text.trim().is_empty() {
        return Err(ctx.err(span, "empty list"));
    }
    let mut items = Vec::new();
    let mut last = 0;
    for (i, ch) in inner.text.char_indices() {
        if ch == ',' {
            items.push(inner.sub(last, i).trimmed());
            last = i + 1;
        }
    }
    items.push(inner.sub(last, inner.text.len()).trimmed());
    if let Some(empty) = items.iter().find(|s| s.text.is_empty()) {
        return Err(ctx.err(*empty, "empty list item"));
    }
    Ok(items)
}

fn mode_ref(ctx: &LineCtx<'_>, span: Span<'_>) -> PResult<ModeRef> {
    let Some(at) = span.text.find('@') else {
        return Err(ctx.err(span, format!("expected `path@bin`, got `{}`", span.text)));
    };
    let path = ident(ctx, span.sub(0, at), "path")?;
    let bin = int(ctx, span.sub(at + 1, span.text.len()))?;
    Ok(ModeRef { path, bin })
}

fn mode_list(ctx: &LineCtx<'_>, span: Span<'_>) -> PResult<Vec<(ModeRef, Span<'static>)>> {
    list_items(ctx, span)?
        .into_iter()
        .map(|s| Ok((mode_ref(ctx, s)?, Span { text: "", offset: s.offset })))
        .collect()
}

fn path_list(ctx: &LineCtx<'_>, span: Span<'_>) -> PResult<Vec<(String, Span<'static>)>> {
    list_items(ctx, span)?
        .into_iter()
        .map(|s| Ok((ident(ctx, s, "path")?, Span { text: "", offset: s.offset })))
        .collect()
}

/// `key=value` arguments of one statement.
struct Args<'a> {
    values: BTreeMap<&'a str, (Span<'a>, Span<'a>)>,
    anchor: Span<'a>,
}

impl<'a> Args<'a> {
    fn parse(ctx: &LineCtx<'_>, anchor: Span<'a>, toks: &[Span<'a>], allowed: &[&str]) -> PResult<Self> {
        let mut values = BTreeMap::new();
        for tok in toks {
            let Some(eq) = tok.text.find('=') else {
                return Err(ctx.err(*tok, format!("expected `key=value`, got `{}`", tok.text)));
            };
            let key = tok.sub(0, eq);
            let val = tok.sub(eq + 1, tok.text.len());
            if !allowed.contains(&key.text) {
                return Err(ctx.err(key, format!("unknown argument `{}`", key.text)));
            }
            if val.text.is_empty() {
                return Err(ctx.err(*tok, format!("missing value for `{}`", key.text)));
            }
            if values.insert(key.text, (key, val)).is_some() {
                return Err(ctx.err(key, format!("duplicate argument `{}`", key.text)));
            }
        }
        Ok(Args { values, anchor })
    }

    fn required(&self, ctx: &LineCtx<'_>, key: &str) -> PResult<Span<'a>> {
        self.values
            .get(key)
            .map(|(_, v)| *v)
            .ok_or_else(|| ctx.err(self.anchor, format!("missing argument `{key}`")))
    }

    fn optional(&self, key: &str) -> Option<Span<'a>> {
        self.values.get(key).map(|(_, v)| *v)
    }
}

/// Parser state carried across lines.
#[derive(Default)]
struct Scope {
    declared: BTreeSet<String>,
    herald_seen: bool,
    report_seen: bool,
}

impl Scope {
    fn require(&self, ctx: &LineCtx<'_>, path: &str, at: Span<'_>) -> PResult<()> {
        if self.declared.contains(path) {
            Ok(())
        } else {
            Err(ctx.err(at, format!("undeclared path `{path}`")))
        }
    }

    fn check_new(&self, ctx: &LineCtx<'_>, path: &str, at: Span<'_>, fresh: &BTreeSet<&str>) -> PResult<()> {
        if self.declared.contains(path) || fresh.contains(path) {
            Err(ctx.err(at, format!("duplicate path declaration `{path}`")))
        } else {
            Ok(())
        }
    }
}

fn item_span<'a>(ctx: &LineCtx<'a>, s: Span<'_>, len: usize) -> Span<'a> {
    let end = (s.offset + len).min(ctx.line.len());
    Span { text: &ctx.line[s.offset..end], offset: s.offset }
}

fn parse_source(ctx: &LineCtx<'_>, scope: &mut Scope, kw: Span<'_>, toks: &[Span<'_>]) -> PResult<StmtKind> {
    let name_tok = toks.first().ok_or_else(|| ctx.err(kw, "expected source name"))?;
    let name = ident(ctx, *name_tok, "name")?;
    let args = Args::parse(ctx, kw, &toks[1..], &["arms", "alt", "alpha"])?;
    let arms_span = args.required(ctx, "arms")?;
    let alt_span = args.required(ctx, "alt")?;
    let arms = mode_list(ctx, arms_span)?;
    if arms.len() != 2 {
        return Err(ctx.err(arms_span, "expected two arms"));
    }
    let alt = mode_list(ctx, alt_span)?;
    if alt.len() != 2 {
        return Err(ctx.err(alt_span, "expected two alternate arms"));
    }
    let alpha = args.optional("alpha").map(|s| float(ctx, s)).transpose()?;
    let mut fresh = BTreeSet::new();
    for (m, s) in arms.iter().chain(alt.iter()) {
        scope.check_new(ctx, &m.path, item_span(ctx, *s, m.path.len()), &fresh)?;
        fresh.insert(m.path.as_str());
    }
    let fresh: Vec<String> = fresh.into_iter().map(str::to_owned).collect();
    scope.declared.extend(fresh);
    let two = |v: Vec<(ModeRef, Span<'_>)>| -> [ModeRef; 2] {
        let mut it = v.into_iter().map(|(m, _)| m);
        [it.next().expect("two items"), it.next().expect("two items")]
    };
    Ok(StmtKind::Source(SourceStmt { name, arms: two(arms), alt: two(alt), alpha }))
}

fn parse_aom(ctx: &LineCtx<'_>, scope: &mut Scope, kw: Span<'_>, toks: &[Span<'_>]) -> PResult<StmtKind> {
    let name_tok = toks.first().ok_or_else(|| ctx.err(kw, "expected AOM name"))?;
    let name = ident(ctx, *name_tok, "name")?;
    let args = Args::parse(ctx, kw, &toks[1..], &["in", "out", "shift", "t", "convention"])?;
    let in_span = args.required(ctx, "in")?;
    let inputs = mode_list(ctx, in_span)?;
    if inputs.len() != 2 {
        return Err(ctx.err(in_span, "expected two inputs"));
    }
    let out_span = args.required(ctx, "out")?;
    let outputs = path_list(ctx, out_span)?;
    if outputs.len() != 2 {
        return Err(ctx.err(out_span, "expected two outputs"));
    }
    let shift = args.optional("shift").map(|s| int(ctx, s)).transpose()?;
    let t = args.optional("t").map(|s| float(ctx, s)).transpose()?;
    let convention = args
        .optional("convention")
        .map(|s| s.text.parse::<Convention>().map_err(|e| ctx.err(s, e)))
        .transpose()?;
    for (m, s) in &inputs {
        scope.require(ctx, &m.path, item_span(ctx, *s, m.path.len()))?;
    }
    let mut fresh = BTreeSet::new();
    for (p, s) in &outputs {
        scope.check_new(ctx, p, item_span(ctx, *s, p.len()), &fresh)?;
        fresh.insert(p.as_str());
    }
    let fresh: Vec<String> = fresh.into_iter().map(str::to_owned).collect();
    scope.declared.extend(fresh);
    let mut ins = inputs.into_iter().map(|(m, _)| m);
    let mut outs = outputs.into_iter().map(|(p, _)| p);
    Ok(StmtKind::Aom(AomStmt {
        name,
        inputs: [ins.next().expect("two"), ins.next().expect("two")],
        outputs: [outs.next().expect("two"), outs.next().expect("two")],
        shift,
        t,
        convention,
    }))
}

fn parse_filter(ctx: &LineCtx<'_>, scope: &mut Scope, kw: Span<'_>, toks: &[Span<'_>]) -> PResult<StmtKind> {
    let name_tok = toks.first().ok_or_else(|| ctx.err(kw, "expected filter name"))?;
    let name = ident(ctx, *name_tok, "name")?;
    let args = Args::parse(ctx, kw, &toks[1..], &["path", "pass", "sigma"])?;
    let path_span = args.required(ctx, "path")?;
    let path = ident(ctx, path_span, "path")?;
    scope.require(ctx, &path, path_span)?;
    let pass_bin = int(ctx, args.required(ctx, "pass")?)?;
    let sigma = args.optional("sigma").map(|s| float(ctx, s)).transpose()?;
    Ok(StmtKind::Filter(FilterStmt { name, path, pass_bin, sigma }))
}

/// `count(P,...)==INT [and count(...)==INT ...]`, scanned character-wise.
fn parse_herald(ctx: &LineCtx<'_>, scope: &Scope, kw: Span<'_>, rest: Span<'_>) -> PResult<StmtKind> {
    let text = rest.text;
    let mut pos = 0usize;
    let skip_ws = |pos: &mut usize| {
        while let Some(c) = text[*pos..].chars().next() {
            if c.is_whitespace() {
                *pos += c.len_utf8();
            } else {
                break;
            }
        }
    };
    let word_at = |pos: usize| -> Span<'_> {
        let end = text[pos..]
            .char_indices()
            .find(|(_, c)| c.is_whitespace())
            .map_or(text.len(), |(i, _)| pos + i);
        rest.sub(pos, end.max(pos))
    };
    let mut clauses = Vec::new();
    skip_ws(&mut pos);
    if pos >= text.len() {
        return Err(ctx.err(kw, "herald needs at least one `count(...)==N` clause"));
    }
    loop {
        skip_ws(&mut pos);
        if !text[pos..].starts_with("count") {
            return Err(ctx.err(word_at(pos), "expected `count(`"));
        }
        pos += "count".len();
        skip_ws(&mut pos);
        if !text[pos..].starts_with('(') {
            return Err(ctx.err(word_at(pos), "expected `(` after `count`"));
        }
        let Some(close_rel) = text[pos..].find(')') else {
            return Err(ctx.err(word_at(pos), "unclosed `(`"));
        };
        let list = rest.sub(pos, pos + close_rel + 1);
        let paths = path_list(ctx, list)?;
        for (p, s) in &paths {
            scope.require(ctx, p, item_span(ctx, *s, p.len()))?;
        }
        pos += close_rel + 1;
        skip_ws(&mut pos);
        if !text[pos..].starts_with("==") {
            return Err(ctx.err(word_at(pos), "expected `==`"));
        }
        pos += 2;
        skip_ws(&mut pos);
        let num_end = text[pos..]
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_digit() || *c == '-' || *c == '+'))
            .map_or(text.len(), |(i, _)| pos + i);
        let num_span = if num_end > pos { rest.sub(pos, num_end) } else { word_at(pos) };
        let count = num_span
            .text
            .parse::<u32>()
            .map_err(|_| ctx.err(num_span, format!("malformed count `{}`", num_span.text)))?;
        pos = num_end.max(pos);
        clauses.push(CountClause { paths: paths.into_iter().map(|(p, _)| p).collect(), count });
        skip_ws(&mut pos);
        if pos >= text.len() {
            break;
        }
        let w = word_at(pos);
        if w.text != "and" {
            return Err(ctx.err(w, "expected `and` between herald clauses"));
        }
        pos += 3;
    }
    Ok(StmtKind::Herald(HeraldStmt { clauses }))
}

fn parse_report(ctx: &LineCtx<'_>, scope: &Scope, kw: Span<'_>, toks: &[Span<'_>]) -> PResult<StmtKind> {
    let kind = toks.first().ok_or_else(|| ctx.err(kw, "expected report kind (entropy|ghz|outcomes)"))?;
    let declared_paths = |span: Span<'_>| -> PResult<Vec<String>> {
        let items = path_list(ctx, span)?;
        for (p, s) in &items {
            scope.require(ctx, p, item_span(ctx, *s, p.len()))?;
        }
        Ok(items.into_iter().map(|(p, _)| p).collect())
    };
    let declared_modes = |span: Span<'_>| -> PResult<Vec<ModeRef>> {
        let items = mode_list(ctx, span)?;
        for (m, s) in &items {
            scope.require(ctx, &m.path, item_span(ctx, *s, m.path.len()))?;
        }
        Ok(items.into_iter().map(|(m, _)| m).collect())
    };
    match kind.text {
        "entropy" => {
            let args = Args::parse(ctx, *kind, &toks[1..], &["split"])?;
            Ok(StmtKind::Report(ReportStmt::Entropy { split: declared_paths(args.required(ctx, "split")?)? }))
        }
        "ghz" => {
            let args = Args::parse(ctx, *kind, &toks[1..], &["a", "b"])?;
            let a = declared_modes(args.required(ctx, "a")?)?;
            let b = declared_modes(args.required(ctx, "b")?)?;
            Ok(StmtKind::Report(ReportStmt::Ghz { a, b }))
        }
        "outcomes" => {
            let args = Args::parse(ctx, *kind, &toks[1..], &["paths"])?;
            Ok(StmtKind::Report(ReportStmt::Outcomes { paths: declared_paths(args.required(ctx, "paths")?)? }))
        }
        other => Err(ctx.err(*kind, format!("unknown report `{other}` (expected entropy|ghz|outcomes)"))),
    }
}

fn parse_check(ctx: &LineCtx<'_>, kw: Span<'_>, toks: &[Span<'_>]) -> PResult<StmtKind> {
    let what = toks.first().ok_or_else(|| ctx.err(kw, "expected `bandwidth`"))?;
    if what.text != "bandwidth" {
        return Err(ctx.err(*what, format!("unknown check `{}`", what.text)));
    }
    let args = Args::parse(ctx, *what, &toks[1..], &["pump"])?;
    let pump = float(ctx, args.required(ctx, "pump")?)?;
    Ok(StmtKind::Check(CheckStmt { pump }))
}

fn parse_line(ctx: &LineCtx<'_>, scope: &mut Scope) -> PResult<Option<StmtKind>> {
    let body = match ctx.line.find('#') {
        Some(i) => &ctx.line[..i],
        None => ctx.line,
    };
    let toks = tokenize(ctx, body)?;
    let Some(kw) = toks.first().copied() else {
        return Ok(None);
    };
    let rest = &toks[1..];
    let is_element = matches!(kw.text, "source" | "aom" | "filter");
    if is_element && scope.herald_seen {
        return Err(ctx.err(kw, "elements must precede the herald statement"));
    }
    let stmt = match kw.text {
        "source" => parse_source(ctx, scope, kw, rest)?,
        "aom" => parse_aom(ctx, scope, kw, rest)?,
        "filter" => parse_filter(ctx, scope, kw, rest)?,
        "herald" => {
            if scope.herald_seen {
                return Err(ctx.err(kw, "at most one herald statement is allowed"));
            }
            if scope.report_seen {
                return Err(ctx.err(kw, "herald must precede report statements"));
            }
            let after_kw = kw.offset + kw.text.len();
            let rest_span = Span { text: &body[after_kw..], offset: after_kw };
            let h = parse_herald(ctx, scope, kw, rest_span)?;
            scope.herald_seen = true;
            h
        }
        "check" => parse_check(ctx, kw, rest)?,
        "report" => {
            let r = parse_report(ctx, scope, kw, rest)?;
            scope.report_seen = true;
            r
        }
        other => return Err(ctx.err(kw, format!("unknown statement `{other}`"))),
    };
    Ok(Some(stmt))
}

/// Parses a whole circuit file; accepts `\n` and `\r\n` line endings.
pub fn parse(text: &str) -> Result<CircuitAst, Vec<ParseError>> {
    let mut scope = Scope::default();
    let mut ast = CircuitAst::default();
    let mut errors = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let ctx = LineCtx { line_no: i + 1, line };
        match parse_line(&ctx, &mut scope) {
            Ok(Some(kind)) => ast.statements.push(Stmt { line: i + 1, kind }),
            Ok(None) => {}
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(ast)
    } else {
        Err(errors)
    }
}
