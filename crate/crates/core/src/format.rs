//! The `.qfst` text format.
//!
//! ```text
//! # comment
//! [machine]
//! name = f1
//! mode = quantum            # or stochastic
//! input_alphabet = a b c
//! output_alphabet = a b
//! states = s0 A1 A2 ...
//! initial = s0
//! accept = qacc
//! reject = R qrej
//!
//! [unitary ^]               # one transition matrix, split by the partition
//! complete = auto           # optional: Gram–Schmidt for unlisted columns
//! A1 <- s0 : 1/sqrt(3)
//!
//! [kraus $ outcome=accept elem=0]   # one element of an explicit operation
//! qacc <- B1 : 1/sqrt(2)
//!
//! [output]
//! A1 a -> a                 # `_` is the empty string
//! ```
//!
//! Entries are `target <- source`: matrices act on column vectors of state
//! amplitudes. In a `[unitary]` section a column with no listed entries is
//! the identity column unless `complete = auto` is given. Kraus entries are
//! taken verbatim and unlisted entries are zero. Stochastic machines use
//! `[kraus]` sections only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::amplitude::{AmplitudeError, AmplitudeExpr};
use crate::matrix::Matrix;
use crate::model::{MachineSpec, Mode, OperationElement, OperationSet, Outcome, RESERVED_SYMBOLS};
use crate::scalar::Scalar;
use crate::transition::{assemble, Completion, Entries};
use crate::validate::{is_partition_split, split_by_partition};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownState(String),
    UnknownSymbol(String),
    Duplicate(String),
    Missing(String),
    Amplitude(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownState(s) => write!(f, "unknown state `{s}`"),
            ParseErrorKind::UnknownSymbol(s) => write!(f, "unknown symbol `{s}`"),
            ParseErrorKind::Duplicate(m) => write!(f, "duplicate {m}"),
            ParseErrorKind::Missing(m) => write!(f, "missing {m}"),
            ParseErrorKind::Amplitude(m) => write!(f, "bad amplitude: {m}"),
        }
    }
}

/// Positions are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

type Result<T, E = ParseError> = std::result::Result<T, E>;

/// A whitespace-separated word and its 1-based column.
#[derive(Clone, Copy, Debug)]
struct Word<'a> {
    col: usize,
    text: &'a str,
}

fn words(s: &str, base_col: usize) -> Vec<Word<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (ci, (bi, c)) in s.char_indices().enumerate() {
        if c.is_whitespace() {
            if let Some((scol, sb)) = start.take() {
                out.push(Word {
                    col: base_col + scol,
                    text: &s[sb..bi],
                });
            }
        } else if start.is_none() {
            start = Some((ci, bi));
        }
    }
    if let Some((scol, sb)) = start {
        out.push(Word {
            col: base_col + scol,
            text: &s[sb..],
        });
    }
    out
}

/// Char column (1-based) of byte offset `byte` in `line`.
fn col_of(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

fn is_state_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_machine_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

struct Ctx {
    line: usize,
}

impl Ctx {
    fn err<T>(&self, column: usize, kind: ParseErrorKind) -> Result<T> {
        Err(ParseError {
            line: self.line,
            column,
            kind,
        })
    }

    fn syntax<T>(&self, column: usize, msg: impl Into<String>) -> Result<T> {
        self.err(column, ParseErrorKind::Syntax(msg.into()))
    }
}

#[derive(Default)]
struct MachineKeys<'a> {
    values: BTreeMap<&'a str, (usize, Vec<Word<'a>>)>,
    header_line: usize,
}

struct Header {
    mode: Mode,
    name: String,
    states: Vec<String>,
    initial: usize,
    input_alphabet: Vec<char>,
    output_alphabet: Vec<char>,
    accept: BTreeSet<usize>,
    reject: BTreeSet<usize>,
}

impl Header {
    fn state(&self, ctx: &Ctx, w: Word<'_>) -> Result<usize> {
        match self.states.iter().position(|s| s == w.text) {
            Some(i) => Ok(i),
            None => ctx.err(w.col, ParseErrorKind::UnknownState(w.text.to_string())),
        }
    }

    fn tape_symbol(&self, ctx: &Ctx, w: Word<'_>) -> Result<char> {
        let mut chars = w.text.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None)
                if c == crate::LEFT_MARKER
                    || c == crate::RIGHT_MARKER
                    || self.input_alphabet.contains(&c) =>
            {
                Ok(c)
            }
            _ => ctx.err(w.col, ParseErrorKind::UnknownSymbol(w.text.to_string())),
        }
    }
}

fn parse_symbols(ctx: &Ctx, list: &[Word<'_>]) -> Result<Vec<char>> {
    let mut out = Vec::new();
    for w in list {
        let mut chars = w.text.chars();
        let c = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => {
                return ctx.syntax(
                    w.col,
                    format!("`{}` is not a single-character symbol", w.text),
                )
            }
        };
        if RESERVED_SYMBOLS.contains(&c) {
            return ctx.syntax(w.col, format!("`{c}` is reserved"));
        }
        if out.contains(&c) {
            return ctx.err(w.col, ParseErrorKind::Duplicate(format!("symbol `{c}`")));
        }
        out.push(c);
    }
    Ok(out)
}

impl<'a> MachineKeys<'a> {
    fn finish(&self, lines: &[&str]) -> Result<Header> {
        let get = |key: &str| -> Result<(usize, &[Word<'a>])> {
            match self.values.get(key) {
                Some((line, ws)) => Ok((*line, ws.as_slice())),
                None => Err(ParseError {
                    line: self.header_line,
                    column: 1,
                    kind: ParseErrorKind::Missing(format!("`{key}` in [machine]")),
                }),
            }
        };
        let single = |key: &str| -> Result<(Ctx, Word<'a>)> {
            let (line, ws) = get(key)?;
            let ctx = Ctx { line };
            match ws {
                [w] => Ok((ctx, *w)),
                [] => {
                    let col = lines[line - 1].chars().count() + 1;
                    ctx.syntax(col, format!("`{key}` needs a value"))
                }
                [_, extra, ..] => ctx.syntax(extra.col, format!("`{key}` takes a single value")),
            }
        };

        let (ctx, name) = single("name")?;
        if !is_machine_name(name.text) {
            return ctx.syntax(name.col, format!("invalid machine name `{}`", name.text));
        }
        let (ctx, mode_w) = single("mode")?;
        let mode = match mode_w.text {
            "quantum" => Mode::Quantum,
            "stochastic" => Mode::Stochastic,
            other => return ctx.syntax(mode_w.col, format!("unknown mode `{other}`")),
        };
        let (line, state_words) = get("states")?;
        let ctx = Ctx { line };
        let mut states: Vec<String> = Vec::new();
        for w in state_words {
            if !is_state_name(w.text) {
                return ctx.syntax(w.col, format!("invalid state name `{}`", w.text));
            }
            if states.iter().any(|s| s == w.text) {
                return ctx.err(
                    w.col,
                    ParseErrorKind::Duplicate(format!("state `{}`", w.text)),
                );
            }
            states.push(w.text.to_string());
        }
        if states.is_empty() {
            return ctx.syntax(1, "a machine needs at least one state");
        }
        let (line, ws) = get("input_alphabet")?;
        let input_alphabet = parse_symbols(&Ctx { line }, ws)?;
        let (line, ws) = get("output_alphabet")?;
        let output_alphabet = parse_symbols(&Ctx { line }, ws)?;

        let mut header = Header {
            mode,
            name: name.text.to_string(),
            states,
            initial: 0,
            input_alphabet,
            output_alphabet,
            accept: BTreeSet::new(),
            reject: BTreeSet::new(),
        };
        let (ctx, initial) = single("initial")?;
        header.initial = header.state(&ctx, initial)?;
        for key in ["accept", "reject"] {
            if let Some((line, ws)) = self.values.get(key) {
                let ctx = Ctx { line: *line };
                let mut set = BTreeSet::new();
                for w in ws {
                    if !set.insert(header.state(&ctx, *w)?) {
                        return ctx.err(
                            w.col,
                            ParseErrorKind::Duplicate(format!("state `{}`", w.text)),
                        );
                    }
                }
                if key == "accept" {
                    header.accept = set;
                } else {
                    header.reject = set;
                }
            }
        }
        Ok(header)
    }
}

enum Section<T> {
    Machine,
    Unitary {
        symbol: char,
        header_line: usize,
        completion: Option<(usize, Completion)>,
        entries: Entries<T>,
    },
    Kraus {
        symbol: char,
        outcome: Outcome,
        elem: usize,
        entries: Entries<T>,
    },
    Output,
}

struct Builder<T> {
    header: Header,
    unitaries: BTreeMap<char, OperationSet<T>>,
    unitary_lines: BTreeMap<char, usize>,
    kraus: BTreeMap<char, BTreeMap<usize, OperationElement<T>>>,
    kraus_lines: BTreeMap<char, usize>,
    emissions: BTreeMap<(usize, char), String>,
}

impl<T: Scalar> Builder<T> {
    fn close(&mut self, section: Section<T>) -> Result<()> {
        let n = self.header.states.len();
        match section {
            Section::Unitary {
                symbol,
                header_line,
                completion,
                entries,
            } => {
                let mode = completion.map(|(_, c)| c).unwrap_or(Completion::Identity);
                let (u, exprs) = assemble(n, &entries, mode).map_err(|e| ParseError {
                    line: completion.map(|(l, _)| l).unwrap_or(header_line),
                    column: 1,
                    kind: ParseErrorKind::Amplitude(e.to_string()),
                })?;
                self.unitaries.insert(
                    symbol,
                    split_by_partition(&u, &exprs, &self.header.accept, &self.header.reject),
                );
            }
            Section::Kraus {
                symbol,
                outcome,
                elem,
                entries,
            } => {
                let mut matrix = Matrix::zeros(n);
                let mut exprs = BTreeMap::new();
                for ((t, s), (v, e)) in entries {
                    matrix[(t, s)] = v;
                    exprs.insert((t, s), e);
                }
                self.kraus.entry(symbol).or_default().insert(
                    elem,
                    OperationElement {
                        matrix,
                        outcome,
                        exprs,
                    },
                );
            }
            Section::Machine | Section::Output => {}
        }
        Ok(())
    }
}

/// Parses `.qfst` text. Numerical soundness (completeness, stochasticity) is
/// left to [`crate::validate_machine`].
pub fn parse_machine_text<T: Scalar>(text: &str) -> Result<MachineSpec<T>> {
    let lines: Vec<&str> = text.lines().collect();
    let eof_line = lines.len().max(1);

    let mut keys = MachineKeys::default();
    let mut seen_machine = false;
    let mut builder: Option<Builder<T>> = None;
    let mut section: Option<Section<T>> = None;
    let mut seen_output = false;

    for (idx, raw) in lines.iter().enumerate() {
        let ctx = Ctx { line: idx + 1 };
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = col_of(raw, content.len() - content.trim_start().len());

        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') || trimmed.len() < 2 {
                return ctx.syntax(lead, "section header must end with `]`");
            }
            let inner = &trimmed[1..trimmed.len() - 1];
            let ws = words(inner, lead + 1);
            let Some(kind) = ws.first() else {
                return ctx.syntax(lead, "empty section header");
            };

            // leaving the [machine] section freezes the header
            if let Some(prev) = section.take() {
                match (&mut builder, prev) {
                    (Some(b), prev) => b.close(prev)?,
                    (None, Section::Machine) => {
                        builder = Some(Builder {
                            header: keys.finish(&lines)?,
                            unitaries: BTreeMap::new(),
                            unitary_lines: BTreeMap::new(),
                            kraus: BTreeMap::new(),
                            kraus_lines: BTreeMap::new(),
                            emissions: BTreeMap::new(),
                        });
                    }
                    (None, _) => unreachable!("sections after [machine] always have a builder"),
                }
            }

            if kind.text == "machine" {
                if ws.len() > 1 {
                    return ctx.syntax(ws[1].col, "[machine] takes no arguments");
                }
                if seen_machine {
                    return ctx.err(
                        kind.col,
                        ParseErrorKind::Duplicate("[machine] section".into()),
                    );
                }
                seen_machine = true;
                keys.header_line = ctx.line;
                section = Some(Section::Machine);
                continue;
            }
            let Some(b) = builder.as_mut() else {
                return ctx.syntax(kind.col, "the first section must be [machine]");
            };
            section = Some(match kind.text {
                "unitary" => {
                    let [_, sym] = ws.as_slice() else {
                        return ctx.syntax(kind.col, "expected `[unitary <symbol>]`");
                    };
                    let symbol = b.header.tape_symbol(&ctx, *sym)?;
                    if b.header.mode == Mode::Stochastic {
                        return ctx.syntax(kind.col, "stochastic machines use [kraus] sections");
                    }
                    if b.unitary_lines.contains_key(&symbol) || b.kraus_lines.contains_key(&symbol)
                    {
                        return ctx.err(
                            sym.col,
                            ParseErrorKind::Duplicate(format!("operation for `{symbol}`")),
                        );
                    }
                    b.unitary_lines.insert(symbol, ctx.line);
                    Section::Unitary {
                        symbol,
                        header_line: ctx.line,
                        completion: None,
                        entries: Entries::new(),
                    }
                }
                "kraus" => {
                    let [_, sym, outcome_w, elem_w] = ws.as_slice() else {
                        return ctx
                            .syntax(kind.col, "expected `[kraus <symbol> outcome=<o> elem=<k>]`");
                    };
                    let symbol = b.header.tape_symbol(&ctx, *sym)?;
                    if b.unitary_lines.contains_key(&symbol) {
                        return ctx.err(
                            sym.col,
                            ParseErrorKind::Duplicate(format!("operation for `{symbol}`")),
                        );
                    }
                    let outcome = match outcome_w
                        .text
                        .strip_prefix("outcome=")
                        .and_then(Outcome::parse)
                    {
                        Some(o) => o,
                        None => {
                            return ctx
                                .syntax(outcome_w.col, "expected `outcome=accept|reject|continue`")
                        }
                    };
                    let elem: usize = match elem_w.text.strip_prefix("elem=").map(str::parse) {
                        Some(Ok(k)) => k,
                        _ => return ctx.syntax(elem_w.col, "expected `elem=<index>`"),
                    };
                    if b.kraus.get(&symbol).is_some_and(|m| m.contains_key(&elem)) {
                        return ctx.err(
                            elem_w.col,
                            ParseErrorKind::Duplicate(format!("element {elem} for `{symbol}`")),
                        );
                    }
                    b.kraus_lines.entry(symbol).or_insert(ctx.line);
                    Section::Kraus {
                        symbol,
                        outcome,
                        elem,
                        entries: Entries::new(),
                    }
                }
                "output" => {
                    if ws.len() > 1 {
                        return ctx.syntax(ws[1].col, "[output] takes no arguments");
                    }
                    if seen_output {
                        return ctx.err(
                            kind.col,
                            ParseErrorKind::Duplicate("[output] section".into()),
                        );
                    }
                    seen_output = true;
                    Section::Output
                }
                other => return ctx.syntax(kind.col, format!("unknown section `{other}`")),
            });
            // reserve the slot so a repeated header is caught before close
            if let Some(Section::Kraus { symbol, elem, .. }) = &section {
                b.kraus.entry(*symbol).or_default().insert(
                    *elem,
                    OperationElement::new(Matrix::zeros(b.header.states.len()), Outcome::Continue),
                );
            }
            continue;
        }

        match section.as_mut() {
            None => return ctx.syntax(lead, "content before the first section"),
            Some(Section::Machine) => {
                let Some(eq) = content.find('=') else {
                    return ctx.syntax(lead, "expected `key = value`");
                };
                let key_words = words(&content[..eq], 1);
                let [key] = key_words.as_slice() else {
                    return ctx.syntax(lead, "expected a single key before `=`");
                };
                const KEYS: [&str; 8] = [
                    "name",
                    "mode",
                    "input_alphabet",
                    "output_alphabet",
                    "states",
                    "initial",
                    "accept",
                    "reject",
                ];
                if !KEYS.contains(&key.text) {
                    return ctx.syntax(key.col, format!("unknown key `{}`", key.text));
                }
                if keys.values.contains_key(key.text) {
                    return ctx.err(
                        key.col,
                        ParseErrorKind::Duplicate(format!("key `{}`", key.text)),
                    );
                }
                let values = words(&content[eq + 1..], col_of(raw, eq + 1));
                keys.values.insert(key.text, (ctx.line, values));
            }
            Some(Section::Output) => {
                let b = builder.as_mut().expect("output follows machine");
                let ws = words(content, 1);
                let [state_w, sym_w, arrow, out_w] = ws.as_slice() else {
                    return ctx.syntax(lead, "expected `<state> <symbol> -> <string|_>`");
                };
                if arrow.text != "->" {
                    return ctx.syntax(arrow.col, "expected `->`");
                }
                let state = b.header.state(&ctx, *state_w)?;
                let symbol = b.header.tape_symbol(&ctx, *sym_w)?;
                let out = if out_w.text == "_" { "" } else { out_w.text };
                if let Some((k, c)) = out
                    .chars()
                    .enumerate()
                    .find(|(_, c)| !b.header.output_alphabet.contains(c))
                {
                    return ctx.err(out_w.col + k, ParseErrorKind::UnknownSymbol(c.to_string()));
                }
                if b.emissions
                    .insert((state, symbol), out.to_string())
                    .is_some()
                {
                    return ctx.err(
                        state_w.col,
                        ParseErrorKind::Duplicate(format!(
                            "output for ({}, `{symbol}`)",
                            state_w.text
                        )),
                    );
                }
            }
            Some(Section::Unitary {
                completion,
                entries,
                ..
            }) => {
                let b = builder.as_ref().expect("unitary follows machine");
                let ws = words(content, 1);
                if ws
                    .first()
                    .is_some_and(|w| w.text == "complete" || w.text.starts_with("complete="))
                {
                    let Some(eq) = content.find('=') else {
                        return ctx.syntax(lead, "expected `complete = auto`");
                    };
                    let vals = words(&content[eq + 1..], col_of(raw, eq + 1));
                    let key = words(&content[..eq], 1);
                    match (key.as_slice(), vals.as_slice()) {
                        ([k], [v]) if k.text == "complete" && v.text == "auto" => {}
                        ([k], [v, ..]) if k.text == "complete" => {
                            return ctx.syntax(v.col, "expected `complete = auto`")
                        }
                        _ => return ctx.syntax(lead, "expected `complete = auto`"),
                    }
                    if completion.is_some() {
                        return ctx
                            .err(lead, ParseErrorKind::Duplicate("`complete` option".into()));
                    }
                    *completion = Some((ctx.line, Completion::Auto));
                } else {
                    parse_entry(&ctx, raw, content, &b.header, entries)?;
                }
            }
            Some(Section::Kraus { entries, .. }) => {
                let b = builder.as_ref().expect("kraus follows machine");
                parse_entry(&ctx, raw, content, &b.header, entries)?;
            }
        }
    }

    let missing = |what: String| ParseError {
        line: eof_line,
        column: 1,
        kind: ParseErrorKind::Missing(what),
    };
    if let Some(prev) = section.take() {
        match (&mut builder, prev) {
            (Some(b), prev) => b.close(prev)?,
            (None, Section::Machine) => {
                builder = Some(Builder {
                    header: keys.finish(&lines)?,
                    unitaries: BTreeMap::new(),
                    unitary_lines: BTreeMap::new(),
                    kraus: BTreeMap::new(),
                    kraus_lines: BTreeMap::new(),
                    emissions: BTreeMap::new(),
                });
            }
            (None, _) => unreachable!(),
        }
    }
    let Some(b) = builder else {
        return Err(missing("[machine] section".into()));
    };

    let mut operations = b.unitaries;
    for (symbol, elements) in b.kraus {
        let count = elements.len();
        if let Some(gap) = (0..count).find(|k| !elements.contains_key(k)) {
            return Err(ParseError {
                line: b.kraus_lines[&symbol],
                column: 1,
                kind: ParseErrorKind::Missing(format!("kraus element {gap} for `{symbol}`")),
            });
        }
        operations.insert(symbol, OperationSet::new(elements.into_values().collect()));
    }
    let h = b.header;
    let tape = std::iter::once(crate::LEFT_MARKER)
        .chain(h.input_alphabet.iter().copied())
        .chain(std::iter::once(crate::RIGHT_MARKER));
    for symbol in tape {
        if !operations.contains_key(&symbol) {
            return Err(missing(format!("operation section for `{symbol}`")));
        }
    }
    Ok(MachineSpec {
        name: h.name,
        mode: h.mode,
        states: h.states,
        initial: h.initial,
        input_alphabet: h.input_alphabet,
        output_alphabet: h.output_alphabet,
        accept: h.accept,
        reject: h.reject,
        operations,
        emissions: b.emissions,
    })
}

fn parse_entry<T: Scalar>(
    ctx: &Ctx,
    raw: &str,
    content: &str,
    header: &Header,
    entries: &mut Entries<T>,
) -> Result<()> {
    let lead = col_of(raw, content.len() - content.trim_start().len());
    let Some(colon) = content.find(':') else {
        return ctx.syntax(lead, "expected `<target> <- <source> : <amplitude>`");
    };
    let lhs = words(&content[..colon], 1);
    let [target_w, arrow, source_w] = lhs.as_slice() else {
        return ctx.syntax(lead, "expected `<target> <- <source>` before `:`");
    };
    if arrow.text != "<-" {
        return ctx.syntax(arrow.col, "expected `<-`");
    }
    let target = header.state(ctx, *target_w)?;
    let source = header.state(ctx, *source_w)?;
    let expr_src = &content[colon + 1..];
    let expr_col = col_of(raw, colon + 1);
    let expr = AmplitudeExpr::parse(expr_src).map_err(|e| ParseError {
        line: ctx.line,
        column: expr_col + e.offset,
        kind: ParseErrorKind::Amplitude(e.message),
    })?;
    let value = expr.eval::<T>().map_err(|e| ParseError {
        line: ctx.line,
        column: expr_col,
        kind: ParseErrorKind::Amplitude(AmplitudeError::from(e).to_string()),
    })?;
    if entries.insert((target, source), (value, expr)).is_some() {
        return ctx.err(
            target_w.col,
            ParseErrorKind::Duplicate(format!("entry {} <- {}", target_w.text, source_w.text)),
        );
    }
    Ok(())
}

fn render_entries<T: Scalar>(
    out: &mut String,
    spec: &MachineSpec<T>,
    matrix: &Matrix<T>,
    exprs: &BTreeMap<(usize, usize), AmplitudeExpr>,
) {
    let n = spec.dim();
    for source in 0..n {
        for target in 0..n {
            let v = matrix[(target, source)];
            if v.re.is_zero() && v.im.is_zero() {
                continue;
            }
            let expr = exprs
                .get(&(target, source))
                .filter(|e| e.eval::<T>().is_ok_and(|x| x == v))
                .cloned()
                .unwrap_or_else(|| AmplitudeExpr::from_value(v));
            let _ = writeln!(
                out,
                "{} <- {} : {}",
                spec.states[target], spec.states[source], expr
            );
        }
    }
}

fn join<I: IntoIterator<Item = S>, S: fmt::Display>(items: I) -> String {
    items
        .into_iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn key_line(out: &mut String, key: &str, value: &str) {
    if value.is_empty() {
        let _ = writeln!(out, "{key} =");
    } else {
        let _ = writeln!(out, "{key} = {value}");
    }
}

/// Canonical text: fixed section order, entries sorted by (source, target),
/// amplitudes as their defining expressions where known.
pub fn serialize_machine<T: Scalar>(spec: &MachineSpec<T>) -> String {
    let n = spec.dim();
    let mut out = String::from("[machine]\n");
    key_line(&mut out, "name", &spec.name);
    key_line(&mut out, "mode", spec.mode.as_str());
    key_line(&mut out, "input_alphabet", &join(&spec.input_alphabet));
    key_line(&mut out, "output_alphabet", &join(&spec.output_alphabet));
    key_line(&mut out, "states", &join(&spec.states));
    key_line(&mut out, "initial", &spec.states[spec.initial]);
    key_line(
        &mut out,
        "accept",
        &join(spec.accept.iter().map(|&s| &spec.states[s])),
    );
    key_line(
        &mut out,
        "reject",
        &join(spec.reject.iter().map(|&s| &spec.states[s])),
    );

    for symbol in spec.tape_symbols() {
        let Some(set) = spec.operations.get(&symbol) else {
            continue;
        };
        if spec.mode == Mode::Quantum && is_partition_split(set, n, &spec.accept, &spec.reject) {
            let _ = writeln!(out, "\n[unitary {symbol}]");
            let exprs: BTreeMap<_, _> = set
                .elements
                .iter()
                .flat_map(|e| e.exprs.iter().map(|(k, v)| (*k, v.clone())))
                .collect();
            render_entries(&mut out, spec, &set.total(n), &exprs);
        } else {
            for (k, e) in set.elements.iter().enumerate() {
                let _ = writeln!(out, "\n[kraus {symbol} outcome={} elem={k}]", e.outcome);
                render_entries(&mut out, spec, &e.matrix, &e.exprs);
            }
        }
    }

    let order = spec.tape_symbols();
    let mut emissions: Vec<_> = spec
        .emissions
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .collect();
    emissions.sort_by_key(|((s, c), _)| (*s, order.iter().position(|x| x == c)));
    if !emissions.is_empty() {
        out.push_str("\n[output]\n");
        for ((s, c), v) in emissions {
            let _ = writeln!(out, "{} {c} -> {v}", spec.states[*s]);
        }
    }
    out
}
