//! CPLEX LP format: `Minimize` / `Subject To` / `Bounds` / `Binaries` / `End`.
//!
//! Names are escaped so that any column or row name survives a round trip:
//! ASCII letters are kept, digits, `_` and `.` are kept except in the first
//! position, and every other byte is written as `~HH` (uppercase hex). A name
//! spelling an LP keyword has its first letter escaped as well.
//! Numbers use the shortest representation that parses back to the same
//! `f64`, so a written problem re-reads bit-identically.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::MilpError;
use crate::problem::{MilpProblem, Sense, VarId, VarKind};

const TERMS_PER_LINE: usize = 8;

/// Words that would be read as section headers or bound keywords.
const RESERVED: &[&str] = &[
    "minimize", "minimise", "min", "maximize", "maximise", "max", "subject", "such", "st", "s.t.",
    "bounds", "bound", "binaries", "binary", "bin", "generals", "general", "gen", "end", "free",
    "inf", "infinity",
];

pub fn escape_name(name: &str) -> String {
    let reserved = RESERVED.iter().any(|r| name.eq_ignore_ascii_case(r));
    let mut out = String::with_capacity(name.len());
    for (i, b) in name.bytes().enumerate() {
        let keep = (b.is_ascii_alphabetic() && !(i == 0 && reserved))
            || (i > 0 && (b.is_ascii_digit() || b == b'_' || b == b'.'));
        if keep {
            out.push(b as char);
        } else {
            let _ = write!(out, "~{b:02X}");
        }
    }
    out
}

pub fn unescape_name(name: &str) -> Result<String, String> {
    let bytes = name.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'~' {
            let hex = name
                .get(i + 1..i + 3)
                .ok_or_else(|| format!("truncated escape in `{name}`"))?;
            let b = u8::from_str_radix(hex, 16).map_err(|_| format!("bad escape in `{name}`"))?;
            out.push(b);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| format!("escape in `{name}` is not UTF-8"))
}

pub fn format_number(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "+inf".into() } else { "-inf".into() };
    }
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn write_linear(out: &mut String, terms: &[(VarId, f64)], problem: &MilpProblem) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (k, &(v, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        if k == 0 && sign == '+' {
            out.push(' ');
        } else {
            let _ = write!(out, " {sign} ");
        }
        let mag = a.abs();
        if mag != 1.0 {
            let _ = write!(out, "{} ", format_number(mag));
        }
        out.push_str(&escape_name(&problem.variable(v).name));
    }
}

pub fn to_lp_string(problem: &MilpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", problem.tag);
    out.push_str("Minimize\n obj:");
    let objective: Vec<(VarId, f64)> = problem
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.cost != 0.0)
        .map(|(i, v)| (VarId(i), v.cost))
        .collect();
    write_linear(&mut out, &objective, problem);
    out.push_str("\nSubject To\n");
    for row in problem.constraints() {
        let _ = write!(out, " {}:", escape_name(&row.name));
        write_linear(&mut out, &row.terms, problem);
        let _ = writeln!(out, " {} {}", row.sense, format_number(row.rhs));
    }
    out.push_str("Bounds\n");
    for v in problem.variables() {
        if v.kind == VarKind::Binary {
            continue;
        }
        let name = escape_name(&v.name);
        let (l, u) = (v.lower, v.upper);
        if l == 0.0 && u == f64::INFINITY {
            continue;
        }
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else if l == u {
            let _ = writeln!(out, " {name} = {}", format_number(l));
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", format_number(l), format_number(u));
        }
    }
    let binaries: Vec<String> = problem
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| escape_name(&v.name))
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for b in binaries {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    out
}

pub fn write_lp(problem: &MilpProblem, path: &Path) -> Result<(), MilpError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(to_lp_string(problem).as_bytes())?;
    f.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Colon,
    Rel(Sense),
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, MilpError> {
    let err = |message: String| MilpError::Parse {
        line: lineno,
        message,
    };
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '\\' => break,
            '+' | '-' => {
                // `+inf` / `-inf` / `-infinity`
                let rest: String = chars[i + 1..].iter().collect();
                let lower = rest.to_ascii_lowercase();
                if lower.starts_with("inf") {
                    let len = if lower.starts_with("infinity") { 8 } else { 3 };
                    toks.push(Tok::Num(if c == '+' {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    }));
                    i += 1 + len;
                } else {
                    toks.push(if c == '+' { Tok::Plus } else { Tok::Minus });
                    i += 1;
                }
            }
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut j = i + 1;
                if j < chars.len() && chars[j] == '=' {
                    j += 1;
                }
                let sense = match c {
                    '<' => Sense::Le,
                    '>' => Sense::Ge,
                    _ => {
                        if j < chars.len() && (chars[j] == '<' || chars[j] == '>') {
                            let s = if chars[j] == '<' { Sense::Le } else { Sense::Ge };
                            j += 1;
                            s
                        } else {
                            Sense::Eq
                        }
                    }
                };
                toks.push(Tok::Rel(sense));
                i = j;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || ((chars[i] == 'e' || chars[i] == 'E')
                            && i + 1 < chars.len()
                            && (chars[i + 1].is_ascii_digit()
                                || chars[i + 1] == '-'
                                || chars[i + 1] == '+'))
                        || ((chars[i] == '-' || chars[i] == '+')
                            && i > start
                            && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")))?;
                toks.push(Tok::Num(v));
            }
            _ => {
                let start = i;
                while i < chars.len() && !" \t\r:+-<>=".contains(chars[i]) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
                    toks.push(Tok::Num(f64::INFINITY));
                } else {
                    toks.push(Tok::Name(s));
                }
            }
        }
    }
    Ok(toks)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section_header(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    match l.as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "end" => Some(Section::End),
        _ => None,
    }
}

struct Parsed {
    objective: Vec<(String, f64)>,
    rows: Vec<(String, Vec<(String, f64)>, Sense, f64)>,
    bounds: Vec<(String, f64, f64)>,
    binaries: Vec<String>,
    order: Vec<String>,
    seen: std::collections::HashSet<String>,
}

impl Parsed {
    fn note(&mut self, name: &str) {
        if self.seen.insert(name.to_string()) {
            self.order.push(name.to_string());
        }
    }
}

/// Parses `[label:] linear [rel rhs]` token lists.
fn parse_linear(toks: &[Tok], lineno: usize) -> Result<(Vec<(String, f64)>, usize), MilpError> {
    let mut terms = Vec::new();
    let mut i = 0;
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while i < toks.len() {
        match &toks[i] {
            Tok::Plus => {}
            Tok::Minus => sign = -sign,
            Tok::Num(v) => coef = Some(coef.unwrap_or(1.0) * v),
            Tok::Name(n) => {
                terms.push((n.clone(), sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
            Tok::Rel(_) => break,
            Tok::Colon => {
                return Err(MilpError::Parse {
                    line: lineno,
                    message: "unexpected `:`".into(),
                })
            }
        }
        i += 1;
    }
    if let Some(c) = coef {
        if c != 0.0 {
            return Err(MilpError::Parse {
                line: lineno,
                message: "constant terms are not supported".into(),
            });
        }
    }
    Ok((terms, i))
}

/// Splits a section into logical statements: a new statement starts at a
/// line carrying a `label:` prefix, otherwise lines continue the previous one.
fn statements(lines: &[(usize, Vec<Tok>)]) -> Vec<(usize, Vec<Tok>)> {
    let mut out: Vec<(usize, Vec<Tok>)> = Vec::new();
    for (no, toks) in lines {
        let labelled = toks.len() >= 2 && matches!(toks[1], Tok::Colon);
        let previous_open = out
            .last()
            .is_some_and(|(_, t)| !t.iter().any(|x| matches!(x, Tok::Rel(_))) || t.last().is_some_and(|x| matches!(x, Tok::Rel(_))));
        if labelled || out.is_empty() || !previous_open {
            out.push((*no, toks.clone()));
        } else {
            out.last_mut().unwrap().1.extend(toks.iter().cloned());
        }
    }
    out
}

pub fn parse_lp(text: &str) -> Result<MilpProblem, MilpError> {
    let mut section = Section::None;
    let mut tag = String::from("lp");
    let mut buckets: Vec<(Section, usize, Vec<Tok>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(rest) = raw.trim_start().strip_prefix("\\ Problem:") {
            tag = rest.trim().to_string();
            continue;
        }
        if let Some(s) = section_header(raw) {
            section = s;
            continue;
        }
        if section == Section::End {
            break;
        }
        let toks = tokenize(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        buckets.push((section, lineno, toks));
    }
    let gather = |s: Section| -> Vec<(usize, Vec<Tok>)> {
        buckets
            .iter()
            .filter(|(sec, _, _)| *sec == s)
            .map(|(_, n, t)| (*n, t.clone()))
            .collect()
    };

    let mut parsed = Parsed {
        objective: Vec::new(),
        rows: Vec::new(),
        bounds: Vec::new(),
        binaries: Vec::new(),
        order: Vec::new(),
        seen: Default::default(),
    };

    let obj_lines = gather(Section::Objective);
    let mut obj_toks: Vec<Tok> = obj_lines.iter().flat_map(|(_, t)| t.clone()).collect();
    if obj_toks.len() >= 2 && matches!(obj_toks[1], Tok::Colon) {
        obj_toks.drain(..2);
    }
    let (obj, _) = parse_linear(&obj_toks, obj_lines.first().map_or(0, |l| l.0))?;
    for (n, _) in &obj {
        parsed.note(n);
    }
    parsed.objective = obj;

    let mut anon = 0usize;
    for (no, toks) in statements(&gather(Section::Constraints)) {
        let (name, body) = if toks.len() >= 2 && matches!(toks[1], Tok::Colon) {
            match &toks[0] {
                Tok::Name(n) => (n.clone(), &toks[2..]),
                _ => {
                    return Err(MilpError::Parse {
                        line: no,
                        message: "bad row label".into(),
                    })
                }
            }
        } else {
            anon += 1;
            (format!("R{anon}"), &toks[..])
        };
        let (terms, at) = parse_linear(body, no)?;
        let (sense, rhs) = match (body.get(at), body.get(at + 1), body.get(at + 2)) {
            (Some(Tok::Rel(s)), Some(Tok::Num(v)), None) => (*s, *v),
            (Some(Tok::Rel(s)), Some(Tok::Minus), Some(Tok::Num(v))) => (*s, -*v),
            (Some(Tok::Rel(s)), Some(Tok::Plus), Some(Tok::Num(v))) => (*s, *v),
            _ => {
                return Err(MilpError::Parse {
                    line: no,
                    message: format!("row `{name}` lacks `<rel> <rhs>`"),
                })
            }
        };
        for (n, _) in &terms {
            parsed.note(n);
        }
        parsed.rows.push((name, terms, sense, rhs));
    }

    for (no, toks) in gather(Section::Bounds) {
        let bad = || MilpError::Parse {
            line: no,
            message: "unrecognised bound".into(),
        };
        let num = |t: &[Tok]| -> Option<(f64, usize)> {
            match t {
                [Tok::Num(v), ..] => Some((*v, 1)),
                [Tok::Minus, Tok::Num(v), ..] => Some((-*v, 2)),
                [Tok::Plus, Tok::Num(v), ..] => Some((*v, 2)),
                _ => None,
            }
        };
        match toks.as_slice() {
            [Tok::Name(n), Tok::Name(kw)] if kw.eq_ignore_ascii_case("free") => {
                parsed.note(n);
                parsed.bounds.push((n.clone(), f64::NEG_INFINITY, f64::INFINITY));
            }
            [Tok::Name(n), Tok::Rel(s), rest @ ..] => {
                let (v, _) = num(rest).ok_or_else(bad)?;
                parsed.note(n);
                let (l, u) = match s {
                    Sense::Eq => (v, v),
                    Sense::Le => (f64::NAN, v),
                    Sense::Ge => (v, f64::NAN),
                };
                parsed.bounds.push((n.clone(), l, u));
            }
            _ => {
                let (l, used) = num(&toks).ok_or_else(bad)?;
                match &toks[used..] {
                    [Tok::Rel(Sense::Le), Tok::Name(n), Tok::Rel(Sense::Le), rest @ ..] => {
                        let (u, _) = num(rest).ok_or_else(bad)?;
                        parsed.note(n);
                        parsed.bounds.push((n.clone(), l, u));
                    }
                    [Tok::Rel(Sense::Le), Tok::Name(n)] => {
                        parsed.note(n);
                        parsed.bounds.push((n.clone(), l, f64::NAN));
                    }
                    _ => return Err(bad()),
                }
            }
        }
    }

    for (_, toks) in gather(Section::Binaries) {
        for t in toks {
            if let Tok::Name(n) = t {
                parsed.note(&n);
                parsed.binaries.push(n);
            }
        }
    }
    if let Some((no, _)) = gather(Section::Generals).first() {
        return Err(MilpError::Parse {
            line: *no,
            message: "general integers are not supported".into(),
        });
    }

    build(parsed, tag)
}

fn build(parsed: Parsed, tag: String) -> Result<MilpProblem, MilpError> {
    use std::collections::{HashMap, HashSet};
    let decode = |n: &str| unescape_name(n).map_err(|message| MilpError::Parse { line: 0, message });
    let binaries: HashSet<&str> = parsed.binaries.iter().map(String::as_str).collect();
    let mut bounds: HashMap<&str, (f64, f64)> = HashMap::new();
    for (n, l, u) in &parsed.bounds {
        let b = bounds.entry(n.as_str()).or_insert((f64::NAN, f64::NAN));
        if !l.is_nan() {
            b.0 = *l;
        }
        if !u.is_nan() {
            b.1 = *u;
        }
    }
    let mut costs: HashMap<&str, f64> = HashMap::new();
    for (n, c) in &parsed.objective {
        *costs.entry(n.as_str()).or_insert(0.0) += c;
    }
    let mut problem = MilpProblem::new(tag);
    let mut ids = HashMap::new();
    for name in &parsed.order {
        let binary = binaries.contains(name.as_str());
        let (mut lo, mut hi) = if binary { (0.0, 1.0) } else { (0.0, f64::INFINITY) };
        if let Some(&(l, u)) = bounds.get(name.as_str()) {
            if !l.is_nan() {
                lo = l;
            }
            if !u.is_nan() {
                hi = u;
            }
        }
        let cost = costs.get(name.as_str()).copied().unwrap_or(0.0);
        let kind = if binary { VarKind::Binary } else { VarKind::Continuous };
        let id = problem.add_var(decode(name)?, kind, lo, hi, cost)?;
        ids.insert(name.clone(), id);
    }
    for (name, terms, sense, rhs) in parsed.rows {
        let terms: Vec<(VarId, f64)> = terms.iter().map(|(n, a)| (ids[n], *a)).collect();
        problem.add_row(decode(&name)?, terms, sense, rhs)?;
    }
    problem.canonicalize();
    Ok(problem)
}

pub fn read_lp(path: &Path) -> Result<MilpProblem, MilpError> {
    parse_lp(&std::fs::read_to_string(path)?)
}
