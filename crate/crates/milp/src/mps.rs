//! Fixed-field MPS output.
//!
//! Fixed MPS limits names to eight characters, so rows are written as
//! `R0000001`.. and columns as `C0000001`..; a comment block at the top of
//! the file maps every short name back to the problem's own name. Numbers are
//! written in at most twelve characters, which can round values that need
//! more digits; use the LP writer for exact round trips.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::MilpError;
use crate::problem::{MilpProblem, Sense, VarId, VarKind};

fn row_code(i: usize) -> String {
    format!("R{:07}", i + 1)
}

fn col_code(j: usize) -> String {
    format!("C{:07}", j + 1)
}

/// Formats `v` in at most 12 characters.
pub fn format_field(v: f64) -> String {
    let plain = crate::lpfile::format_number(v);
    if plain.len() <= 12 {
        return plain;
    }
    for digits in (0..=8).rev() {
        let s = format!("{v:.digits$E}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:.0E}")
}

fn line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str, f5: &str, f6: &str) {
    // columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61
    let mut s = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}");
    if !f5.is_empty() {
        let _ = write!(s, "   {f5:<8}  {f6:>12}");
    }
    out.push_str(s.trim_end());
    out.push('\n');
}

pub fn to_mps_string(problem: &MilpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "* generated from problem `{}`", problem.tag);
    for (j, v) in problem.variables().iter().enumerate() {
        let _ = writeln!(out, "* {} {}", col_code(j), v.name);
    }
    for (i, r) in problem.constraints().iter().enumerate() {
        let _ = writeln!(out, "* {} {}", row_code(i), r.name);
    }
    let mut name = problem.tag.replace(char::is_whitespace, "_");
    name.truncate(8);
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    out.push_str(" N  COST\n");
    for (i, r) in problem.constraints().iter().enumerate() {
        let t = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {t}  {}", row_code(i));
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); problem.num_vars()];
    for (i, r) in problem.constraints().iter().enumerate() {
        for &(v, a) in &r.terms {
            by_col[v.0].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, v) in problem.variables().iter().enumerate() {
        let binary = v.kind == VarKind::Binary;
        if binary != in_int {
            let kind = if binary { "'INTORG'" } else { "'INTEND'" };
            line(&mut out, "", &format!("M{marker:07}"), "'MARKER'", "", kind, "");
            marker += 1;
            in_int = binary;
        }
        let mut entries: Vec<(String, f64)> = Vec::new();
        if v.cost != 0.0 {
            entries.push(("COST".into(), v.cost));
        }
        entries.extend(by_col[j].iter().map(|&(i, a)| (row_code(i), a)));
        if entries.is_empty() {
            entries.push(("COST".into(), 0.0));
        }
        for pair in entries.chunks(2) {
            let (r1, a1) = &pair[0];
            let (r2, a2) = pair
                .get(1)
                .map(|(r, a)| (r.as_str(), format_field(*a)))
                .unwrap_or(("", String::new()));
            line(&mut out, "", &col_code(j), r1, &format_field(*a1), r2, &a2);
        }
    }
    if in_int {
        line(&mut out, "", &format!("M{marker:07}"), "'MARKER'", "", "'INTEND'", "");
    }

    out.push_str("RHS\n");
    let rhs: Vec<(String, f64)> = problem
        .constraints()
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rhs != 0.0)
        .map(|(i, r)| (row_code(i), r.rhs))
        .collect();
    for pair in rhs.chunks(2) {
        let (r2, a2) = pair
            .get(1)
            .map(|(r, a)| (r.as_str(), format_field(*a)))
            .unwrap_or(("", String::new()));
        line(&mut out, "", "RHS", &pair[0].0, &format_field(pair[0].1), r2, &a2);
    }

    out.push_str("BOUNDS\n");
    for (j, v) in problem.variables().iter().enumerate() {
        let c = col_code(j);
        if v.kind == VarKind::Binary {
            line(&mut out, "BV", "BND", &c, "", "", "");
            continue;
        }
        let (l, u) = (v.lower, v.upper);
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            line(&mut out, "FR", "BND", &c, "", "", "");
            continue;
        }
        if l == u {
            line(&mut out, "FX", "BND", &c, &format_field(l), "", "");
            continue;
        }
        if l == f64::NEG_INFINITY {
            line(&mut out, "MI", "BND", &c, "", "", "");
        } else if l != 0.0 {
            line(&mut out, "LO", "BND", &c, &format_field(l), "", "");
        }
        if u != f64::INFINITY {
            line(&mut out, "UP", "BND", &c, &format_field(u), "", "");
        }
    }
    out.push_str("ENDATA\n");
    out
}

pub fn write_mps(problem: &MilpProblem, path: &Path) -> Result<(), MilpError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(to_mps_string(problem).as_bytes())?;
    f.flush()?;
    Ok(())
}

/// Reads MPS written by [`to_mps_string`] or any whitespace-separated MPS
/// without embedded blanks in names. Name-map comments are honoured.
pub fn parse_mps(text: &str) -> Result<MilpProblem, MilpError> {
    let mut alias: HashMap<String, String> = HashMap::new();
    let mut section = "";
    let mut tag = String::from("mps");
    let mut rows: Vec<(String, Option<Sense>)> = Vec::new();
    let mut row_pos: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<(String, bool)> = Vec::new();
    let mut col_pos: HashMap<String, usize> = HashMap::new();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut costs: HashMap<usize, f64> = HashMap::new();
    let mut rhs: HashMap<usize, f64> = HashMap::new();
    let mut bounds: HashMap<usize, (f64, f64)> = HashMap::new();
    let mut integer = false;
    let mut objective_row: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let err = |m: &str| MilpError::Parse {
            line: lineno,
            message: m.to_string(),
        };
        if let Some(c) = raw.strip_prefix('*') {
            if let Some((code, name)) = c.trim_start().split_once(' ') {
                let is_code = code.len() == 8
                    && (code.starts_with('R') || code.starts_with('C'))
                    && code[1..].bytes().all(|b| b.is_ascii_digit());
                if is_code {
                    alias.insert(code.to_string(), name.to_string());
                }
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        if !raw.starts_with(' ') {
            let mut it = raw.split_whitespace();
            section = match it.next().unwrap() {
                "NAME" => {
                    if let Some(n) = it.next() {
                        tag = n.to_string();
                    }
                    "NAME"
                }
                "ROWS" => "ROWS",
                "COLUMNS" => "COLUMNS",
                "RHS" => "RHS",
                "BOUNDS" => "BOUNDS",
                "RANGES" => return Err(err("RANGES are not supported")),
                "ENDATA" => break,
                other => return Err(err(&format!("unknown section {other}"))),
            };
            continue;
        }
        let f: Vec<&str> = raw.split_whitespace().collect();
        match section {
            "ROWS" => {
                let sense = match f[0] {
                    "N" => None,
                    "L" => Some(Sense::Le),
                    "G" => Some(Sense::Ge),
                    "E" => Some(Sense::Eq),
                    _ => return Err(err("bad row type")),
                };
                if sense.is_none() {
                    if objective_row.is_none() {
                        objective_row = Some(f[1].to_string());
                    }
                    continue;
                }
                row_pos.insert(f[1].to_string(), rows.len());
                rows.push((f[1].to_string(), sense));
            }
            "COLUMNS" => {
                if f.len() >= 3 && f[1] == "'MARKER'" {
                    integer = f[2] == "'INTORG'";
                    continue;
                }
                let c = *col_pos.entry(f[0].to_string()).or_insert_with(|| {
                    cols.push((f[0].to_string(), integer));
                    cols.len() - 1
                });
                for pair in f[1..].chunks(2) {
                    if pair.len() != 2 {
                        return Err(err("dangling column entry"));
                    }
                    let v: f64 = pair[1].parse().map_err(|_| err("bad number"))?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        *costs.entry(c).or_insert(0.0) += v;
                    } else {
                        let r = *row_pos.get(pair[0]).ok_or_else(|| err("unknown row"))?;
                        entries.push((r, c, v));
                    }
                }
            }
            "RHS" => {
                for pair in f[1..].chunks(2) {
                    if pair.len() != 2 {
                        return Err(err("dangling rhs entry"));
                    }
                    let v: f64 = pair[1].parse().map_err(|_| err("bad number"))?;
                    if let Some(&r) = row_pos.get(pair[0]) {
                        rhs.insert(r, v);
                    }
                }
            }
            "BOUNDS" => {
                let c = *col_pos.get(f[2]).ok_or_else(|| err("unknown column"))?;
                let val = || -> Result<f64, MilpError> {
                    f.get(3)
                        .ok_or_else(|| err("missing bound value"))?
                        .parse()
                        .map_err(|_| err("bad number"))
                };
                let b = bounds.entry(c).or_insert((0.0, f64::INFINITY));
                match f[0] {
                    "UP" => b.1 = val()?,
                    "LO" => b.0 = val()?,
                    "FX" => {
                        let v = val()?;
                        *b = (v, v);
                    }
                    "FR" => *b = (f64::NEG_INFINITY, f64::INFINITY),
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "PL" => b.1 = f64::INFINITY,
                    "BV" => {
                        *b = (0.0, 1.0);
                        cols[c].1 = true;
                    }
                    _ => return Err(err("unsupported bound type")),
                }
            }
            _ => return Err(err("data outside a section")),
        }
    }

    let real = |n: &str| alias.get(n).cloned().unwrap_or_else(|| n.to_string());
    let mut problem = MilpProblem::new(tag);
    let mut ids = Vec::with_capacity(cols.len());
    for (c, (name, int)) in cols.iter().enumerate() {
        let (lo, hi) = bounds
            .get(&c)
            .copied()
            .unwrap_or(if *int { (0.0, 1.0) } else { (0.0, f64::INFINITY) });
        let kind = if *int { VarKind::Binary } else { VarKind::Continuous };
        ids.push(problem.add_var(real(name), kind, lo, hi, costs.get(&c).copied().unwrap_or(0.0))?);
    }
    let mut row_terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); rows.len()];
    for (r, c, v) in entries {
        row_terms[r].push((ids[c], v));
    }
    for (r, ((name, sense), terms)) in rows.iter().zip(row_terms).enumerate() {
        problem.add_row(
            real(name),
            terms,
            sense.expect("objective rows are skipped"),
            rhs.get(&r).copied().unwrap_or(0.0),
        )?;
    }
    problem.canonicalize();
    Ok(problem)
}

pub fn read_mps(path: &Path) -> Result<MilpProblem, MilpError> {
    parse_mps(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_fit_twelve_chars() {
        for v in [0.1, 1.0 / 3.0, -123456.789012345, 1e-17, 6.02e23, 100.0] {
            let s = format_field(v);
            assert!(s.len() <= 12, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-6 * v.abs(), "{s} vs {v}");
        }
    }

    #[test]
    fn fixed_columns_line_up() {
        let mut out = String::new();
        line(&mut out, "", "C0000001", "R0000001", "1.5", "R0000002", "-2");
        let l = out.trim_end_matches('\n');
        assert_eq!(&l[4..12], "C0000001");
        assert_eq!(&l[14..22], "R0000001");
        assert_eq!(l[24..36].trim(), "1.5");
        assert_eq!(&l[39..47], "R0000002");
        assert_eq!(l[49..61].trim(), "-2");
    }
}
