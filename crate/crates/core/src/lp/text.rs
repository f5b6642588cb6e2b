//! A subset of the CPLEX LP text format: `Minimize`, `Subject To`,
//! `Bounds`, `End`, one constraint per line. Columns are written as `x<j>`
//! and rows as `r<i>`; model names go into `\` comment lines.

use std::fmt::Write as _;

use super::{LpModel, RowSense, Var};
use crate::error::{invalid, Result};

fn push_terms(out: &mut String, terms: impl Iterator<Item = (usize, f64)>) {
    let mut first = true;
    for (j, a) in terms {
        if a < 0.0 {
            let _ = write!(out, " - {} x{}", -a, j);
        } else if first {
            let _ = write!(out, " {} x{}", a, j);
        } else {
            let _ = write!(out, " + {} x{}", a, j);
        }
        first = false;
    }
    if first {
        out.push_str(" 0");
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Serializes `model`. Every column appears in the objective (possibly with
/// a zero coefficient) so that reading preserves column order.
pub fn write_lp(model: &LpModel) -> String {
    let mut out = String::new();
    for (j, v) in model.vars.iter().enumerate() {
        if !v.name.is_empty() {
            let _ = writeln!(out, "\\ x{j} = {}", v.name);
        }
    }
    for (i, r) in model.rows.iter().enumerate() {
        if !r.name.is_empty() {
            let _ = writeln!(out, "\\ r{i} = {}", r.name);
        }
    }
    out.push_str("Minimize\n obj:");
    push_terms(
        &mut out,
        model.vars.iter().enumerate().map(|(j, v)| (j, v.cost)),
    );
    if model.offset != 0.0 {
        let sign = if model.offset < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", model.offset.abs());
    }
    out.push_str("\nSubject To\n");
    for (i, r) in model.rows.iter().enumerate() {
        let _ = write!(out, " r{i}:");
        push_terms(&mut out, r.coefs.iter().copied());
        let op = match r.sense {
            RowSense::Eq => "=",
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", r.rhs);
    }
    out.push_str("Bounds\n");
    for (j, v) in model.vars.iter().enumerate() {
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " x{j} free");
        } else if !(v.lower == 0.0 && v.upper == f64::INFINITY) {
            let _ = writeln!(
                out,
                " {} <= x{j} <= {}",
                fmt_bound(v.lower),
                fmt_bound(v.upper)
            );
        }
    }
    out.push_str("End\n");
    out
}

fn parse_var(tok: &str) -> Option<usize> {
    tok.strip_prefix('x')?.parse().ok()
}

fn parse_num(tok: &str) -> Result<f64> {
    match tok {
        "+inf" | "inf" | "+infinity" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse()
            .map_err(|_| invalid(format!("LP text: bad number {tok:?}"))),
    }
}

/// Parses `± coef name ± const …` into terms and a constant.
fn parse_expr(tokens: &[&str]) -> Result<(Vec<(usize, f64)>, f64)> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i];
        match t {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Some(j) = parse_var(t) {
                    terms.push((j, sign));
                } else {
                    let a = parse_num(t)?;
                    if let Some(j) = tokens.get(i + 1).and_then(|n| parse_var(n)) {
                        terms.push((j, sign * a));
                        i += 1;
                    } else {
                        constant += sign * a;
                    }
                }
                sign = 1.0;
            }
        }
        i += 1;
    }
    Ok((terms, constant))
}

#[derive(PartialEq)]
enum Section {
    Head,
    Objective,
    Rows,
    Bounds,
    Done,
}

type ParsedRow = (Vec<(usize, f64)>, RowSense, f64);

/// Parses text produced by [`write_lp`]. Names are recovered from the
/// comment lines when present.
pub fn read_lp(text: &str) -> Result<LpModel> {
    let mut model = LpModel::new();
    let mut objective: Vec<&str> = Vec::new();
    let mut var_names: Vec<(usize, String)> = Vec::new();
    let mut row_names: Vec<(usize, String)> = Vec::new();
    let mut rows: Vec<ParsedRow> = Vec::new();
    let mut bounds: Vec<(usize, f64, f64)> = Vec::new();
    let mut section = Section::Head;

    for raw in text.lines() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('\\') {
            if let Some((lhs, name)) = comment.split_once(" = ") {
                let lhs = lhs.trim();
                if let Some(j) = parse_var(lhs) {
                    var_names.push((j, name.to_string()));
                } else if let Some(i) = lhs.strip_prefix('r').and_then(|s| s.parse().ok()) {
                    row_names.push((i, name.to_string()));
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => {
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Rows;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "end" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        let body = line.split_once(':').map(|(_, b)| b).unwrap_or(line);
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match section {
            Section::Objective => objective.extend(tokens),
            Section::Rows => {
                let pos = tokens
                    .iter()
                    .position(|t| matches!(*t, "=" | "<=" | ">=" | "=<" | "=>"))
                    .ok_or_else(|| invalid(format!("LP text: row without relation: {line}")))?;
                let sense = match tokens[pos] {
                    "=" => RowSense::Eq,
                    "<=" | "=<" => RowSense::Le,
                    _ => RowSense::Ge,
                };
                let (terms, constant) = parse_expr(&tokens[..pos])?;
                let (_, rhs) = parse_expr(&tokens[pos + 1..])?;
                rows.push((terms, sense, rhs - constant));
            }
            Section::Bounds => match tokens.as_slice() {
                [v, "free"] => {
                    let j = parse_var(v)
                        .ok_or_else(|| invalid(format!("LP text: bad bound {line}")))?;
                    bounds.push((j, f64::NEG_INFINITY, f64::INFINITY));
                }
                [lo, "<=", v, "<=", hi] => {
                    let j = parse_var(v)
                        .ok_or_else(|| invalid(format!("LP text: bad bound {line}")))?;
                    bounds.push((j, parse_num(lo)?, parse_num(hi)?));
                }
                [v, "=", val] => {
                    let j = parse_var(v)
                        .ok_or_else(|| invalid(format!("LP text: bad bound {line}")))?;
                    let x = parse_num(val)?;
                    bounds.push((j, x, x));
                }
                _ => return Err(invalid(format!("LP text: unsupported bound line {line}"))),
            },
            Section::Head | Section::Done => {
                return Err(invalid(format!("LP text: unexpected line {line}")));
            }
        }
    }
    if section != Section::Done {
        return Err(invalid("LP text: missing End"));
    }

    let (obj_terms, offset) = parse_expr(&objective)?;
    let n = obj_terms
        .iter()
        .map(|(j, _)| j + 1)
        .chain(rows.iter().flat_map(|r| r.0.iter().map(|(j, _)| j + 1)))
        .chain(bounds.iter().map(|b| b.0 + 1))
        .max()
        .unwrap_or(0);
    for _ in 0..n {
        model.nonneg(0.0, "");
    }
    for (j, c) in obj_terms {
        model.vars[j].cost += c;
    }
    model.offset = offset;
    for (j, lo, hi) in bounds {
        model.set_bounds(Var(j), lo, hi);
    }
    for (j, name) in var_names {
        if j < n {
            model.vars[j].name = name;
        }
    }
    for (terms, sense, rhs) in rows {
        model.add_row(terms.into_iter().map(|(j, a)| (Var(j), a)), sense, rhs, "");
    }
    for (i, name) in row_names {
        if i < model.rows.len() {
            model.rows[i].name = name;
        }
    }
    Ok(model)
}
