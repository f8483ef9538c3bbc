//! MPS (fixed format) and LP text writers, and a reader for the MPS subset
//! the writer produces.
//!
//! Names in MPS output are positional (`C<j>` for variable `j`, `R<i>` for
//! row `i`) so they always fit the eight-character fields; a comment block
//! maps them back to model names. Numbers use the shortest text that round
//! trips exactly, which may overflow the nominal twelve-character fields.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::reform::{MipModel, ObjSense, RowRole, Sense, VarKind, VarRole};

fn col_name(j: usize) -> String {
    format!("C{}", j + 1)
}

fn row_name(i: usize) -> String {
    format!("R{}", i + 1)
}

fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn field_line(out: &mut String, code: &str, n1: &str, n2: &str, v: f64) {
    let _ = writeln!(out, " {:<2} {:<8}  {:<8}  {:>12}", code, n1, n2, num(v));
}

pub fn write_mps(m: &MipModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "* model: {}", m.name);
    if let Some(big_m) = m.big_m {
        let _ = writeln!(out, "* big-M: {}", num(big_m));
    }
    for (j, v) in m.vars.iter().enumerate() {
        let _ = writeln!(out, "* {:<8} {}", col_name(j), v.name);
    }
    for (i, r) in m.rows.iter().enumerate() {
        let _ = writeln!(out, "* {:<8} {}", row_name(i), r.name);
    }
    if !m.cones.is_empty() {
        let _ = writeln!(out, "* second-order cones: head >= ||members||_2 (see CSECTION)");
        for c in &m.cones {
            let members: Vec<String> = c.members.iter().map(|&j| col_name(j)).collect();
            let _ = writeln!(out, "*   {}: {} >= ||({})||_2", c.name, col_name(c.head), members.join(", "));
        }
    }
    let _ = writeln!(out, "NAME          {}", sanitize(&m.name));
    if m.sense == ObjSense::Maximize {
        let _ = writeln!(out, "OBJSENSE\n    MAX");
    }
    let _ = writeln!(out, "ROWS\n N  OBJ");
    for (i, r) in m.rows.iter().enumerate() {
        let code = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {:<2} {}", code, row_name(i));
    }

    // Column-major coefficient lists.
    let mut cols: Vec<Vec<(String, f64)>> = vec![Vec::new(); m.n_vars()];
    let mut obj = vec![0.0; m.n_vars()];
    for &(j, c) in &m.objective {
        obj[j] += c;
    }
    for (j, &c) in obj.iter().enumerate() {
        if c != 0.0 {
            cols[j].push(("OBJ".into(), c));
        }
    }
    for (i, r) in m.rows.iter().enumerate() {
        let mut terms = r.terms.clone();
        terms.sort_by_key(|t| t.0);
        let mut k = 0;
        while k < terms.len() {
            let j = terms[k].0;
            let mut c = 0.0;
            while k < terms.len() && terms[k].0 == j {
                c += terms[k].1;
                k += 1;
            }
            cols[j].push((row_name(i), c));
        }
    }

    let _ = writeln!(out, "COLUMNS");
    let mut in_int = false;
    let mut marker = 0;
    for (j, entries) in cols.iter().enumerate() {
        let is_int = m.vars[j].kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER{marker:<4}        'MARKER'                 {tag}");
            marker += 1;
            in_int = is_int;
        }
        if entries.is_empty() {
            field_line(&mut out, "", &col_name(j), "OBJ", 0.0);
        }
        for (row, c) in entries {
            field_line(&mut out, "", &col_name(j), row, *c);
        }
    }
    if in_int {
        let _ = writeln!(out, "    MARKER{marker:<4}        'MARKER'                 'INTEND'");
    }

    let _ = writeln!(out, "RHS");
    for (i, r) in m.rows.iter().enumerate() {
        if r.rhs != 0.0 {
            field_line(&mut out, "", "RHS", &row_name(i), r.rhs);
        }
    }

    let _ = writeln!(out, "BOUNDS");
    for (j, v) in m.vars.iter().enumerate() {
        let c = col_name(j);
        let (l, h) = (v.lower, v.upper);
        if v.kind == VarKind::Binary {
            field_line(&mut out, "UP", "BND", &c, 1.0);
        } else if l == h {
            field_line(&mut out, "FX", "BND", &c, l);
        } else if l == f64::NEG_INFINITY && h == f64::INFINITY {
            let _ = writeln!(out, " FR BND       {c}");
        } else {
            if l == f64::NEG_INFINITY {
                let _ = writeln!(out, " MI BND       {c}");
            } else if l != 0.0 {
                field_line(&mut out, "LO", "BND", &c, l);
            }
            if h != f64::INFINITY {
                field_line(&mut out, "UP", "BND", &c, h);
            }
        }
    }

    for (k, cone) in m.cones.iter().enumerate() {
        let _ = writeln!(out, "CSECTION      K{:<7}  0            QUAD", k + 1);
        let _ = writeln!(out, "    {}", col_name(cone.head));
        for &j in &cone.members {
            let _ = writeln!(out, "    {}", col_name(j));
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

fn lp_terms(terms: &[(usize, f64)], names: &[String]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, &(j, c)) in terms.iter().enumerate() {
        let sign = if c < 0.0 { "-" } else { "+" };
        if k == 0 {
            if c < 0.0 {
                s.push_str("- ");
            }
        } else {
            let _ = write!(s, " {sign} ");
        }
        let a = c.abs();
        if a == 1.0 {
            s.push_str(&names[j]);
        } else {
            let _ = write!(s, "{} {}", num(a), names[j]);
        }
    }
    s
}

/// CPLEX-style LP text. Cones become quadratic constraints
/// `-head^2 + sum member^2 <= 0` with `head >= 0`.
pub fn write_lp(m: &MipModel) -> String {
    let names: Vec<String> = m.vars.iter().map(|v| sanitize(&v.name)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ model: {}", m.name);
    if let Some(big_m) = m.big_m {
        let _ = writeln!(out, "\\ big-M: {}", num(big_m));
    }
    let _ = writeln!(out, "{}", if m.sense == ObjSense::Maximize { "Maximize" } else { "Minimize" });
    let _ = writeln!(out, " obj: {}", lp_terms(&m.objective, &names));
    let _ = writeln!(out, "Subject To");
    for r in &m.rows {
        let op = match r.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {}: {} {} {}", sanitize(&r.name), lp_terms(&r.terms, &names), op, num(r.rhs));
    }
    for c in &m.cones {
        let mut q = format!("[ - {} ^2", names[c.head]);
        for &j in &c.members {
            let _ = write!(q, " + {} ^2", names[j]);
        }
        let _ = writeln!(out, " {}: {} ] <= 0", sanitize(&c.name), q);
    }
    let _ = writeln!(out, "Bounds");
    for (j, v) in m.vars.iter().enumerate() {
        if v.kind == VarKind::Binary {
            continue;
        }
        let n = &names[j];
        let (l, h) = (v.lower, v.upper);
        if l == h {
            let _ = writeln!(out, " {n} = {}", num(l));
        } else if l == f64::NEG_INFINITY && h == f64::INFINITY {
            let _ = writeln!(out, " {n} free");
        } else {
            let lo = if l == f64::NEG_INFINITY { "-inf".to_string() } else { num(l) };
            let hi = if h == f64::INFINITY { "+inf".to_string() } else { num(h) };
            let _ = writeln!(out, " {lo} <= {n} <= {hi}");
        }
    }
    let bins = m.binaries();
    if !bins.is_empty() {
        let _ = writeln!(out, "Binaries");
        for j in bins {
            let _ = writeln!(out, " {}", names[j]);
        }
    }
    let _ = writeln!(out, "End");
    out
}

/// Read an MPS document in the layout produced by [`write_mps`]. Variable
/// and row roles are not stored in MPS; they come back as decisions and
/// feasibility rows.
pub fn read_mps(text: &str) -> Result<MipModel> {
    #[derive(PartialEq)]
    enum Sec {
        None,
        ObjSense,
        Rows,
        Columns,
        Rhs,
        Bounds,
        Cone(usize),
    }
    let bad = |line: &str| Error::Invalid(format!("unrecognised MPS line: {line}"));
    let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Invalid(format!("bad number {s}")));

    let mut m = MipModel::new("");
    let mut sec = Sec::None;
    let mut row_index = std::collections::HashMap::new();
    let mut col_index = std::collections::HashMap::new();
    let mut obj_row = String::new();
    let mut integer = false;
    for line in text.lines() {
        if line.starts_with('*') || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if !line.starts_with(' ') {
            sec = match f[0] {
                "NAME" => {
                    m.name = f.get(1).unwrap_or(&"").to_string();
                    Sec::None
                }
                "OBJSENSE" => Sec::ObjSense,
                "ROWS" => Sec::Rows,
                "COLUMNS" => Sec::Columns,
                "RHS" => Sec::Rhs,
                "BOUNDS" => Sec::Bounds,
                "CSECTION" => Sec::Cone(m.cones.len()),
                "ENDATA" => break,
                _ => return Err(bad(line)),
            };
            if let Sec::Cone(k) = sec {
                let name = f.get(1).unwrap_or(&"K").to_string();
                m.cones.push(crate::reform::ConeRow { name, head: usize::MAX, members: Vec::new() });
                debug_assert_eq!(k + 1, m.cones.len());
            }
            continue;
        }
        match sec {
            Sec::ObjSense => {
                if f[0] == "MAX" {
                    m.sense = ObjSense::Maximize;
                }
            }
            Sec::Rows => {
                let sense = match f[0] {
                    "N" => {
                        obj_row = f[1].to_string();
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    _ => return Err(bad(line)),
                };
                let i = m.add_row(f[1], Vec::new(), sense, 0.0, RowRole::Feasible);
                row_index.insert(f[1].to_string(), i);
            }
            Sec::Columns => {
                if f.len() >= 3 && f[1] == "'MARKER'" {
                    integer = f[2] == "'INTORG'";
                    continue;
                }
                let j = *col_index.entry(f[0].to_string()).or_insert_with(|| {
                    let idx = m.vars.len();
                    if integer {
                        m.add_binary(f[0], VarRole::Decision(idx))
                    } else {
                        m.add_continuous(f[0], 0.0, f64::INFINITY, VarRole::Decision(idx))
                    }
                });
                for pair in f[1..].chunks(2) {
                    let [r, v] = pair else { return Err(bad(line)) };
                    let v = parse(v)?;
                    if *r == obj_row {
                        if v != 0.0 {
                            m.objective.push((j, v));
                        }
                    } else {
                        let i = *row_index.get(*r).ok_or_else(|| bad(line))?;
                        m.rows[i].terms.push((j, v));
                    }
                }
            }
            Sec::Rhs => {
                for pair in f[1..].chunks(2) {
                    let [r, v] = pair else { return Err(bad(line)) };
                    let i = *row_index.get(*r).ok_or_else(|| bad(line))?;
                    m.rows[i].rhs = parse(v)?;
                }
            }
            Sec::Bounds => {
                let j = *col_index.get(f[2]).ok_or_else(|| bad(line))?;
                let var = &mut m.vars[j];
                match f[0] {
                    "UP" => var.upper = parse(f[3])?,
                    "LO" => var.lower = parse(f[3])?,
                    "FX" => {
                        var.lower = parse(f[3])?;
                        var.upper = var.lower;
                    }
                    "FR" => {
                        var.lower = f64::NEG_INFINITY;
                        var.upper = f64::INFINITY;
                    }
                    "MI" => var.lower = f64::NEG_INFINITY,
                    "PL" => var.upper = f64::INFINITY,
                    "BV" => {
                        var.kind = VarKind::Binary;
                        var.lower = 0.0;
                        var.upper = 1.0;
                    }
                    _ => return Err(bad(line)),
                }
            }
            Sec::Cone(k) => {
                let j = *col_index.get(f[0]).ok_or_else(|| bad(line))?;
                let cone = &mut m.cones[k];
                if cone.head == usize::MAX {
                    cone.head = j;
                } else {
                    cone.members.push(j);
                }
            }
            Sec::None => return Err(bad(line)),
        }
    }
    Ok(m)
}
