use std::io::{self, Write};

use crate::{BoundedLP, Relation, Sense};

/// Formats `v` into at most 12 characters, the fixed-format field width.
fn field(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    for prec in (0..=10).rev() {
        let s = format!("{v:.prec$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:.0e}")
}

fn col_name(j: usize) -> String {
    format!("C{j:07}")
}

fn row_name(i: usize) -> String {
    format!("R{i:07}")
}

/// Writes `lp` in fixed-column MPS format with an `OBJSENSE` section.
///
/// Names are synthesized as `C0000000`/`R0000000`; labels are emitted as
/// comment lines so external tools ignore them.
pub fn write_mps<W: Write>(lp: &BoundedLP, name: &str, out: &mut W) -> io::Result<()> {
    let name: String = name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    writeln!(out, "NAME          {name}")?;
    writeln!(out, "OBJSENSE")?;
    let sense = if lp.sense == Sense::Maximize { "MAX" } else { "MIN" };
    writeln!(out, "    {sense}")?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N  OBJ")?;
    for (i, row) in lp.rows.iter().enumerate() {
        let t = match row.relation {
            Relation::Le => 'L',
            Relation::Eq => 'E',
            Relation::Ge => 'G',
        };
        writeln!(out, " {t}  {}", row_name(i))?;
    }

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars()];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            cols[j].push((i, a));
        }
    }
    writeln!(out, "COLUMNS")?;
    for (j, col) in cols.iter().enumerate() {
        if let Some(label) = lp.var_labels.get(j) {
            writeln!(out, "* {} = {label}", col_name(j))?;
        }
        let mut entries: Vec<(String, f64)> = Vec::with_capacity(col.len() + 1);
        if lp.objective[j] != 0.0 || col.is_empty() {
            entries.push(("OBJ".to_string(), lp.objective[j]));
        }
        entries.extend(col.iter().map(|&(i, a)| (row_name(i), a)));
        for pair in entries.chunks(2) {
            let mut line = format!("    {:<8}  {:<8}  {:>12}", col_name(j), pair[0].0, field(pair[0].1));
            if let Some((r, v)) = pair.get(1) {
                line.push_str(&format!("   {:<8}  {:>12}", r, field(*v)));
            }
            writeln!(out, "{line}")?;
        }
    }

    writeln!(out, "RHS")?;
    for (i, row) in lp.rows.iter().enumerate() {
        if row.rhs != 0.0 {
            writeln!(out, "    RHS       {:<8}  {:>12}", row_name(i), field(row.rhs))?;
        }
    }

    writeln!(out, "BOUNDS")?;
    for j in 0..lp.num_vars() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let c = col_name(j);
        if lo == hi {
            writeln!(out, " FX BND       {c:<8}  {:>12}", field(lo))?;
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => writeln!(out, " FR BND       {c:<8}")?,
            (false, true) => {
                writeln!(out, " MI BND       {c:<8}")?;
                writeln!(out, " UP BND       {c:<8}  {:>12}", field(hi))?;
            }
            (true, _) => {
                if lo != 0.0 {
                    writeln!(out, " LO BND       {c:<8}  {:>12}", field(lo))?;
                }
                if hi.is_finite() {
                    writeln!(out, " UP BND       {c:<8}  {:>12}", field(hi))?;
                }
            }
        }
    }
    writeln!(out, "ENDATA")
}
