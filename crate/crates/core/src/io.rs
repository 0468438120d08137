//! Text formats for families and graphs.
//!
//! Family files:
//!
//! ```text
//! # comment
//! n m k p
//! e1 e2 .. ep [w <weight>]     (m lines)
//! ```
//!
//! A comment of the form `#labels a b c ..` attaches display names to the
//! elements; it is optional and otherwise ignored.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sets::{ElementSet, Universe, WeightedFamily};

/// Contents of a family file.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyFile {
    pub universe: Universe,
    pub k: usize,
    pub family: WeightedFamily,
    pub labels: Option<Vec<String>>,
}

impl FamilyFile {
    pub fn new(k: usize, family: WeightedFamily) -> Self {
        FamilyFile {
            universe: family.universe(),
            k,
            family,
            labels: None,
        }
    }
}

/// Iterates `(line_number, content)` over non-blank, non-comment lines and
/// hands `#labels` lines to `on_labels`.
pub(crate) fn content_lines<R: BufRead>(
    reader: R,
    mut on_labels: impl FnMut(usize, &str) -> Result<()>,
) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(labels) = rest.strip_prefix("labels") {
                on_labels(lineno, labels)?;
            }
            continue;
        }
        out.push((lineno, trimmed.to_string()));
    }
    Ok(out)
}

pub(crate) fn parse_usize(lineno: usize, tok: &str, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(lineno, format!("expected {what}, found `{tok}`")))
}

pub fn read_family<R: BufRead>(reader: R) -> Result<FamilyFile> {
    let mut labels: Option<(usize, Vec<String>)> = None;
    let lines = content_lines(reader, |lineno, rest| {
        labels = Some((lineno, rest.split_whitespace().map(String::from).collect()));
        Ok(())
    })?;
    let mut it = lines.into_iter();
    let (hline, header) = it
        .next()
        .ok_or_else(|| Error::parse(1, "missing header `n m k p`"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(Error::parse(hline, "header must be `n m k p`"));
    }
    let n = parse_usize(hline, fields[0], "universe size")?;
    let m = parse_usize(hline, fields[1], "member count")?;
    let k = parse_usize(hline, fields[2], "rank")?;
    let p = parse_usize(hline, fields[3], "set size")?;
    let universe = Universe::new(n);

    if let Some((lineno, l)) = &labels {
        if l.len() != n {
            return Err(Error::parse(
                *lineno,
                format!("{} labels for a universe of {n}", l.len()),
            ));
        }
    }

    let mut members = Vec::with_capacity(m);
    let mut weights: Vec<f64> = Vec::with_capacity(m);
    let mut weighted: Option<bool> = None;
    for (lineno, line) in it.by_ref().take(m) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (elems, weight) = match toks.iter().position(|&t| t == "w") {
            Some(pos) => {
                if pos + 2 != toks.len() {
                    return Err(Error::parse(lineno, "`w` must be followed by exactly one weight"));
                }
                let w: f64 = toks[pos + 1].parse().map_err(|_| {
                    Error::parse(lineno, format!("bad weight `{}`", toks[pos + 1]))
                })?;
                if !w.is_finite() {
                    return Err(Error::parse(lineno, "weight must be finite"));
                }
                (&toks[..pos], Some(w))
            }
            None => (&toks[..], None),
        };
        match (weighted, weight.is_some()) {
            (None, w) => weighted = Some(w),
            (Some(a), b) if a != b => {
                return Err(Error::parse(lineno, "either every member is weighted or none is"))
            }
            _ => {}
        }
        let mut set = ElementSet::empty(n);
        for tok in elems {
            let e = parse_usize(lineno, tok, "element id")?;
            if e >= n {
                return Err(Error::parse(
                    lineno,
                    format!("element {e} out of range for universe of size {n}"),
                ));
            }
            if set.contains(e) {
                return Err(Error::parse(lineno, format!("duplicate element {e}")));
            }
            set.insert(e);
        }
        if set.len() != p {
            return Err(Error::parse(
                lineno,
                format!("set has {} elements, header declares p = {p}", set.len()),
            ));
        }
        members.push(set);
        if let Some(w) = weight {
            weights.push(w);
        }
    }
    if members.len() != m {
        return Err(Error::parse(
            hline,
            format!("header declares {m} members, found {}", members.len()),
        ));
    }
    if let Some((lineno, _)) = it.next() {
        return Err(Error::parse(
            lineno,
            format!("unexpected line after {m} members"),
        ));
    }
    let family = WeightedFamily::from_parts(
        universe,
        p,
        members,
        weighted.unwrap_or(false).then_some(weights),
    )?;
    Ok(FamilyFile {
        universe,
        k,
        family,
        labels: labels.map(|(_, l)| l),
    })
}

/// Canonical text: elements ascending within each line, members in order.
pub fn family_to_string(file: &FamilyFile) -> String {
    let fam = &file.family;
    let mut out = String::new();
    if let Some(labels) = &file.labels {
        let _ = writeln!(out, "#labels {}", labels.join(" "));
    }
    let _ = writeln!(
        out,
        "{} {} {} {}",
        file.universe.size(),
        fam.len(),
        file.k,
        fam.p()
    );
    for (i, m) in fam.members().iter().enumerate() {
        let elems: Vec<String> = m.iter().map(|e| e.to_string()).collect();
        out.push_str(&elems.join(" "));
        if fam.is_weighted() {
            if !elems.is_empty() {
                out.push(' ');
            }
            let _ = write!(out, "w {}", fam.weight(i));
        }
        out.push('\n');
    }
    out
}

pub fn write_family<W: Write>(mut w: W, file: &FamilyFile) -> Result<()> {
    w.write_all(family_to_string(file).as_bytes())?;
    Ok(())
}
