//! Plain-text grid files.
//!
//! ```text
//! SYSTOLIC-GRID 1
//! lattice b1x b1y b2x b2y
//! dims nu nv
//! <nu·nv values, row-major, i outer>
//! ```
//!
//! Writers emit 17 significant digits so files round-trip exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::ScalarField;
use crate::error::{Error, Result};
use crate::lattice::Lattice2D;

const MAGIC: &str = "SYSTOLIC-GRID";
const VERSION: &str = "1";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_string(field: &ScalarField) -> String {
    let l = field.lattice();
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {VERSION}");
    let _ = writeln!(
        s,
        "lattice {} {} {} {}",
        num(l.b1().x),
        num(l.b1().y),
        num(l.b2().x),
        num(l.b2().y)
    );
    let _ = writeln!(s, "dims {} {}", field.nu(), field.nv());
    for row in field.values().chunks(field.nv()) {
        let line: Vec<String> = row.iter().map(|&x| num(x)).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

fn parse_f64(tok: Option<&str>, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {tok:?}")))
}

pub fn from_str(text: &str) -> Result<ScalarField> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());

    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty grid file".into()))?;
    let mut it = header.split_whitespace();
    if it.next() != Some(MAGIC) || it.next() != Some(VERSION) || it.next().is_some() {
        return Err(Error::Parse(format!("bad header line {header:?}")));
    }

    let lat = lines
        .next()
        .ok_or_else(|| Error::Parse("missing lattice line".into()))?;
    let mut it = lat.split_whitespace();
    if it.next() != Some("lattice") {
        return Err(Error::Parse(format!("expected lattice line, got {lat:?}")));
    }
    let b1x = parse_f64(it.next(), "b1x")?;
    let b1y = parse_f64(it.next(), "b1y")?;
    let b2x = parse_f64(it.next(), "b2x")?;
    let b2y = parse_f64(it.next(), "b2y")?;
    let lattice = Lattice2D::from_arrays([b1x, b1y], [b2x, b2y])?;

    let dims = lines
        .next()
        .ok_or_else(|| Error::Parse("missing dims line".into()))?;
    let mut it = dims.split_whitespace();
    if it.next() != Some("dims") {
        return Err(Error::Parse(format!("expected dims line, got {dims:?}")));
    }
    let parse_dim = |t: Option<&str>, what: &str| -> Result<usize> {
        let t = t.ok_or_else(|| Error::Parse(format!("missing {what}")))?;
        t.parse()
            .map_err(|_| Error::Parse(format!("bad {what}: {t:?}")))
    };
    let nu = parse_dim(it.next(), "nu")?;
    let nv = parse_dim(it.next(), "nv")?;

    let values = lines
        .flat_map(str::split_whitespace)
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad sample {t:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    ScalarField::new(lattice, nu, nv, values)
}

pub fn write(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_string(field))?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<ScalarField> {
    from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{from_analytic, AnalyticFamily};

    #[test]
    fn layout_matches_format() {
        let f = ScalarField::from_fn(Lattice2D::square(), 8, 9, |u, v| u + 10.0 * v).unwrap();
        let text = to_string(&f);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("SYSTOLIC-GRID 1"));
        assert!(lines.next().unwrap().starts_with("lattice 1.0000000000000000e0 "));
        assert_eq!(lines.next(), Some("dims 8 9"));
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(first.len(), 9);
        assert_eq!(first[1], 10.0 / 9.0);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let l = Lattice2D::from_tau(0.31, 1.7).unwrap();
        let f = from_analytic(&l, 16, 12, &AnalyticFamily::riemann_bump(4.0, [0.5, 0.5])).unwrap();
        let g = from_str(&to_string(&f)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(from_str(""), Err(Error::Parse(_))));
        assert!(matches!(
            from_str("SYSTOLIC-GRID 2\nlattice 1 0 0 1\ndims 8 8\n"),
            Err(Error::Parse(_))
        ));
        let short = "SYSTOLIC-GRID 1\nlattice 1 0 0 1\ndims 8 8\n1 2 3\n";
        assert!(matches!(from_str(short), Err(Error::InvalidGrid(_))));
        let degenerate = "SYSTOLIC-GRID 1\nlattice 1 0 2 0\ndims 8 8\n";
        assert!(matches!(from_str(degenerate), Err(Error::InvalidLattice(_))));
    }
}
