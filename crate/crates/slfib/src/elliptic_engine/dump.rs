//! Field dump: one JSON header line, then CSV `x,y[,f],u,v`, one row per node
//! in grid order (row-major in y then x on the strip, ring by ring on the disc).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::field::{Diagnostics, DomainKind, DomainSpec, FieldBoundary, SolutionField};
use crate::error::{Result, SlError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DumpHeader {
    pub kind: DomainKind,
    pub a: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub boundary: FieldBoundary,
    pub residual_norm: f64,
}

pub fn write_dump<W: Write>(field: &SolutionField, mut w: W) -> Result<()> {
    let d = field.domain;
    let header = DumpHeader {
        kind: d.kind,
        a: field.a,
        r: d.r,
        p: d.p,
        n_x: d.n_x,
        n_y: d.n_y,
        boundary: field.boundary.clone(),
        residual_norm: field.residual_norm,
    };
    let line = serde_json::to_string(&header).map_err(|e| SlError::Io(e.to_string()))?;
    writeln!(w, "{line}")?;
    match &field.f {
        Some(_) => writeln!(w, "x,y,f,u,v")?,
        None => writeln!(w, "x,y,u,v")?,
    }
    for k in 0..d.node_count() {
        let (x, y) = d.node_xy(k);
        match &field.f {
            Some(f) => writeln!(w, "{},{},{},{},{}", x, y, f[k], field.u[k], field.v[k])?,
            None => writeln!(w, "{},{},{},{}", x, y, field.u[k], field.v[k])?,
        }
    }
    Ok(())
}

pub fn read_dump<R: BufRead>(r: R) -> Result<SolutionField> {
    let mut lines = r.lines();
    let bad = |m: &str| SlError::Io(format!("malformed dump: {m}"));
    let head = lines.next().ok_or_else(|| bad("empty"))??;
    let h: DumpHeader = serde_json::from_str(&head).map_err(|e| bad(&e.to_string()))?;
    let domain = DomainSpec {
        kind: h.kind,
        r: h.r,
        p: h.p,
        n_x: h.n_x,
        n_y: h.n_y,
    };
    domain.validate()?;
    let cols = lines.next().ok_or_else(|| bad("missing column line"))??;
    let has_f = cols.trim() == "x,y,f,u,v";
    let n = domain.node_count();
    let mut f = Vec::with_capacity(if has_f { n } else { 0 });
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        let want = if has_f { 5 } else { 4 };
        if vals.len() != want {
            return Err(bad("wrong column count"));
        }
        if has_f {
            f.push(vals[2]);
        }
        u.push(vals[want - 2]);
        v.push(vals[want - 1]);
    }
    if u.len() != n {
        return Err(bad("node count does not match header"));
    }
    Ok(SolutionField {
        domain,
        a: h.a,
        f: if has_f { Some(f) } else { None },
        u,
        v,
        boundary: h.boundary,
        converged: true,
        residual_norm: h.residual_norm,
        diagnostics: Diagnostics::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic_engine::{solve_disc, BoundarySpec};

    #[test]
    fn dump_roundtrip_is_exact() {
        let d = DomainSpec::disc(16);
        let fld = solve_disc(&BoundarySpec::vhat(0.5), 1.0, &d).unwrap();
        let mut buf = Vec::new();
        write_dump(&fld, &mut buf).unwrap();
        let back = read_dump(&buf[..]).unwrap();
        assert_eq!(back.u, fld.u);
        assert_eq!(back.v, fld.v);
        assert_eq!(back.f, fld.f);
        assert_eq!(back.boundary, fld.boundary);
    }
}
