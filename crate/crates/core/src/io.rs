//! File formats: PBM (P1) and voxel-text masks, point CSVs and profile CSVs.
//!
//! Profile CSV: `#key=value` metadata lines (`dim`, `v0`, `source`,
//! `cell_size`), then the header `r,V,S_level,S_deriv` and one row per
//! radius. `S_deriv` may be empty. Floats are written with 17 significant
//! digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{make_grid, BinaryMask, BoundingBox};
use crate::profile::{RadialProfile, Source};

pub const PROFILE_HEADER: [&str; 4] = ["r", "V", "S_level", "S_deriv"];

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Tokens of a plain-text format, with `#` comments removed.
fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines().flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace())
}

/// Square P1 bitmap on `[0,1]²`; the first image row is the top (largest y).
pub fn parse_pbm(text: &str) -> Result<BinaryMask> {
    let mut tok = tokens(text);
    if tok.next() != Some("P1") {
        return Err(parse_err("PBM must start with the P1 magic"));
    }
    let mut dim = || -> Result<usize> {
        tok.next().ok_or_else(|| parse_err("PBM header truncated"))?.parse().map_err(|_| parse_err("bad PBM size"))
    };
    let (w, h) = (dim()?, dim()?);
    if w != h {
        return Err(parse_err(format!("PBM must be square, got {w}x{h}")));
    }
    // P1 pixels may be packed without separators.
    let bits: Vec<bool> = tokens(text)
        .skip(3)
        .flat_map(|t| t.chars())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(parse_err(format!("bad PBM pixel `{other}`"))),
        })
        .collect::<Result<_>>()?;
    if bits.len() != w * w {
        return Err(parse_err(format!("PBM has {} pixels, expected {}", bits.len(), w * w)));
    }
    let grid = make_grid(&BoundingBox::cube(2, 0.0, 1.0), w, 2)?;
    let mut cells = vec![false; w * w];
    for row in 0..w {
        for col in 0..w {
            cells[grid.linear([col, w - 1 - row, 0])] = bits[row * w + col];
        }
    }
    BinaryMask::from_cells(grid, cells)
}

pub fn write_pbm(mask: &BinaryMask) -> Result<String> {
    let g = mask.grid();
    if g.dim() != 2 {
        return Err(Error::InvalidGrid("PBM holds 2-dimensional masks only".into()));
    }
    let n = g.n();
    let mut out = format!("P1\n{n} {n}\n");
    for row in 0..n {
        let line: Vec<&str> = (0..n).map(|col| if mask.get([col, n - 1 - row, 0]) { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// `d n` followed by `n^d` 0/1 values, x fastest, on `[0,1]^d`.
pub fn parse_voxels(text: &str) -> Result<BinaryMask> {
    let mut tok = tokens(text);
    let mut num = || -> Result<usize> {
        tok.next().ok_or_else(|| parse_err("voxel header truncated"))?.parse().map_err(|_| parse_err("bad voxel header"))
    };
    let (d, n) = (num()?, num()?);
    let grid = make_grid(&BoundingBox::cube(d, 0.0, 1.0), n, d)?;
    let cells: Vec<bool> = tokens(text)
        .skip(2)
        .map(|t| match t {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(parse_err(format!("bad voxel value `{other}`"))),
        })
        .collect::<Result<_>>()?;
    if cells.len() != grid.len() {
        return Err(parse_err(format!("voxel file has {} values, expected {}", cells.len(), grid.len())));
    }
    BinaryMask::from_cells(grid, cells)
}

pub fn write_voxels(mask: &BinaryMask) -> String {
    let g = mask.grid();
    let mut out = format!("{} {}\n", g.dim(), g.n());
    for row in mask.cells().chunks(g.n()) {
        let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Points with header `x,y` or `x,y,z`.
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["x", "y"] && header != ["x", "y", "z"] {
        return Err(parse_err(format!("points header must be x,y or x,y,z, got {}", header.join(","))));
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let p = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| parse_err(format!("row {}: bad number `{f}`", k + 2))))
            .collect::<Result<Vec<f64>>>()?;
        out.push(p);
    }
    if out.is_empty() {
        return Err(parse_err("points file has no rows"));
    }
    Ok(out)
}

pub fn write_profile(p: &RadialProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#dim={}", p.dim);
    let _ = writeln!(out, "#v0={}", format_float(p.v0));
    let _ = writeln!(out, "#source={}", p.source.as_str());
    if let Some(h) = p.cell_size {
        let _ = writeln!(out, "#cell_size={}", format_float(h));
    }
    out.push_str(&PROFILE_HEADER.join(","));
    out.push('\n');
    for k in 0..p.len() {
        let aux = p.surface_aux.as_ref().map_or(String::new(), |a| format_float(a[k]));
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_float(p.radii[k]),
            format_float(p.volume[k]),
            format_float(p.surface[k]),
            aux
        );
    }
    out
}

pub fn parse_profile(text: &str) -> Result<RadialProfile> {
    let (mut dim, mut v0, mut source, mut cell) = (None, None, None, None);
    let mut body_start = 0;
    for line in text.lines() {
        let Some(meta) = line.strip_prefix('#') else { break };
        body_start += line.len() + 1;
        let (key, value) = meta.split_once('=').ok_or_else(|| parse_err(format!("bad metadata line `{line}`")))?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| parse_err(format!("bad value in `{line}`")));
        match key.trim() {
            "dim" => dim = Some(value.trim().parse::<usize>().map_err(|_| parse_err(format!("bad dim in `{line}`")))?),
            "v0" => v0 = Some(num(value)?),
            "source" => source = Some(Source::parse(value.trim())?),
            "cell_size" => cell = Some(num(value)?),
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| parse_err("missing #dim= metadata"))?;
    let body = text.get(body_start.min(text.len())..).unwrap_or("");
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(body.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != PROFILE_HEADER {
        return Err(parse_err(format!("profile header must be {}, got {}", PROFILE_HEADER.join(","), header.join(","))));
    }
    let (mut r, mut v, mut s, mut aux) = (vec![], vec![], vec![], vec![]);
    let mut has_aux = None;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(format!("profile row {}: {e}", k + 1)))?;
        let num = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|_| parse_err(format!("profile row {}: bad number `{}`", k + 1, &rec[i])))
        };
        r.push(num(0)?);
        v.push(num(1)?);
        s.push(num(2)?);
        let present = !rec[3].trim().is_empty();
        if *has_aux.get_or_insert(present) != present {
            return Err(parse_err(format!("profile row {}: S_deriv must be given on all rows or none", k + 1)));
        }
        if present {
            aux.push(num(3)?);
        }
    }
    let mut p = RadialProfile::raw(dim, r, v, s, v0.unwrap_or(0.0), source.unwrap_or(Source::Grid));
    if has_aux == Some(true) {
        p = p.with_aux(aux);
    }
    if let Some(h) = cell {
        p = p.with_cell_size(h);
    }
    p.validate()?;
    Ok(p)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::gasket_profile;
    use crate::profile::geometric_radii;

    #[test]
    fn pbm_round_trip_and_orientation() {
        let text = "P1\n# a comment\n3 3\n1 0 0\n000\n0 0 1\n";
        let m = parse_pbm(text).unwrap();
        assert!(m.get([0, 2, 0]));
        assert!(m.get([2, 0, 0]));
        assert_eq!(m.count(), 2);
        assert_eq!(parse_pbm(&write_pbm(&m).unwrap()).unwrap(), m);
        assert!(parse_pbm("P1\n2 3\n0 0 0 0 0 0").is_err());
        assert!(parse_pbm("P1\n2 2\n0 0 0").is_err());
    }

    #[test]
    fn voxel_round_trip() {
        let mut cells = vec![false; 64];
        cells[5] = true;
        cells[63] = true;
        let g = make_grid(&BoundingBox::cube(3, 0.0, 1.0), 4, 3).unwrap();
        let m = BinaryMask::from_cells(g, cells).unwrap();
        assert_eq!(parse_voxels(&write_voxels(&m)).unwrap(), m);
    }

    #[test]
    fn points() {
        let p = parse_points("x,y\n0.5, 0.25\n1,2\n").unwrap();
        assert_eq!(p, vec![vec![0.5, 0.25], vec![1.0, 2.0]]);
        assert!(parse_points("a,b\n1,2\n").is_err());
        assert!(parse_points("x,y\n1,nope\n").is_err());
    }

    #[test]
    fn profile_round_trip_is_exact() {
        let p = gasket_profile(&geometric_radii(1e-3, 1.0, 4).unwrap()).unwrap().with_aux(vec![1.0 / 3.0; 41]);
        let text = write_profile(&p);
        let q = parse_profile(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(write_profile(&q), text);
    }

    #[test]
    fn profile_contract() {
        let good = "#dim=2\nr,V,S_level,S_deriv\n0.1,1,2,\n0.2,2,3,\n";
        assert!(parse_profile(good).unwrap().surface_aux.is_none());
        assert!(parse_profile("r,V,S_level,S_deriv\n0.1,1,2,\n").is_err());
        assert!(parse_profile("#dim=2\nr,V,S\n0.1,1,2\n").is_err());
        assert!(parse_profile("#dim=2\nr,V,S_level,S_deriv\n0.1,1,2,3\n0.2,2,3,\n").is_err());
        assert!(parse_profile("#dim=2\nr,V,S_level,S_deriv\n0.1,1,2\n").is_err());
        assert!(matches!(
            parse_profile("#dim=2\nr,V,S_level,S_deriv\n0.2,1,2,\n0.1,2,3,\n"),
            Err(Error::InvalidProfile(_))
        ));
    }
}
