//! Plain-text lattice files: a rank header, flag lines, the Gram rows, and
//! named automorphism blocks. Chosen over a binary format so fixtures stay
//! reviewable diffs.
//!
//! ```text
//! # comment
//! rank 8
//! even true
//! unimodular true
//! gram
//! 2 -1 ...          (rank rows)
//! aut neg
//! -1 0 ...          (rank rows)
//! ```

use orbifold_core::intmat::IMat;
use orbifold_core::lattice::{GramLattice, LatticeMap};
use orbifold_core::znum::Int;
use orbifold_core::{Error, Result};
use std::collections::BTreeMap;

pub struct LatticeFile {
    pub lattice: GramLattice,
    pub maps: BTreeMap<String, LatticeMap>,
}

fn parse_row(line: &str, rank: usize, lineno: usize) -> Result<Vec<Int>> {
    let vals: std::result::Result<Vec<Int>, _> =
        line.split_whitespace().map(|t| t.parse::<Int>()).collect();
    let vals = vals.map_err(|_| Error::ParseError(format!("line {lineno}: bad integer row")))?;
    if vals.len() != rank {
        return Err(Error::ParseError(format!(
            "line {lineno}: expected {rank} entries, found {}",
            vals.len()
        )));
    }
    Ok(vals)
}

pub fn parse_lattice(text: &str) -> Result<LatticeFile> {
    let mut rank: Option<usize> = None;
    let mut even = false;
    let mut unimodular = false;
    let mut gram_rows: Vec<Vec<Int>> = Vec::new();
    let mut maps: BTreeMap<String, LatticeMap> = BTreeMap::new();
    let mut mode: Option<String> = None; // "gram" or "aut <name>"
    let mut pending: Vec<Vec<Int>> = Vec::new();

    let flush = |mode: &Option<String>,
                     pending: &mut Vec<Vec<Int>>,
                     gram_rows: &mut Vec<Vec<Int>>,
                     maps: &mut BTreeMap<String, LatticeMap>,
                     rank: usize,
                     lineno: usize|
     -> Result<()> {
        match mode {
            None => Ok(()),
            Some(m) if m == "gram" => {
                if pending.len() != rank {
                    return Err(Error::ParseError(format!(
                        "line {lineno}: gram block has {} rows, expected {rank}",
                        pending.len()
                    )));
                }
                *gram_rows = std::mem::take(pending);
                Ok(())
            }
            Some(name) => {
                if pending.len() != rank {
                    return Err(Error::ParseError(format!(
                        "line {lineno}: aut block '{name}' has {} rows, expected {rank}",
                        pending.len()
                    )));
                }
                let m = IMat::from_rows(std::mem::take(pending));
                maps.insert(name.clone(), LatticeMap::new(m));
                Ok(())
            }
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap();
        match head {
            "rank" => {
                let r: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::ParseError(format!("line {lineno}: bad rank")))?;
                rank = Some(r);
            }
            "even" => even = toks.next() == Some("true"),
            "unimodular" => unimodular = toks.next() == Some("true"),
            "gram" => {
                let r = rank.ok_or_else(|| {
                    Error::ParseError(format!("line {lineno}: gram before rank"))
                })?;
                flush(&mode, &mut pending, &mut gram_rows, &mut maps, r, lineno)?;
                mode = Some("gram".into());
            }
            "aut" => {
                let r = rank.ok_or_else(|| {
                    Error::ParseError(format!("line {lineno}: aut before rank"))
                })?;
                flush(&mode, &mut pending, &mut gram_rows, &mut maps, r, lineno)?;
                let name = toks
                    .next()
                    .ok_or_else(|| Error::ParseError(format!("line {lineno}: aut needs a name")))?;
                mode = Some(name.to_string());
            }
            _ => {
                let r = rank.ok_or_else(|| {
                    Error::ParseError(format!("line {lineno}: data before rank"))
                })?;
                pending.push(parse_row(line, r, lineno)?);
            }
        }
    }
    let r = rank.ok_or_else(|| Error::ParseError("missing rank".into()))?;
    flush(&mode, &mut pending, &mut gram_rows, &mut maps, r, 0)?;
    if gram_rows.is_empty() {
        return Err(Error::ParseError("missing gram block".into()));
    }
    let lattice = GramLattice::new(IMat::from_rows(gram_rows), even, unimodular)?;
    for (name, map) in &maps {
        if !map.is_automorphism(&lattice) {
            return Err(Error::ValidationError(format!(
                "aut '{name}': g G g^T != G or det != ±1"
            )));
        }
    }
    Ok(LatticeFile { lattice, maps })
}

pub fn render_lattice(lat: &GramLattice, maps: &BTreeMap<String, LatticeMap>) -> String {
    let mut out = String::new();
    out.push_str(&format!("rank {}\n", lat.rank));
    out.push_str(&format!("even {}\n", lat.even));
    out.push_str(&format!("unimodular {}\n", lat.unimodular));
    out.push_str("gram\n");
    for i in 0..lat.rank {
        let row: Vec<String> = (0..lat.rank).map(|j| lat.gram[(i, j)].to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    for (name, m) in maps {
        out.push_str(&format!("aut {name}\n"));
        for i in 0..lat.rank {
            let row: Vec<String> =
                (0..lat.rank).map(|j| m.matrix[(i, j)].to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}
